#include "epqp/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

namespace epqp {

int thread_budget() {
  static const int n = [] {
    const char* env = std::getenv("EPQP_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return std::clamp(v, 1, 64);
  }();
  return n;
}

}  // namespace epqp

namespace epqp::fock {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kNormTol = 1e-12;
constexpr double kLog2e = 1.4426950408889634074;  // 1/ln 2

double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

FockSpace::FockSpace(int cutoff_, int modes_) : cutoff(cutoff_), modes(modes_) {
  if (cutoff < 2) throw DomainError("FockSpace: cutoff must be >= 2");
  if (modes < 1) throw DomainError("FockSpace: modes must be >= 1");
  double d = std::pow(static_cast<double>(cutoff), modes);
  if (d > 1e9) throw DomainError("FockSpace: total dimension too large");
}

long FockSpace::dim() const {
  long d = 1;
  for (int m = 0; m < modes; ++m) d *= cutoff;
  return d;
}

int default_cutoff(double e_max) {
  if (e_max < 0) throw DomainError("default_cutoff: negative energy");
  return static_cast<int>(std::ceil(8.0 * (e_max + 1.0)));
}

PureState::PureState(FockSpace space_, Vec amp_, double tail_mass_)
    : space(space_), amp(std::move(amp_)), tail_mass(tail_mass_) {
  if (amp.size() != space.dim())
    throw DomainError("PureState: amplitude length does not match space");
  if (std::abs(amp.norm() - 1.0) > kNormTol)
    throw DomainError("PureState: not unit norm");
  if (tail_mass < 0) throw DomainError("PureState: negative tail mass");
}

DensityOperator::DensityOperator(FockSpace space_, Mat mat_, double deficiency_,
                                 Check check)
    : space(space_), mat(std::move(mat_)), deficiency(deficiency_) {
  const long d = space.dim();
  if (mat.rows() != d || mat.cols() != d)
    throw DomainError("DensityOperator: matrix shape does not match space");
  if (deficiency < 0) throw DomainError("DensityOperator: negative deficiency");
  if (!is_hermitian(mat, kHermTol * std::max(1.0, max_abs(mat))))
    throw DomainError("DensityOperator: not Hermitian");
  double tr = mat.trace().real();
  if (tr > 1.0 + 1e-9 || tr < 1.0 - deficiency - 1e-9)
    throw DomainError("DensityOperator: trace outside [1 - deficiency, 1]");
  if (check == Check::full) {
    Eigen::SelfAdjointEigenSolver<Mat> es(mat, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigClip)
      throw DomainError("DensityOperator: negative eigenvalue beyond tolerance");
  }
}

DensityOperator pure_to_density(const PureState& psi) {
  return DensityOperator(psi.space, psi.amp * psi.amp.adjoint(), 0.0,
                         Check::fast);
}

long levels_to_index(const FockSpace& space, const std::vector<int>& levels) {
  if (static_cast<int>(levels.size()) != space.modes)
    throw DomainError("levels_to_index: wrong number of modes");
  long idx = 0;
  for (int m = 0; m < space.modes; ++m) {
    if (levels[m] < 0 || levels[m] >= space.cutoff)
      throw DomainError("levels_to_index: level out of range");
    idx = idx * space.cutoff + levels[m];
  }
  return idx;
}

std::vector<int> index_to_levels(const FockSpace& space, long index) {
  if (index < 0 || index >= space.dim())
    throw DomainError("index_to_levels: index out of range");
  std::vector<int> levels(space.modes);
  for (int m = space.modes - 1; m >= 0; --m) {
    levels[m] = static_cast<int>(index % space.cutoff);
    index /= space.cutoff;
  }
  return levels;
}

PureState basis_state(const FockSpace& space, long index) {
  if (index < 0 || index >= space.dim())
    throw DomainError("basis_state: index out of range");
  Vec v = Vec::Zero(space.dim());
  v(index) = 1.0;
  return PureState(space, std::move(v));
}

PureState vacuum(const FockSpace& space) { return basis_state(space, 0); }

namespace {

Mat single_mode_annihilation(int cutoff) {
  Mat a = Mat::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Mat embed_on_mode(const FockSpace& space, int mode, const Mat& op) {
  if (mode < 0 || mode >= space.modes)
    throw DomainError("operator mode out of range");
  Mat out = (mode == 0) ? op : Mat(Mat::Identity(space.cutoff, space.cutoff));
  for (int m = 1; m < space.modes; ++m) {
    const Mat& next =
        (m == mode) ? op : Mat(Mat::Identity(space.cutoff, space.cutoff));
    out = kron(out, next);
  }
  if (space.modes == 1) return op;
  return out;
}

}  // namespace

Mat annihilation(const FockSpace& space, int mode) {
  return embed_on_mode(space, mode, single_mode_annihilation(space.cutoff));
}

Mat number_operator(const FockSpace& space, int mode) {
  Mat n = Mat::Zero(space.cutoff, space.cutoff);
  for (int k = 0; k < space.cutoff; ++k) n(k, k) = double(k);
  return embed_on_mode(space, mode, n);
}

Mat total_number(const FockSpace& space) {
  return total_number_diag(space).cast<cplx>().asDiagonal();
}

RVec total_number_diag(const FockSpace& space) {
  const long d = space.dim();
  RVec diag(d);
  for (long i = 0; i < d; ++i) {
    auto levels = index_to_levels(space, i);
    diag(i) = std::accumulate(levels.begin(), levels.end(), 0);
  }
  return diag;
}

Mat energy_projector(const FockSpace& space, double e_max) {
  RVec n = total_number_diag(space);
  Mat p = Mat::Zero(space.dim(), space.dim());
  for (long i = 0; i < space.dim(); ++i)
    if (n(i) <= e_max + 1e-9) p(i, i) = 1.0;
  return p;
}

long energy_rank(const FockSpace& space, double e_max) {
  RVec n = total_number_diag(space);
  long r = 0;
  for (long i = 0; i < space.dim(); ++i)
    if (n(i) <= e_max + 1e-9) ++r;
  return r;
}

PureState coherent_state(const FockSpace& space, const Eigen::Vector2d& xi,
                         double tail_tol) {
  if (space.modes != 1) throw DomainError("coherent_state: single mode only");
  const cplx a(xi(0) / std::sqrt(2.0), xi(1) / std::sqrt(2.0));
  Vec c(space.cutoff);
  c(0) = std::exp(-0.5 * std::norm(a));
  for (int n = 1; n < space.cutoff; ++n) c(n) = c(n - 1) * a / std::sqrt(double(n));
  double kept = c.squaredNorm();
  double tail = std::max(0.0, 1.0 - kept);
  if (tail > tail_tol) {
    int needed = coherent_required_cutoff(0.5 * xi.squaredNorm(), tail_tol);
    throw NumericsError("coherent_state: tail mass " + std::to_string(tail) +
                        " exceeds tolerance; need cutoff >= " +
                        std::to_string(needed));
  }
  c /= std::sqrt(kept);
  return PureState(space, std::move(c), tail);
}

int coherent_required_cutoff(double energy, double tol) {
  if (energy < 0) throw DomainError("coherent_required_cutoff: negative energy");
  // Poisson(|a|^2 = energy) tail by direct summation.
  double p = std::exp(-energy), cum = p;
  int n = 0;
  while (1.0 - cum > tol && n < 100000) {
    ++n;
    p *= energy / n;
    cum += p;
  }
  return n + 1;
}

DensityOperator thermal_state(const FockSpace& space, double nbar,
                              double tail_tol) {
  if (space.modes != 1) throw DomainError("thermal_state: single mode only");
  if (nbar < 0) throw DomainError("thermal_state: negative mean photon number");
  const int d = space.cutoff;
  Mat rho = Mat::Zero(d, d);
  if (nbar == 0.0) {
    rho(0, 0) = 1.0;
    return DensityOperator(space, std::move(rho), 0.0, Check::fast);
  }
  const double q = nbar / (nbar + 1.0);
  const double tail = std::pow(q, d);
  if (tail > tail_tol) {
    int needed = static_cast<int>(std::ceil(std::log(tail_tol) / std::log(q)));
    throw NumericsError("thermal_state: tail mass " + std::to_string(tail) +
                        " exceeds tolerance; need cutoff >= " +
                        std::to_string(needed));
  }
  double norm = 0;
  for (int n = 0; n < d; ++n) norm += std::pow(q, n);
  for (int n = 0; n < d; ++n) rho(n, n) = std::pow(q, n) / norm;
  return DensityOperator(space, std::move(rho), 0.0, Check::fast);
}

double mean_energy(const DensityOperator& rho) {
  RVec n = total_number_diag(rho.space);
  double e = 0;
  for (long i = 0; i < rho.space.dim(); ++i) e += n(i) * rho.mat(i, i).real();
  return e;
}

double mean_energy(const PureState& psi) {
  RVec n = total_number_diag(psi.space);
  double e = 0;
  for (long i = 0; i < psi.space.dim(); ++i) e += n(i) * std::norm(psi.amp(i));
  return e;
}

double trace_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues().sum();
}

double von_neumann_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.mat, Eigen::EigenvaluesOnly);
  double s = 0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam < -kEigClip)
      throw NumericsError("von_neumann_entropy: negative eigenvalue");
    if (lam >= 1e-14) s -= lam * std::log2(lam);
  }
  return s;
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.space.dim() != sigma.space.dim())
    throw DomainError("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.mat - sigma.mat,
                                        Eigen::EigenvaluesOnly);
  double d = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

Mat sqrt_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  RVec lam = es.eigenvalues();
  for (long i = 0; i < lam.size(); ++i) {
    if (lam(i) < -kEigClip) throw NumericsError("sqrt_psd: not PSD");
    lam(i) = std::sqrt(std::max(0.0, lam(i)));
  }
  return es.eigenvectors() * lam.cast<cplx>().asDiagonal() *
         es.eigenvectors().adjoint();
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.space.dim() != sigma.space.dim())
    throw DomainError("fidelity: dimension mismatch");
  double f = trace_norm(sqrt_psd(rho.mat) * sqrt_psd(sigma.mat));
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.space.dim() != b.space.dim())
    throw DomainError("fidelity: dimension mismatch");
  return std::abs(a.amp.dot(b.amp));
}

GentleResult gentle_measure(const DensityOperator& rho, const Mat& T) {
  if (T.rows() != rho.space.dim() || T.cols() != rho.space.dim())
    throw DomainError("gentle_measure: dimension mismatch");
  if (!is_hermitian(T, 1e-12 * std::max(1.0, max_abs(T))))
    throw DomainError("gentle_measure: T not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  RVec lam = es.eigenvalues();
  if (lam.minCoeff() < -kEigClip || lam.maxCoeff() > 1.0 + kEigClip)
    throw DomainError("gentle_measure: T spectrum outside [0, 1]");
  for (long i = 0; i < lam.size(); ++i)
    lam(i) = std::sqrt(std::clamp(lam(i), 0.0, 1.0));
  Mat sqrtT = es.eigenvectors() * lam.cast<cplx>().asDiagonal() *
              es.eigenvectors().adjoint();
  GentleResult r;
  r.post = sqrtT * rho.mat * sqrtT;
  r.kappa = std::max(0.0, 1.0 - (rho.mat * T).trace().real());
  r.bound = 2.0 * std::sqrt(r.kappa);
  return r;
}

Mat kron(const Mat& a, const Mat& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Mat partial_trace(const Mat& m, const std::vector<long>& dims,
                  const std::vector<int>& keep) {
  const int nf = static_cast<int>(dims.size());
  long total = 1;
  for (long d : dims) total *= d;
  if (m.rows() != total || m.cols() != total)
    throw DomainError("partial_trace: dims do not match matrix");
  for (size_t i = 1; i < keep.size(); ++i)
    if (keep[i] <= keep[i - 1])
      throw DomainError("partial_trace: keep indices must be strictly increasing");
  std::vector<char> kept(nf, 0);
  for (int k : keep) {
    if (k < 0 || k >= nf) throw DomainError("partial_trace: keep out of range");
    kept[k] = 1;
  }
  std::vector<long> stride(nf, 1);
  for (int i = nf - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
  long keep_dim = 1, trace_dim = 1;
  for (int i = 0; i < nf; ++i) (kept[i] ? keep_dim : trace_dim) *= dims[i];
  std::vector<int> keep_f, trace_f;
  for (int i = 0; i < nf; ++i) (kept[i] ? keep_f : trace_f).push_back(i);

  auto assemble = [&](long ki, long ti) {
    long full = 0;
    for (int j = static_cast<int>(keep_f.size()) - 1; j >= 0; --j) {
      int f = keep_f[j];
      full += (ki % dims[f]) * stride[f];
      ki /= dims[f];
    }
    for (int j = static_cast<int>(trace_f.size()) - 1; j >= 0; --j) {
      int f = trace_f[j];
      full += (ti % dims[f]) * stride[f];
      ti /= dims[f];
    }
    return full;
  };

  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (long ki = 0; ki < keep_dim; ++ki)
    for (long kj = 0; kj < keep_dim; ++kj) {
      cplx s = 0;
      for (long t = 0; t < trace_dim; ++t)
        s += m(assemble(ki, t), assemble(kj, t));
      out(ki, kj) = s;
    }
  return out;
}

bool is_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol;
}

}  // namespace epqp::fock
