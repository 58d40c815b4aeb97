#include "epqp/channels.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace epqp::chan {

namespace {

using fock::FockSpace;

double op_norm(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double op_norm_real(const RMat& a) {
  Eigen::JacobiSVD<RMat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// sqrt of binom(n,k) p^{n-k} q^k computed in log space; p or q may be 0.
double sqrt_binom_weight(int n, int k, double p, double q) {
  if (p == 0.0 && n != k) return 0.0;
  if (q == 0.0 && k != 0) return 0.0;
  double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
              std::lgamma(n - k + 1.0);
  if (p > 0.0) lg += (n - k) * std::log(p);
  if (q > 0.0) lg += k * std::log(q);
  return std::exp(0.5 * lg);
}

Mat quadrature_x(const FockSpace& space, int mode) {
  Mat a = fock::annihilation(space, mode);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

Mat quadrature_p(const FockSpace& space, int mode) {
  Mat a = fock::annihilation(space, mode);
  return cplx(0, -1) * (a - a.adjoint()) / std::sqrt(2.0);
}

// exp(generator) evaluated on an enlarged ambient space, then restricted to
// the requested cutoff. Truncating the generator first corrupts its boundary
// rows (e.g. x^2 + p^2 loses an O(D) diagonal entry at the top Fock level);
// restricting the ambient propagator instead keeps the low block exact and
// makes the lost amplitude an honest unitarity deficiency.
template <typename GenBuilder>
Mat ambient_exp_restrict(const FockSpace& space, GenBuilder&& gen) {
  int pad = (space.modes == 1) ? space.cutoff + 8
                               : std::max(6, space.cutoff / 2 + 4);
  FockSpace big(space.cutoff + pad, space.modes);
  Mat u_big = gen(big).exp();
  std::vector<long> keep;
  keep.reserve(space.dim());
  for (long i = 0; i < big.dim(); ++i) {
    auto lv = fock::index_to_levels(big, i);
    bool in = true;
    for (int l : lv) in = in && (l < space.cutoff);
    if (in) keep.push_back(i);
  }
  Mat u(keep.size(), keep.size());
  for (size_t r = 0; r < keep.size(); ++r)
    for (size_t c = 0; c < keep.size(); ++c) u(r, c) = u_big(keep[r], keep[c]);
  return u;
}

}  // namespace

EnergyBudget::EnergyBudget(double E_, double alpha_, double beta_)
    : E(E_), alpha(alpha_), beta(beta_) {
  if (E <= 0) throw DomainError("EnergyBudget: E must be > 0");
  if (alpha < 1) throw DomainError("EnergyBudget: alpha must be >= 1");
  if (beta < 0) throw DomainError("EnergyBudget: beta must be >= 0");
}

KrausChannel make_channel(std::vector<Mat> kraus, std::string label) {
  if (kraus.empty()) throw DomainError("make_channel: no Kraus operators");
  const long dout = kraus.front().rows(), din = kraus.front().cols();
  Mat acc = Mat::Zero(din, din);
  for (const Mat& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw DomainError("make_channel: inconsistent Kraus shapes");
    acc += k.adjoint() * k;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(acc - Mat::Identity(din, din),
                                        Eigen::EigenvaluesOnly);
  double hi = es.eigenvalues().maxCoeff();
  if (hi > 1e-9)
    throw DomainError("make_channel: sum K*K exceeds identity: " + label);
  KrausChannel ch;
  ch.din = din;
  ch.dout = dout;
  ch.kraus = std::move(kraus);
  ch.label = std::move(label);
  ch.tp_deficiency = es.eigenvalues().cwiseAbs().maxCoeff();
  return ch;
}

KrausChannel identity_channel(long dim) {
  return make_channel({Mat::Identity(dim, dim)}, "id");
}

KrausChannel unitary_channel(const Mat& u, std::string label) {
  return make_channel({u}, std::move(label));
}

KrausChannel attenuator(double lambda, const FockSpace& space) {
  if (lambda < 0.0 || lambda > 1.0)
    throw DomainError("attenuator: lambda outside [0,1]");
  if (space.modes != 1) throw DomainError("attenuator: single mode only");
  const int d = space.cutoff;
  std::vector<Mat> ks;
  for (int k = 0; k < d; ++k) {
    Mat kk = Mat::Zero(d, d);
    bool nonzero = false;
    for (int n = k; n < d; ++n) {
      double w = sqrt_binom_weight(n, k, lambda, 1.0 - lambda);
      if (w != 0.0) nonzero = true;
      kk(n - k, n) = w;
    }
    if (nonzero) ks.push_back(std::move(kk));
  }
  return make_channel(std::move(ks), "att(" + std::to_string(lambda) + ")");
}

KrausChannel amplifier(double mu, const FockSpace& space) {
  if (mu <= 1.0) throw DomainError("amplifier: mu must be > 1");
  if (space.modes != 1) throw DomainError("amplifier: single mode only");
  const int d = space.cutoff;
  const double t = std::sqrt(1.0 - 1.0 / mu);   // tanh r
  const double lc = 0.5 * std::log(mu);         // log cosh r
  std::vector<Mat> ks;
  for (int m = 0; m < d; ++m) {
    Mat km = Mat::Zero(d, d);
    bool nonzero = false;
    for (int n = 0; n + m < d; ++n) {
      // sqrt(binom(n+m, m)) tanh^m / cosh^{n+1}
      double lg = 0.5 * (std::lgamma(n + m + 1.0) - std::lgamma(m + 1.0) -
                         std::lgamma(n + 1.0));
      double w = (t == 0.0 && m != 0)
                     ? 0.0
                     : std::exp(lg + (m > 0 ? m * std::log(t) : 0.0) -
                                (n + 1.0) * lc);
      if (w != 0.0) nonzero = true;
      km(n + m, n) = w;
    }
    if (nonzero) ks.push_back(std::move(km));
  }
  return make_channel(std::move(ks), "amp(" + std::to_string(mu) + ")");
}

KrausChannel rotation(double phi, const FockSpace& space) {
  RVec n = fock::total_number_diag(space);
  Mat u = Mat::Zero(space.dim(), space.dim());
  for (long i = 0; i < space.dim(); ++i)
    u(i, i) = std::exp(cplx(0, -phi * n(i)));
  return make_channel({std::move(u)}, "rot(" + std::to_string(phi) + ")");
}

GaugeCovariantParams::GaugeCovariantParams(double lambda_, double phi_,
                                           double mu_)
    : lambda(lambda_), phi(phi_), mu(mu_) {
  if (lambda < 0.0 || lambda > 1.0)
    throw DomainError("GaugeCovariantParams: lambda outside [0,1]");
  if (phi < 0.0 || phi >= 2.0 * M_PI + 1e-12)
    throw DomainError("GaugeCovariantParams: phi outside [0,2pi)");
  if (mu < 1.0) throw DomainError("GaugeCovariantParams: mu < 1");
}

void GaugeCovariantParams::validate_against(const EnergyBudget& budget) const {
  if (mu > budget.beta + 1.0 + 1e-12)
    throw DomainError("GaugeCovariantParams: mu exceeds beta + 1");
}

KrausChannel gauge_covariant(const GaugeCovariantParams& p,
                             const FockSpace& space) {
  KrausChannel ch = attenuator(p.lambda, space);
  if (p.phi != 0.0) ch = compose(rotation(p.phi, space), ch);
  if (p.mu > 1.0) ch = compose(amplifier(p.mu, space), ch);
  if (static_cast<long>(ch.kraus.size()) > 4 * space.dim())
    ch = recompress(ch);
  ch.label = "gc(" + std::to_string(p.lambda) + "," + std::to_string(p.phi) +
             "," + std::to_string(p.mu) + ")";
  return ch;
}

KrausChannel displacement_unitary(const RVec& d, const FockSpace& space) {
  if (d.size() != 2 * space.modes)
    throw DomainError("displacement_unitary: d must have length 2M");
  RMat omega = symplectic_form(space.modes);
  RVec od = omega * d;
  Mat gen = Mat::Zero(space.dim(), space.dim());
  for (int m = 0; m < space.modes; ++m) {
    gen += cplx(0, 1) * od(2 * m) * quadrature_x(space, m);
    gen += cplx(0, 1) * od(2 * m + 1) * quadrature_p(space, m);
  }
  Mat u = gen.exp();
  return make_channel({std::move(u)}, "disp");
}

KrausChannel squeezer_unitary(double s, const FockSpace& space) {
  if (space.modes != 1) throw DomainError("squeezer_unitary: single mode only");
  Mat a = fock::annihilation(space);
  Mat gen = 0.5 * s * (a * a - (a * a).adjoint());
  Mat u = gen.exp();
  return make_channel({std::move(u)}, "sq(" + std::to_string(s) + ")");
}

GaussianUnitaryParams::GaussianUnitaryParams(RMat S_, RVec d_)
    : S(std::move(S_)), d(std::move(d_)) {
  if (d.size() % 2 != 0 || d.size() == 0)
    throw DomainError("GaussianUnitaryParams: d must have even length");
  if (S.rows() != d.size() || S.cols() != d.size())
    throw DomainError("GaussianUnitaryParams: S must be 2M x 2M");
  RMat omega = symplectic_form(modes());
  if ((S.transpose() * omega * S - omega).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("GaussianUnitaryParams: S not symplectic");
}

void GaussianUnitaryParams::validate_against(const EnergyBudget& budget) const {
  double reach = std::sqrt(budget.alpha) + 1.0;
  if (op_norm_real(S - RMat::Identity(S.rows(), S.cols())) > reach + 1e-12)
    throw DomainError("GaussianUnitaryParams: ||S - 1|| exceeds sqrt(alpha) + 1");
  if (d.squaredNorm() > 2.0 * budget.beta + 1e-12)
    throw DomainError("GaussianUnitaryParams: |d|^2 exceeds 2 beta");
}

RMat symplectic_form(int modes) {
  RMat omega = RMat::Zero(2 * modes, 2 * modes);
  for (int m = 0; m < modes; ++m) {
    omega(2 * m, 2 * m + 1) = 1.0;
    omega(2 * m + 1, 2 * m) = -1.0;
  }
  return omega;
}

KrausChannel gaussian_unitary(const GaussianUnitaryParams& p,
                              const FockSpace& space) {
  if (space.modes > 3) throw DomainError("gaussian_unitary: M <= 3 supported");
  if (space.modes != p.modes())
    throw DomainError("gaussian_unitary: params/space mode mismatch");
  const int tm = 2 * space.modes;

  // Principal-branch log of S fails on the negative real axis.
  Eigen::EigenSolver<RMat> es(p.S);
  for (int i = 0; i < tm; ++i) {
    cplx lam = es.eigenvalues()(i);
    if (lam.real() < 0 && std::abs(lam.imag()) < 1e-12 * std::abs(lam.real()))
      throw DomainError(
          "gaussian_unitary: S has an eigenvalue on the negative real axis; "
          "split S into two factors and compose the results");
  }
  Mat logS = p.S.cast<cplx>().log();
  if (logS.imag().cwiseAbs().maxCoeff() > 1e-8)
    throw NumericsError("gaussian_unitary: matrix log left the real algebra");
  RMat omega = symplectic_form(space.modes);
  RMat G = -omega * logS.real();
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericsError("gaussian_unitary: generator not symmetric");
  G = 0.5 * (G + G.transpose());

  std::vector<Mat> X(tm);
  for (int m = 0; m < space.modes; ++m) {
    X[2 * m] = quadrature_x(space, m);
    X[2 * m + 1] = quadrature_p(space, m);
  }
  Mat H = Mat::Zero(space.dim(), space.dim());
  for (int j = 0; j < tm; ++j)
    for (int k = 0; k < tm; ++k)
      if (G(j, k) != 0.0) H += 0.5 * G(j, k) * X[j] * X[k];
  Mat uS = (cplx(0, -1) * H).exp();

  Mat u = uS;
  if (p.d.cwiseAbs().maxCoeff() > 0.0) {
    KrausChannel disp = displacement_unitary(p.d, space);
    u = disp.kraus[0] * uS;
  }
  return make_channel({std::move(u)}, "gu");
}

EulerAngles euler_decompose(const RMat& S) {
  if (S.rows() != 2 || S.cols() != 2)
    throw DomainError("euler_decompose: M = 1 only");
  Eigen::JacobiSVD<RMat> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RMat u = svd.matrixU(), v = svd.matrixV();
  RVec sig = svd.singularValues();
  if (u.determinant() < 0) {  // det S = 1, so both factors flip together
    u.col(1) *= -1.0;
    v.col(1) *= -1.0;
  }
  // With R(t) = [[cos t, sin t], [-sin t, cos t]] and rotations U = R(tu),
  // V^T = R(tv):  S = R(tu) diag(s0, 1/s0) R(tv), s0 >= 1 descending; the
  // identity diag(a, b) = R(-pi/2) diag(b, a) R(pi/2) moves it to canonical
  // diag(e^{-s}, e^{s}) order.
  double tu = std::atan2(u(0, 1), u(0, 0));
  double tv = std::atan2(v(1, 0), v(0, 0));
  EulerAngles e;
  e.theta1 = tu - M_PI / 2.0;
  e.s = std::log(sig(0));
  e.theta2 = tv + M_PI / 2.0;
  return e;
}

EnergyLimitVerdict energy_limit_check(const KrausChannel& phi,
                                      const FockSpace& space,
                                      const EnergyBudget& budget, int guard) {
  if (phi.din != space.dim() || phi.dout != space.dim())
    throw DomainError("energy_limit_check: channel/space mismatch");
  if (guard < 0) guard = default_guard(space);
  if (guard >= space.cutoff)
    throw DomainError("energy_limit_check: guard leaves empty subspace");
  const double e_lim = double(space.cutoff - 1 - guard);

  RVec ndiag = fock::total_number_diag(space);
  Mat h = fock::total_number(space);
  Mat a = Mat::Zero(space.dim(), space.dim());
  for (const Mat& k : phi.kraus) a -= k.adjoint() * h * k;
  a += budget.beta * Mat::Identity(space.dim(), space.dim());
  a += budget.alpha * h;

  std::vector<long> keep;
  for (long i = 0; i < space.dim(); ++i)
    if (ndiag(i) <= e_lim + 1e-9) keep.push_back(i);
  if (keep.empty())
    throw DomainError("energy_limit_check: guard leaves empty subspace");
  Mat sub(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) sub(i, j) = a(keep[i], keep[j]);

  Eigen::SelfAdjointEigenSolver<Mat> es(sub, Eigen::EigenvaluesOnly);
  EnergyLimitVerdict v;
  v.margin = es.eigenvalues().minCoeff();
  v.pass = v.margin >= -1e-8;
  v.subspace_dim = static_cast<long>(keep.size());
  return v;
}

double guarded_completeness_deficiency(const KrausChannel& phi,
                                       const FockSpace& space, int guard) {
  if (phi.din != space.dim())
    throw DomainError("guarded_completeness_deficiency: channel/space mismatch");
  if (guard < 0) guard = default_guard(space);
  const double e_lim = double(space.cutoff - 1 - guard);
  Mat acc = Mat::Zero(phi.din, phi.din);
  for (const Mat& k : phi.kraus) acc += k.adjoint() * k;
  acc -= Mat::Identity(phi.din, phi.din);
  RVec ndiag = fock::total_number_diag(space);
  double worst = 0.0;
  for (long i = 0; i < space.dim(); ++i)
    for (long j = 0; j < space.dim(); ++j)
      if (ndiag(i) <= e_lim + 1e-9 && ndiag(j) <= e_lim + 1e-9)
        worst = std::max(worst, std::abs(acc(i, j)));
  return worst;
}

KrausChannel compression_map(double E, double delta, const FockSpace& space) {
  if (delta <= 0.0 || delta > 1.0)
    throw DomainError("compression_map: delta outside (0,1]");
  if (E <= 0.0) throw DomainError("compression_map: E must be > 0");
  const double cut = E / delta;
  const double e_max = double(space.modes * (space.cutoff - 1));
  if (cut > e_max)
    throw DomainError("compression_map: threshold E/delta exceeds the cutoff");
  RVec ndiag = fock::total_number_diag(space);
  Mat p = Mat::Zero(space.dim(), space.dim());
  std::vector<Mat> ks;
  std::vector<long> high;
  for (long i = 0; i < space.dim(); ++i) {
    if (ndiag(i) <= cut + 1e-9)
      p(i, i) = 1.0;
    else
      high.push_back(i);
  }
  ks.push_back(std::move(p));
  for (long i : high) {
    Mat l = Mat::Zero(space.dim(), space.dim());
    l(0, i) = 1.0;
    ks.push_back(std::move(l));
  }
  return make_channel(std::move(ks), "compress");
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.din != first.dout)
    throw DomainError("compose: dimension mismatch");
  size_t count = second.kraus.size() * first.kraus.size();
  if (count > static_cast<size_t>(kKrausCap))
    throw NumericsError(
        "compose: Kraus blow-up (" + std::to_string(count) +
        " operators); recompress the factors first");
  std::vector<Mat> ks;
  ks.reserve(count);
  for (const Mat& b : second.kraus)
    for (const Mat& a : first.kraus) {
      Mat prod = b * a;
      if (prod.cwiseAbs().maxCoeff() > 0.0) ks.push_back(std::move(prod));
    }
  if (ks.empty()) ks.push_back(Mat::Zero(second.dout, first.din));
  KrausChannel out = make_channel(std::move(ks),
                                  second.label + "." + first.label);
  return out;
}

KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  size_t count = a.kraus.size() * b.kraus.size();
  if (count > static_cast<size_t>(kKrausCap))
    throw NumericsError("tensor: Kraus blow-up; recompress the factors first");
  std::vector<Mat> ks;
  ks.reserve(count);
  for (const Mat& ka : a.kraus)
    for (const Mat& kb : b.kraus) ks.push_back(fock::kron(ka, kb));
  return make_channel(std::move(ks), a.label + "(x)" + b.label);
}

Mat apply_mat(const KrausChannel& phi, const Mat& rho) {
  if (rho.rows() != phi.din || rho.cols() != phi.din)
    throw DomainError("apply: state dimension mismatch");
  Mat out = Mat::Zero(phi.dout, phi.dout);
  for (const Mat& k : phi.kraus) out += k * rho * k.adjoint();
  return out;
}

fock::DensityOperator apply(const KrausChannel& phi,
                            const fock::DensityOperator& rho,
                            const FockSpace& out_space) {
  Mat out = apply_mat(phi, rho.mat);
  double tr = out.trace().real();
  double deficiency = std::max(0.0, 1.0 - tr) + 1e-12;
  return fock::DensityOperator(out_space, std::move(out), deficiency,
                               fock::Check::fast);
}

KrausChannel prune(const KrausChannel& phi, double tol) {
  std::vector<Mat> ks;
  for (const Mat& k : phi.kraus)
    if (k.norm() > tol) ks.push_back(k);
  if (ks.empty()) ks.push_back(Mat::Zero(phi.dout, phi.din));
  KrausChannel out = phi;
  out.kraus = std::move(ks);
  return out;
}

namespace {

// Row-major vec: w[a * din + i] = K(a, i), scaled by 1/sqrt(din).
Vec choi_vec(const Mat& k) {
  const long dout = k.rows(), din = k.cols();
  Vec w(dout * din);
  for (long a = 0; a < dout; ++a)
    for (long i = 0; i < din; ++i) w(a * din + i) = k(a, i);
  return w / std::sqrt(double(din));
}

}  // namespace

Mat choi_state(const KrausChannel& phi) {
  const long n = phi.dout * phi.din;
  Mat j = Mat::Zero(n, n);
  for (const Mat& k : phi.kraus) {
    Vec w = choi_vec(k);
    j.noalias() += w * w.adjoint();
  }
  return j;
}

double choi_trace_distance(const KrausChannel& a, const KrausChannel& b) {
  if (a.din != b.din || a.dout != b.dout)
    throw DomainError("choi_trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(choi_state(a) - choi_state(b),
                                        Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double choi_hs_distance(const KrausChannel& a, const KrausChannel& b) {
  if (a.din != b.din || a.dout != b.dout)
    throw DomainError("choi_hs_distance: dimension mismatch");
  auto overlap = [](const KrausChannel& x, const KrausChannel& y) {
    double s = 0;
    for (const Mat& kx : x.kraus)
      for (const Mat& ky : y.kraus) {
        cplx ip = (kx.adjoint() * ky).trace();
        s += std::norm(ip);
      }
    return s / (double(x.din) * double(y.din));
  };
  double d2 = overlap(a, a) + overlap(b, b) - 2.0 * overlap(a, b);
  return std::sqrt(std::max(0.0, d2));
}

KrausChannel recompress(const KrausChannel& phi, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(choi_state(phi));
  std::vector<Mat> ks;
  const long n = es.eigenvalues().size();
  for (long e = 0; e < n; ++e) {
    double lam = es.eigenvalues()(e);
    if (lam <= tol) continue;
    Vec v = es.eigenvectors().col(e);
    Mat k(phi.dout, phi.din);
    for (long a = 0; a < phi.dout; ++a)
      for (long i = 0; i < phi.din; ++i) k(a, i) = v(a * phi.din + i);
    ks.push_back(std::sqrt(lam * double(phi.din)) * k);
  }
  if (ks.empty()) ks.push_back(Mat::Zero(phi.dout, phi.din));
  return make_channel(std::move(ks), phi.label);
}

}  // namespace epqp::chan
