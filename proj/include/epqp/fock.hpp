#ifndef EPQP_FOCK_HPP
#define EPQP_FOCK_HPP

#include <vector>

#include "epqp/common.hpp"

// Truncated Fock-space linear algebra: operators, states, entropies, norms,
// and the gentle-operator primitive.
//
// Conventions fixed here and relied on everywhere else:
//   a = (x + ip)/sqrt(2), H = a*a (no vacuum offset), energy = mean photon number,
//   logarithms base 2 (entropies in bits).

namespace epqp::fock {

struct FockSpace {
  int cutoff = 0;  // levels per mode, basis |0..cutoff-1> (D)
  int modes = 0;   // M

  FockSpace(int cutoff_, int modes_ = 1);
  long dim() const;  // D^M
  bool operator==(const FockSpace&) const = default;
};

// Default cutoff policy: D = ceil(8 * (e_max + 1)).
int default_cutoff(double e_max);

// Maximum tail mass tolerated by state constructors unless overridden.
inline constexpr double kDefaultTailTol = 1e-6;

// Negative eigenvalues in [-kEigClip, 0) are clipped to 0 before entropy/sqrt;
// anything more negative is an error.
inline constexpr double kEigClip = 1e-10;

enum class Check { full, fast };  // fast skips the O(d^3) spectrum validation

struct PureState {
  FockSpace space;
  Vec amp;                 // unit norm to 1e-12 after truncation renormalization
  double tail_mass = 0.0;  // mass lost to the cutoff before renormalization

  PureState(FockSpace space_, Vec amp_, double tail_mass_ = 0.0);
};

struct DensityOperator {
  FockSpace space;
  Mat mat;
  double deficiency = 0.0;  // trace in [1 - deficiency, 1]

  DensityOperator(FockSpace space_, Mat mat_, double deficiency_ = 0.0,
                  Check check = Check::full);
};

DensityOperator pure_to_density(const PureState& psi);

// ---------- basis and index helpers ----------

long levels_to_index(const FockSpace& space, const std::vector<int>& levels);
std::vector<int> index_to_levels(const FockSpace& space, long index);

PureState basis_state(const FockSpace& space, long index);
PureState vacuum(const FockSpace& space);

// ---------- operators ----------

// Annihilation operator on one mode, identity on the rest.
Mat annihilation(const FockSpace& space, int mode = 0);

// Photon-number operator a*a on the given mode, identity on the rest.
Mat number_operator(const FockSpace& space, int mode = 0);

// Sum of the per-mode number operators.
Mat total_number(const FockSpace& space);

// Diagonal of total_number as a real vector (it is diagonal in the Fock basis).
RVec total_number_diag(const FockSpace& space);

// Projector onto span{ |n1..nM> : n1+..+nM <= e_max }.
Mat energy_projector(const FockSpace& space, double e_max);
long energy_rank(const FockSpace& space, double e_max);  // its rank

// ---------- states ----------

// c_n = e^{-|a|^2/2} a^n / sqrt(n!) with a = (xi1 + i xi2)/sqrt(2); single mode.
PureState coherent_state(const FockSpace& space, const Eigen::Vector2d& xi,
                         double tail_tol = kDefaultTailTol);

// Smallest cutoff whose coherent tail mass is <= tol at the given energy |xi|^2/2.
int coherent_required_cutoff(double energy, double tol = kDefaultTailTol);

// Diagonal Gibbs state p_n proportional to (nbar/(nbar+1))^n, renormalized; single mode.
DensityOperator thermal_state(const FockSpace& space, double nbar,
                              double tail_tol = kDefaultTailTol);

double mean_energy(const DensityOperator& rho);  // tr(rho N_total)
double mean_energy(const PureState& psi);

// ---------- norms, entropies, fidelities ----------

double trace_norm(const Mat& a);                    // sum of singular values
double von_neumann_entropy(const DensityOperator&); // bits
double trace_distance(const DensityOperator&, const DensityOperator&);  // in [0,1]
double fidelity(const DensityOperator&, const DensityOperator&);        // tr sqrt(sqrt(r) s sqrt(r))
double fidelity(const PureState&, const PureState&);                    // |<a|b>|

// PSD square root with the clip policy applied to near-zero negatives.
Mat sqrt_psd(const Mat& a);

// ---------- gentle operator ----------

struct GentleResult {
  Mat post;      // sqrt(T) rho sqrt(T), unnormalized
  double kappa;  // 1 - tr(rho T)
  double bound;  // 2 sqrt(kappa)
};

// Requires 0 <= T <= 1 (spectrum within [-1e-10, 1 + 1e-10]).
GentleResult gentle_measure(const DensityOperator& rho, const Mat& T);

// ---------- generic linear algebra helpers ----------

Mat kron(const Mat& a, const Mat& b);

// Partial trace over the factors not listed in `keep` (dims = factor dimensions,
// slowest-varying first, matching kron order).
Mat partial_trace(const Mat& m, const std::vector<long>& dims,
                  const std::vector<int>& keep);

bool is_hermitian(const Mat& a, double tol = 1e-12);

}  // namespace epqp::fock

#endif
