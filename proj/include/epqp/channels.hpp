#ifndef EPQP_CHANNELS_HPP
#define EPQP_CHANNELS_HPP

#include <optional>
#include <string>
#include <vector>

#include "epqp/fock.hpp"

// The channel zoo on truncated Fock spaces, (alpha,beta)-energy-limitation
// checking, and the compression map. Channels are CP maps in Kraus form with
// an explicit trace-preservation deficiency: after a cutoff, amplifier-like
// Kraus families are only approximately TP, and inequality checks run on a
// guard-restricted subspace to keep truncation artifacts out.

namespace epqp::chan {

struct EnergyBudget {
  double E;      // input energy bound, > 0
  double alpha;  // >= 1
  double beta;   // >= 0

  EnergyBudget(double E_, double alpha_, double beta_);
};

struct KrausChannel {
  long din = 0, dout = 0;
  std::vector<Mat> kraus;
  std::string label;
  double tp_deficiency = 0.0;  // || sum K*K - 1 ||_inf on the full space
};

// Validates sum K*K <= 1 + 1e-9 and records the deficiency.
KrausChannel make_channel(std::vector<Mat> kraus, std::string label);

KrausChannel identity_channel(long dim);
KrausChannel unitary_channel(const Mat& u, std::string label);

// ---------- single-mode zoo ----------

// Quantum-limited attenuator, transmissivity lambda in [0,1]; |xi> -> |sqrt(lambda) xi>.
KrausChannel attenuator(double lambda, const fock::FockSpace& space);

// Quantum-limited amplifier, gain mu > 1; vacuum -> thermal with <N> = mu - 1.
KrausChannel amplifier(double mu, const fock::FockSpace& space);

// Phase rotation exp(-i phi N); single Kraus, exactly TP.
KrausChannel rotation(double phi, const fock::FockSpace& space);

struct GaugeCovariantParams {
  double lambda;  // [0, 1]
  double phi;     // [0, 2pi)
  double mu;      // (1, mu_max]; mu == 1 encodes "no amplifier" (identity factor)

  GaugeCovariantParams(double lambda_, double phi_, double mu_);
  // mu <= beta + 1 must hold when tied to a budget.
  void validate_against(const EnergyBudget& budget) const;
};

// A_mu . R_phi . T_lambda, composed in that order.
KrausChannel gauge_covariant(const GaugeCovariantParams& p,
                             const fock::FockSpace& space);

// exp(alpha a* - conj(alpha) a) with alpha = (d1 + i d2)/sqrt(2); multimode d
// has layout (x1, p1, x2, p2, ...).
KrausChannel displacement_unitary(const RVec& d, const fock::FockSpace& space);

// exp((s/2) a^2 - (s/2) a*^2); phase-space action diag(e^{-s}, e^{s}).
KrausChannel squeezer_unitary(double s, const fock::FockSpace& space);

struct GaussianUnitaryParams {
  RMat S;  // 2M x 2M, symplectic: S^T Omega S = Omega to 1e-9
  RVec d;  // 2M displacement

  GaussianUnitaryParams(RMat S_, RVec d_);
  int modes() const { return static_cast<int>(d.size()) / 2; }
  // ||S - 1||_inf <= sqrt(alpha) + 1 and |d|^2 <= 2 beta must hold under a budget.
  void validate_against(const EnergyBudget& budget) const;
};

RMat symplectic_form(int modes);  // Omega = direct sum of [[0,1],[-1,0]]

// Metaplectic representation: exp(-i H) with H = (1/2) X^T G X, G = -Omega log S
// (principal branch), followed by the displacement. M <= 3.
KrausChannel gaussian_unitary(const GaussianUnitaryParams& p,
                              const fock::FockSpace& space);

struct EulerAngles {
  double theta1, s, theta2;  // S = R(theta1) diag(e^{-s}, e^{s}) R(theta2)
};
EulerAngles euler_decompose(const RMat& S);  // M = 1 only

// ---------- energy limitation ----------

struct EnergyLimitVerdict {
  bool pass = false;
  double margin = 0.0;  // min eigenvalue of alpha H + beta - Phi*(H) on the guard subspace
  long subspace_dim = 0;
};

inline int default_guard(const fock::FockSpace& space) {
  return (space.cutoff + 3) / 4;  // ceil(D/4)
}

// Checks Phi*(H) <= alpha H + beta restricted to total energy <= D-1-guard.
EnergyLimitVerdict energy_limit_check(const KrausChannel& phi,
                                      const fock::FockSpace& space,
                                      const EnergyBudget& budget,
                                      int guard = -1);

// Max |(sum K*K - 1)_{ij}| over the guard-restricted subspace.
double guarded_completeness_deficiency(const KrausChannel& phi,
                                       const fock::FockSpace& space,
                                       int guard = -1);

// ---------- compression ----------

// K(rho) = P rho P + tr(rho (1-P)) |0><0| with P the projector onto total
// energy <= E/delta; exactly TP.
KrausChannel compression_map(double E, double delta,
                             const fock::FockSpace& space);

// ---------- algebra ----------

inline constexpr int kKrausCap = 10000;

KrausChannel compose(const KrausChannel& second, const KrausChannel& first);
KrausChannel tensor(const KrausChannel& a, const KrausChannel& b);

Mat apply_mat(const KrausChannel& phi, const Mat& rho);
fock::DensityOperator apply(const KrausChannel& phi,
                            const fock::DensityOperator& rho,
                            const fock::FockSpace& out_space);

// Remove Kraus operators with Frobenius norm <= tol.
KrausChannel prune(const KrausChannel& phi, double tol = 1e-14);

// Rebuild a minimal Kraus family from the Choi eigendecomposition.
KrausChannel recompress(const KrausChannel& phi, double tol = 1e-12);

// ---------- Choi calculus (representation-independent comparison) ----------

// Normalized Choi state (Phi tensor id)(|Omega><Omega|), trace ~ 1 for TP maps.
Mat choi_state(const KrausChannel& phi);

// (1/2) || J(A) - J(B) ||_1 ; dense, use for moderate dimensions.
double choi_trace_distance(const KrausChannel& a, const KrausChannel& b);

// Hilbert-Schmidt distance || J(A) - J(B) ||_2 from Kraus overlaps only;
// cheap in the Kraus counts, never materializes the Choi matrices.
double choi_hs_distance(const KrausChannel& a, const KrausChannel& b);

}  // namespace epqp::chan

#endif
