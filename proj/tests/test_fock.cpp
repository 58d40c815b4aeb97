#include <doctest.h>

#include <cmath>
#include <random>

#include "epqp/fock.hpp"

using namespace epqp;
using namespace epqp::fock;

namespace {

Mat random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

Vec random_pure(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

// Random T with 0 <= T <= 1: PSD matrix scaled by its top eigenvalue.
Mat random_effect(int d, std::mt19937_64& rng) {
  Mat w = random_density(d, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(w, Eigen::EigenvaluesOnly);
  return w / es.eigenvalues().maxCoeff();
}

}  // namespace

// ---------- spaces and operators ----------

TEST_CASE("number operator diagonals") {
  FockSpace s3(3);
  Mat n = number_operator(s3);
  CHECK(n(0, 0).real() == 0.0);
  CHECK(n(1, 1).real() == 1.0);
  CHECK(n(2, 2).real() == 2.0);
  CHECK(n.cwiseAbs().sum() == doctest::Approx(3.0));

  FockSpace s22(2, 2);
  Mat n0 = number_operator(s22, 0);
  CHECK(n0(0, 0).real() == 0.0);
  CHECK(n0(1, 1).real() == 0.0);
  CHECK(n0(2, 2).real() == 1.0);
  CHECK(n0(3, 3).real() == 1.0);

  // expectation on |2> is the eigenvalue 2
  auto two = basis_state(s3, 2);
  CHECK(mean_energy(two) == doctest::Approx(2.0));
}

TEST_CASE("space validation") {
  CHECK_THROWS_AS(FockSpace(1), DomainError);
  CHECK_THROWS_AS(FockSpace(4, 0), DomainError);
  CHECK_THROWS_AS(number_operator(FockSpace(4, 2), 2), DomainError);
  CHECK(FockSpace(3, 2).dim() == 9);
  CHECK(default_cutoff(1.0) == 16);
  CHECK(default_cutoff(3.0) == 32);
}

TEST_CASE("annihilation ladder") {
  FockSpace s(6);
  Mat a = annihilation(s);
  auto three = basis_state(s, 3);
  Vec out = a * three.amp;
  CHECK(std::abs(out(2) - cplx(std::sqrt(3.0), 0)) < 1e-14);
  // [a, a*] = 1 away from the cutoff corner
  Mat comm = a * a.adjoint() - a.adjoint() * a;
  for (int i = 0; i + 1 < s.cutoff; ++i)
    CHECK(std::abs(comm(i, i) - cplx(1, 0)) < 1e-13);
}

// ---------- coherent and thermal states ----------

TEST_CASE("coherent state basics") {
  FockSpace s(32);
  auto vac = coherent_state(s, {0.0, 0.0});
  CHECK(std::abs(vac.amp(0) - cplx(1, 0)) < 1e-14);
  CHECK(vac.tail_mass == 0.0);

  // energy E with xi = (sqrt(2E), 0)
  const double E = 2.0;
  auto c = coherent_state(s, {std::sqrt(2.0 * E), 0.0});
  CHECK(mean_energy(c) == doctest::Approx(E).epsilon(1e-5));
  CHECK(c.tail_mass < 1e-6);

  // eigenstate of the annihilation operator with eigenvalue (xi1 + i xi2)/sqrt(2)
  auto d = coherent_state(s, {1.0, 0.7});
  cplx alpha(1.0 / std::sqrt(2.0), 0.7 / std::sqrt(2.0));
  Vec resid = annihilation(s) * d.amp - alpha * d.amp;
  CHECK(resid.norm() < 1e-5);
}

TEST_CASE("coherent tail policy") {
  // cutoff far too small for the requested energy
  CHECK_THROWS_AS(coherent_state(FockSpace(4), {4.0, 0.0}), NumericsError);
  int need = coherent_required_cutoff(8.0, 1e-6);
  CHECK(need > 8);
  auto ok = coherent_state(FockSpace(need), {4.0, 0.0});
  CHECK(ok.tail_mass <= 1e-6);
}

TEST_CASE("thermal state against direct summation oracle") {
  FockSpace s(64);
  const double nbar = 1.0;
  auto rho = thermal_state(s, nbar);

  // oracle: mean of the truncated renormalized geometric distribution
  const double q = nbar / (nbar + 1.0);
  double z = 0, m1 = 0;
  for (int n = 0; n < s.cutoff; ++n) {
    double p = std::pow(q, n);
    z += p;
    m1 += n * p;
  }
  CHECK(mean_energy(rho) == doctest::Approx(m1 / z).epsilon(1e-12));
  CHECK(mean_energy(rho) == doctest::Approx(nbar).epsilon(1e-6));

  // closed forms: g(1) = 2 bits
  CHECK(von_neumann_entropy(rho) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(mean_energy(thermal_state(s, 0.0)) == 0.0);
  CHECK_THROWS_AS(thermal_state(FockSpace(4), 5.0), NumericsError);
}

// ---------- entropies, norms, fidelities ----------

TEST_CASE("entropy basics") {
  FockSpace s(4);
  CHECK(von_neumann_entropy(pure_to_density(basis_state(s, 1))) ==
        doctest::Approx(0.0).epsilon(1e-12));
  DensityOperator mixed(s, Mat::Identity(4, 4) / 4.0);
  CHECK(von_neumann_entropy(mixed) == doctest::Approx(2.0));
}

TEST_CASE("entropy additive on product states") {
  std::mt19937_64 rng(11);
  FockSpace s(5), s2(5, 2);
  for (int t = 0; t < 5; ++t) {
    Mat a = random_density(5, rng), b = random_density(5, rng);
    DensityOperator ra(s, a), rb(s, b), rab(s2, kron(a, b));
    CHECK(von_neumann_entropy(rab) ==
          doctest::Approx(von_neumann_entropy(ra) + von_neumann_entropy(rb))
              .epsilon(1e-9));
  }
}

TEST_CASE("trace distance and fidelity") {
  FockSpace s(8);
  std::mt19937_64 rng(3);
  auto rho = DensityOperator(s, random_density(8, rng));
  CHECK(trace_distance(rho, rho) == doctest::Approx(0.0));
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0));

  auto e0 = pure_to_density(basis_state(s, 0));
  auto e1 = pure_to_density(basis_state(s, 1));
  CHECK(trace_distance(e0, e1) == doctest::Approx(1.0));
  CHECK(fidelity(e0, e1) == doctest::Approx(0.0));

  // |0> vs coherent xi=(1,0): F = e^{-1/4}
  auto c = coherent_state(s, {1.0, 0.0});
  CHECK(fidelity(vacuum(s), c) == doctest::Approx(0.7788007830714049).epsilon(1e-6));
  CHECK(fidelity(pure_to_density(vacuum(s)), pure_to_density(c)) ==
        doctest::Approx(0.7788007830714049).epsilon(1e-6));
}

TEST_CASE("Fuchs-van de Graaf consistency on random pairs") {
  std::mt19937_64 rng(17);
  FockSpace s(6);
  for (int t = 0; t < 20; ++t) {
    DensityOperator a(s, random_density(6, rng)), b(s, random_density(6, rng));
    double td = trace_distance(a, b), f = fidelity(a, b);
    CHECK(1.0 - f <= td + 1e-9);
    CHECK(td <= std::sqrt(1.0 - f * f) + 1e-9);
  }
}

// ---------- constructor validation ----------

TEST_CASE("density operator invariants enforced") {
  FockSpace s(3);
  Mat bad = Mat::Zero(3, 3);
  bad(0, 1) = 1.0;  // not Hermitian
  bad(0, 0) = 1.0;
  CHECK_THROWS_AS(DensityOperator(s, bad), DomainError);

  Mat neg = Mat::Zero(3, 3);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;  // negative eigenvalue
  CHECK_THROWS_AS(DensityOperator(s, neg), DomainError);

  Mat half = Mat::Zero(3, 3);
  half(0, 0) = 0.5;  // trace below window
  CHECK_THROWS_AS(DensityOperator(s, half), DomainError);
  CHECK_NOTHROW(DensityOperator(s, half, 0.5));  // declared deficiency

  CHECK_THROWS_AS(PureState(s, Vec::Zero(3)), DomainError);
}

// ---------- gentle operator ----------

TEST_CASE("gentle measurement trivial cases") {
  FockSpace s(8);
  std::mt19937_64 rng(23);
  DensityOperator rho(s, random_density(8, rng));

  auto r1 = gentle_measure(rho, Mat::Identity(8, 8));
  CHECK((r1.post - rho.mat).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r1.bound == doctest::Approx(0.0));

  // projector capturing all of rho's support
  Mat p = Mat::Zero(8, 8);
  p(0, 0) = p(1, 1) = 1.0;
  Mat supported = Mat::Zero(8, 8);
  supported(0, 0) = 0.25;
  supported(1, 1) = 0.75;
  auto r2 = gentle_measure(DensityOperator(s, supported), p);
  CHECK(r2.kappa == doctest::Approx(0.0));
  CHECK(r2.bound == doctest::Approx(0.0));
}

TEST_CASE("gentle measurement inequality on random trials") {
  FockSpace s(8);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    DensityOperator rho(s, random_density(8, rng));
    Mat T = random_effect(8, rng);
    auto r = gentle_measure(rho, T);
    double lhs = trace_norm(rho.mat - r.post);
    CHECK(lhs <= r.bound + 1e-10);
  }
}

TEST_CASE("gentle measurement rejects bad effects") {
  FockSpace s(4);
  std::mt19937_64 rng(5);
  DensityOperator rho(s, random_density(4, rng));
  CHECK_THROWS_AS(gentle_measure(rho, Mat(2.0 * Mat::Identity(4, 4))), DomainError);
  CHECK_THROWS_AS(gentle_measure(rho, Mat(-0.1 * Mat::Identity(4, 4))), DomainError);
}

// ---------- helpers ----------

TEST_CASE("partial trace and kron") {
  std::mt19937_64 rng(7);
  Mat a = random_density(3, rng), b = random_density(4, rng);
  Mat ab = kron(a, b);
  Mat ta = partial_trace(ab, {3, 4}, {0});
  Mat tb = partial_trace(ab, {3, 4}, {1});
  CHECK((ta - a).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((tb - b).cwiseAbs().maxCoeff() < 1e-13);

  // three factors, keep outer pair
  Mat c = random_density(2, rng);
  Mat abc = kron(kron(a, b), c);
  Mat tac = partial_trace(abc, {3, 4, 2}, {0, 2});
  CHECK((tac - kron(a, c)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy projector") {
  FockSpace s(4, 2);
  Mat p = energy_projector(s, 1.0);
  CHECK(energy_rank(s, 1.0) == 3);  // |00>, |01>, |10>
  CHECK(p.trace().real() == doctest::Approx(3.0));
  CHECK(energy_rank(s, 0.0) == 1);
  CHECK(energy_rank(FockSpace(8), 3.5) == 4);
}
