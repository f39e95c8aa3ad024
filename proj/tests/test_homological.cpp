#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "kamred/homological.hpp"

using namespace kamred;
using Cd = std::complex<double>;
using FM = FourierMatrix<double>;
using CMat = FM::CMat;
using Vec = Eigen::VectorXd;

namespace {

// Hermitian-as-a-family random remainder: R_hat(-k) = R_hat(k)^H, with
// independent random tau-derivative parts obeying the same constraint.
FM random_hermitian_family(Eigen::Index dim, int nfreq, int radius, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FM r = fm_zero<double>(dim, nfreq);
  auto rand_mat = [&](CMat& m) {
    m.resize(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) m(a, b) = Cd(u(rng), u(rng));
  };
  std::vector<ModeIndex> upper;
  if (nfreq == 1) {
    for (int k = 1; k <= radius; ++k) upper.push_back(mode1(k));
  } else {
    for (int k0 = -radius; k0 <= radius; ++k0)
      for (int k1 = -radius + std::abs(k0); k1 <= radius - std::abs(k0); ++k1) {
        ModeIndex k{k0, k1};
        if (k > negated(k)) upper.push_back(k);
      }
  }
  for (const auto& k : upper) {
    CMat v, d;
    rand_mat(v);
    rand_mat(d);
    auto& ck = r.at_or_insert(k);
    ck.val = v;
    ck.der = d;
    auto& cm = r.at_or_insert(negated(k));
    cm.val = v.adjoint();
    cm.der = d.adjoint();
  }
  CMat v, d;
  rand_mat(v);
  rand_mat(d);
  auto& c0 = r.at_or_insert(zero_mode(nfreq));
  c0.val = 0.5 * (v + v.adjoint()).eval();
  c0.der = 0.5 * (d + d.adjoint()).eval();
  return r;
}

// mode-0 series carrying a diagonal matrix and its derivative
FM diagonal_series(const DiagonalPart<double>& dp, int nfreq) {
  FM s = fm_zero<double>(dp.lambda.size(), nfreq);
  auto& c = s.at_or_insert(zero_mode(nfreq));
  c.val = dp.lambda.cast<Cd>().asDiagonal();
  c.der = dp.lambda_der.cast<Cd>().asDiagonal();
  return s;
}

// series holding only the diagonal of the zero mode of r
FM mean_diagonal_series(const FM& r) {
  FM s = fm_zero<double>(r.dim, r.nfreq);
  const auto* c0 = r.find(zero_mode(r.nfreq));
  auto& c = s.at_or_insert(zero_mode(r.nfreq));
  if (c0) {
    c.val = c0->val.diagonal().asDiagonal();
    c.der = c0->der.diagonal().asDiagonal();
  }
  return s;
}

double max_abs(const FM& a, bool der) {
  double worst = 0;
  for (const auto& [k, c] : a.coeffs)
    worst = std::max(worst, (der ? c.der : c.val).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("solution satisfies the averaging equation, values and derivatives") {
  std::mt19937 rng(515u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int done = 0, attempts = 0;
  while (done < 100 && attempts < 400) {
    ++attempts;
    int nfreq = (done % 2) + 1;
    Eigen::Index dim = 4;
    FM r = random_hermitian_family(dim, nfreq, 3, rng);
    DiagonalPart<double> dp;
    dp.lambda.resize(dim);
    dp.lambda_der.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      dp.lambda(i) = static_cast<double>((i + 1) * (i + 1)) + 0.05 * u(rng);
      dp.lambda_der(i) = 0.3 * u(rng);
    }
    Vec omega0(nfreq), omega(nfreq);
    for (int i = 0; i < nfreq; ++i) omega0(i) = 1.0 + 0.8 * std::abs(u(rng));
    double tau = 1.0 + 0.9 * std::abs(u(rng));
    omega = tau * omega0;

    HomologicalSolution<double> sol;
    try {
      sol = solve_homological(r, dp, omega, omega0, 0.1, tau, 0);
    } catch (const ResonanceViolation&) {
      continue;  // unlucky draw landed inside an excluded zone; redraw
    }
    ++done;

    FM lam = diagonal_series(dp, nfreq);
    FM res = omega_dtheta(sol.f, omega, omega0);
    NormSpec<double> ns{0, 0.0};
    auto br = commutator(sol.f, lam, 1000, ns);
    add_scaled(res, Cd(0, -1), br.series);
    add_scaled(res, Cd(-1, 0), r);
    add_scaled(res, Cd(1, 0), mean_diagonal_series(r));

    CHECK(max_abs(res, false) < 1e-10);
    CHECK(max_abs(res, true) < 1e-10);
    // draws near an exclusion boundary make F large, so measure relatively
    CHECK(hermiticity_defect(sol.f) < 1e-12 * (1.0 + max_abs(sol.f, false)));
    CHECK(sol.divisor_min > 0);
  }
  REQUIRE(done == 100);
}

TEST_CASE("two-mode frozen example and its resonant mirror") {
  DiagonalPart<double> dp;
  dp.lambda.resize(2);
  dp.lambda << 1.0, 4.0;
  dp.lambda_der = Vec::Zero(2);
  Vec omega0(1), omega(1);
  omega0 << 1.0;
  double tau = 1.5;
  omega << tau;

  // harmonic k = -2 coupling modes 1 -> 2: divisor -3 + 1 - 4 = -6
  FM r = fm_zero<double>(2, 1);
  r.at_or_insert(mode1(-2)).val(0, 1) = 1.0;
  r.at_or_insert(mode1(2)).val(1, 0) = 1.0;

  auto sol = solve_homological(r, dp, omega, omega0, 0.1, tau, 0);
  const auto* fm2 = sol.f.find(mode1(-2));
  REQUIRE(fm2 != nullptr);
  CHECK(std::abs(fm2->val(0, 1) - Cd(0, 1.0 / 6.0)) < 1e-15);
  const auto* fp2 = sol.f.find(mode1(2));
  REQUIRE(fp2 != nullptr);
  CHECK(std::abs(fp2->val(1, 0) - Cd(0, -1.0 / 6.0)) < 1e-15);
  CHECK(sol.divisor_min == doctest::Approx(6.0));
  CHECK(sol.denominators == 2);

  // same coupling on the mirrored harmonic sits exactly on the resonance
  // 2 * 1.5 + 1 - 4 = 0 and must be refused with the precise witness
  FM bad = fm_zero<double>(2, 1);
  bad.at_or_insert(mode1(2)).val(0, 1) = 1.0;
  bad.at_or_insert(mode1(-2)).val(1, 0) = 1.0;
  try {
    solve_homological(bad, dp, omega, omega0, 0.1, tau, 3);
    FAIL("resonant divisor was not detected");
  } catch (const ResonanceViolation& e) {
    // the conjugate slot (k = -2, modes 2 -> 1) names the same resonance and
    // is visited first in mode order
    CHECK(e.k == ModeIndex{-2});
    CHECK(e.i == 2);
    CHECK(e.j == 1);
    CHECK(e.divisor == doctest::Approx(0.0));
    CHECK(e.tau == doctest::Approx(1.5));
    CHECK(e.step == 3);
  }
}

TEST_CASE("zero numerators never touch a dangerous divisor") {
  DiagonalPart<double> dp;
  dp.lambda.resize(2);
  dp.lambda << 1.0, 4.0;
  dp.lambda_der = Vec::Zero(2);
  Vec omega0(1), omega(1);
  omega0 << 1.0;
  omega << 1.5;

  // the (1,2) slot of k = +2 is resonant, but its numerator is zero;
  // only the harmless (2,1) slot is populated
  FM r = fm_zero<double>(2, 1);
  r.at_or_insert(mode1(2)).val(1, 0) = 1.0;
  r.at_or_insert(mode1(-2)).val(0, 1) = 1.0;
  auto sol = solve_homological(r, dp, omega, omega0, 0.1, 1.5, 0);
  CHECK(sol.denominators == 2);
  CHECK(sol.divisor_min == doctest::Approx(6.0));
}

TEST_CASE("divisor thresholds: harmonic, static, and the boundary") {
  // k != 0 pairs are guarded by gamma / |k|^{n+3}
  CHECK(divisor_threshold(mode1(2), 1, 3, 0.1) == doctest::Approx(0.1 / 16.0));
  CHECK(divisor_threshold(ModeIndex{1, -2}, 2, 2, 0.05) == doctest::Approx(0.05 / 243.0));
  // k = 0 pairs ride the eigenvalue separation
  CHECK(divisor_threshold(mode1(0), 2, 3, 0.1) == doctest::Approx(2.5));

  DiagonalPart<double> dp;
  dp.lambda.resize(2);
  dp.lambda << 1.0, 4.0;
  dp.lambda_der = Vec::Zero(2);
  Vec omega0(1), omega(1);
  omega0 << 1.0;

  FM r = fm_zero<double>(2, 1);
  r.at_or_insert(mode1(1)).val(0, 1) = 1.0;
  r.at_or_insert(mode1(-1)).val(1, 0) = 1.0;

  // divisor omega - 3: at omega = 3.05 it is 0.05 < 0.1, refused
  omega << 3.05;
  CHECK_THROWS_AS(solve_homological(r, dp, omega, omega0, 0.1, 3.05, 0), ResonanceViolation);
  // at omega = 3.2 it is 0.2 >= 0.1, accepted
  omega << 3.2;
  auto sol = solve_homological(r, dp, omega, omega0, 0.1, 3.2, 0);
  CHECK(sol.divisor_min == doctest::Approx(0.2));

  // a collapsed static gap is refused even with k = 0
  DiagonalPart<double> collapsed;
  collapsed.lambda.resize(2);
  collapsed.lambda << 1.0, 1.9;
  collapsed.lambda_der = Vec::Zero(2);
  FM r0 = fm_zero<double>(2, 1);
  auto& c0 = r0.at_or_insert(mode1(0));
  c0.val(0, 1) = 1.0;
  c0.val(1, 0) = 1.0;
  omega << 1.5;
  CHECK_THROWS_AS(solve_homological(r0, collapsed, omega, omega0, 0.1, 1.5, 0), ResonanceViolation);
}

TEST_CASE("mean diagonal is left for the eigenvalue update") {
  DiagonalPart<double> dp;
  dp.lambda.resize(3);
  dp.lambda << 1.0, 4.0, 9.0;
  dp.lambda_der = Vec::Zero(3);
  Vec omega0(1), omega(1);
  omega0 << 1.0;
  omega << 1.37;

  FM r = fm_zero<double>(3, 1);
  auto& c0 = r.at_or_insert(mode1(0));
  c0.val.setIdentity();
  c0.val(0, 2) = Cd(0.3, 0);
  c0.val(2, 0) = Cd(0.3, 0);
  auto sol = solve_homological(r, dp, omega, omega0, 0.1, 1.37, 0);
  const auto* f0 = sol.f.find(mode1(0));
  REQUIRE(f0 != nullptr);
  for (int i = 0; i < 3; ++i) CHECK(f0->val(i, i) == Cd(0, 0));
  CHECK(std::abs(f0->val(0, 2) - Cd(0, -1) * Cd(0.3, 0) / (1.0 - 9.0)) < 1e-15);
  CHECK(sol.denominators == 2);
}
