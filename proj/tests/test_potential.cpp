#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "kamred/errors.hpp"
#include "kamred/potential.hpp"

using namespace kamred;
using Cd = std::complex<double>;

namespace {

// Adaptive Simpson quadrature, the oracle for the overlap integrals.  The
// first few splits are unconditional: trig integrands whose period divides
// the dyadic sample lattice would otherwise fool the error estimator into
// accepting a zero-variation panel (seen for l + k divisible by 8).
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double tol, int depth, int force) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (force <= 0 && (depth <= 0 || std::abs(delta) < 15 * tol)) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, fm, flm, tol / 2, depth - 1, force - 1) +
         simpson(f, m, b, fm, fb, frm, tol / 2, depth - 1, force - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), tol, 30, 7);
}

double overlap_by_quadrature(int j, int l, int k) {
  return integrate([=](double x) { return std::cos(2.0 * j * x) * std::sin(l * x) * std::sin(k * x); },
                   0.0, M_PI);
}

}  // namespace

TEST_CASE("overlap integrals: frozen values") {
  CHECK(cosine_coupling(1, 3, 1) == doctest::Approx(M_PI / 4));
  CHECK(cosine_coupling(0, 5, 5) == doctest::Approx(M_PI / 2));
  CHECK(cosine_coupling(2, 1, 3) == doctest::Approx(-M_PI / 4));
  CHECK(cosine_coupling(1, 1, 4) == 0.0);
  CHECK(cosine_coupling(1, 1, 1) == doctest::Approx(-M_PI / 4));
  CHECK(cosine_coupling(0, 2, 3) == 0.0);
}

TEST_CASE("overlap integrals agree with quadrature across the whole range") {
  for (int j = 0; j <= 8; ++j)
    for (int l = 1; l <= 16; ++l)
      for (int k = 1; k <= 16; ++k) {
        double closed = cosine_coupling(j, l, k);
        double quad = overlap_by_quadrature(j, l, k);
        CHECK(std::abs(closed - quad) < 1e-11);
      }
}

TEST_CASE("overlap symmetry in the two sine indices") {
  for (int j = 0; j <= 5; ++j)
    for (int l = 1; l <= 10; ++l)
      for (int k = 1; k <= 10; ++k) CHECK(cosine_coupling(j, l, k) == cosine_coupling(j, k, l));
}

TEST_CASE("assembled matrix for a single rotating profile") {
  // v_1(theta) = cos(theta) multiplying cos(2x), three Dirichlet modes
  Potential w;
  w.nfreq = 1;
  w.profiles.resize(2);
  w.profiles[1][mode1(1)] = Cd(0.5, 0);
  w.profiles[1][mode1(-1)] = Cd(0.5, 0);

  FourierMatrix<double> r = assemble_matrix(w, 3);
  CHECK(r.symmetric);
  CHECK(symmetry_defect(r) == 0.0);
  CHECK(hermiticity_defect(r) < 1e-15);

  for (int s : {-1, 1}) {
    const auto* c = r.find(mode1(s));
    REQUIRE(c != nullptr);
    Eigen::MatrixXcd expect(3, 3);
    expect << Cd(-M_PI / 8, 0), Cd(0, 0), Cd(M_PI / 8, 0),
              Cd(0, 0),         Cd(0, 0), Cd(0, 0),
              Cd(M_PI / 8, 0),  Cd(0, 0), Cd(0, 0);
    CHECK((c->val - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(c->der.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(r.find(mode1(0)) == nullptr);
}

TEST_CASE("constant x-profile gives pi/2 times identity") {
  Potential w;
  w.profiles.resize(1);
  w.profiles[0][mode1(0)] = Cd(1.0, 0);
  FourierMatrix<double> r = assemble_matrix(w, 4);
  const auto* c = r.find(mode1(0));
  REQUIRE(c != nullptr);
  CHECK((c->val - Cd(M_PI / 2, 0) * Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("grid ingestion reproduces a known band-limited potential") {
  // W(theta, x) = (0.3 + 0.8 cos theta) + 1.2 sin(2 theta) cos(2x) + 0.1 cos(6x)
  int P = 32, Q = 24;
  Eigen::MatrixXd samples(P, Q);
  for (int p = 0; p < P; ++p) {
    double th = 2.0 * M_PI * p / P;
    for (int q = 0; q < Q; ++q) {
      double x = M_PI * (q + 0.5) / Q;
      samples(p, q) = 0.3 + 0.8 * std::cos(th) + 1.2 * std::sin(2 * th) * std::cos(2 * x) +
                      0.1 * std::cos(6 * x);
    }
  }
  Potential w = potential_from_grid(samples, 4, 5);
  REQUIRE(w.max_x_mode() == 4);
  CHECK(w.reality_defect() < 1e-13);

  auto get = [&](int j, int k) {
    auto it = w.profiles[static_cast<std::size_t>(j)].find(mode1(k));
    return it == w.profiles[static_cast<std::size_t>(j)].end() ? Cd(0, 0) : it->second;
  };
  CHECK(std::abs(get(0, 0) - Cd(0.3, 0)) < 1e-13);
  CHECK(std::abs(get(0, 1) - Cd(0.4, 0)) < 1e-13);
  CHECK(std::abs(get(0, -1) - Cd(0.4, 0)) < 1e-13);
  // sin(2 theta) = (e^{2i theta} - e^{-2i theta}) / (2i)
  CHECK(std::abs(get(1, 2) - Cd(0, -0.6)) < 1e-13);
  CHECK(std::abs(get(1, -2) - Cd(0, 0.6)) < 1e-13);
  CHECK(std::abs(get(3, 0) - Cd(0.1, 0)) < 1e-13);
  CHECK(std::abs(get(2, 0)) < 1e-13);
  CHECK(std::abs(get(4, 1)) < 1e-13);

  // reconstruct on an independent point and compare with the analytic value
  double th = 0.77, x = 1.31;
  Cd acc(0, 0);
  for (int j = 0; j <= 4; ++j)
    for (const auto& [k, v] : w.profiles[static_cast<std::size_t>(j)])
      acc += v * std::exp(Cd(0, k[0] * th)) * std::cos(2.0 * j * x);
  double truth = 0.3 + 0.8 * std::cos(th) + 1.2 * std::sin(2 * th) * std::cos(2 * x) +
                 0.1 * std::cos(6 * x);
  CHECK(std::abs(acc - Cd(truth, 0)) < 1e-12);
}

TEST_CASE("grid ingestion rejects under-resolved requests") {
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(8, 8);
  CHECK_THROWS_AS(potential_from_grid(samples, 4, 2), ConfigError);
  CHECK_THROWS_AS(potential_from_grid(samples, 2, 4), ConfigError);
}
