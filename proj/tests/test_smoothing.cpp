#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kamred/smoothing.hpp"

using namespace kamred;
using Cd = std::complex<double>;
using FM = FourierMatrix<double>;

TEST_CASE("cutoff profile: plateau, support, midpoint, symmetry") {
  CHECK(bump_profile(0.0) == 1.0);
  CHECK(bump_profile(0.5) == 1.0);
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(2.0) == 0.0);
  CHECK(bump_profile(0.75) == doctest::Approx(0.5));
  // the glue is antisymmetric about its midpoint
  for (double r : {0.55, 0.6, 0.7, 0.85, 0.95})
    CHECK(bump_profile(r) + bump_profile(1.5 - r) == doctest::Approx(1.0));
  // monotone decreasing across the transition
  double prev = 1.0;
  for (int i = 1; i <= 100; ++i) {
    double v = bump_profile(0.5 + 0.005 * i);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("profile glues flatly at both ends") {
  // all derivatives vanish at the seams; a finite difference just inside
  // each seam must already be tiny
  double h = 1e-3;
  CHECK(std::abs(bump_profile(0.5 + h) - 1.0) < 1e-100);
  CHECK(std::abs(bump_profile(1.0 - h)) < 1e-100);
}

TEST_CASE("mollifier scales coefficients by the profile of sigma |k|") {
  FM a = fm_zero<double>(2, 1);
  for (int k = 0; k <= 4; ++k) a.at_or_insert(mode1(k)).val.setIdentity();
  FM s = smooth(a, 0.25);
  auto factor = [&](int k) {
    const auto* c = s.find(mode1(k));
    return c ? c->val(0, 0).real() : 0.0;
  };
  CHECK(factor(0) == 1.0);
  CHECK(factor(1) == 1.0);
  CHECK(factor(2) == 1.0);
  CHECK(factor(3) == doctest::Approx(0.5));
  CHECK(s.find(mode1(4)) == nullptr);
}

TEST_CASE("telescoping split reassembles exactly and respects supports") {
  std::mt19937 rng(2024u);
  std::uniform_real_distribution<double> u(-1, 1);
  FM a = fm_zero<double>(3, 1);
  for (int k = -12; k <= 12; ++k) {
    auto& c = a.at_or_insert(mode1(k));
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q) {
        c.val(r, q) = Cd(u(rng), u(rng));
        c.der(r, q) = Cd(u(rng), u(rng));
      }
  }
  std::vector<double> radii{2.0, 5.0, 9.0};
  auto pieces = smoothing_split(a, radii);
  REQUIRE(pieces.size() == 4);

  // supports: piece i lives where the profile at radius K_i is active
  for (const auto& [k, c] : pieces[0].coeffs) CHECK(l1_norm(k) < 2);
  for (const auto& [k, c] : pieces[1].coeffs) {
    CHECK(l1_norm(k) >= 1);
    CHECK(l1_norm(k) < 5);
  }
  for (const auto& [k, c] : pieces[3].coeffs) CHECK(l1_norm(k) > 4);

  FM sum = pieces[0];
  for (std::size_t i = 1; i < pieces.size(); ++i) add_scaled(sum, Cd(1, 0), pieces[i]);
  for (const auto& [k, c] : a.coeffs) {
    const auto* sc = sum.find(k);
    REQUIRE(sc != nullptr);
    CHECK((sc->val - c.val).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((sc->der - c.der).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("band-limited input collapses the split to its first piece") {
  FM a = fm_zero<double>(2, 1);
  a.at_or_insert(mode1(0)).val.setIdentity();
  a.at_or_insert(mode1(1)).val.setConstant(Cd(0.5, 0.5));
  a.at_or_insert(mode1(-1)).val.setConstant(Cd(0.5, -0.5));
  auto pieces = smoothing_split(a, {4.0, 8.0});
  REQUIRE(pieces.size() == 3);
  CHECK(pieces[0].coeffs.size() == 3);
  CHECK(pieces[1].coeffs.empty());
  CHECK(pieces[2].coeffs.empty());
}

TEST_CASE("tail mass of a power-law series scales like the smoothness exponent") {
  // f_hat(k) = |k|^{-(N+1)} with N = 80; the mass the mollifier removes,
  // sum_k (1 - profile(sigma |k|)) |k|^{-(N+1)}, must scale close to
  // sigma^{N-1} through the window sigma = 2^{-5} .. 2^{-9}.
  const int N = 80;
  auto removed = [&](double sigma) {
    double acc = 0.0;
    int kmax = static_cast<int>(std::ceil(1.0 / sigma)) + 2;
    for (int k = 1; k <= kmax; ++k) {
      double w = 1.0 - bump_profile(sigma * k);
      if (w > 0) acc += 2.0 * w * std::pow(static_cast<double>(k), -(N + 1.0));
    }
    return acc;
  };
  std::vector<double> lx, ly;
  for (int e = 5; e <= 9; ++e) {
    double sigma = std::pow(2.0, -e);
    lx.push_back(std::log2(sigma));
    ly.push_back(std::log2(removed(sigma)));
  }
  double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - (N - 1)) < 0.15 * (N - 1));
}
