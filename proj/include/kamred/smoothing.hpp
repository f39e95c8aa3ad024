#ifndef KAMRED_SMOOTHING_HPP
#define KAMRED_SMOOTHING_HPP

// Frequency-side mollifiers.
//
// The cutoff profile is the standard C-infinity partition bump: identically
// one below r = 1/2, identically zero above r = 1, glued with
// exp(-1/t) ratios in between.  Applying it at scale sigma multiplies the
// coefficient at k by profile(sigma |k|_1), so harmonics below 1/(2 sigma)
// pass untouched and harmonics above 1/sigma vanish.
//
// The telescoping split along increasing radii K_0 < K_1 < ... turns one
// series into annular pieces whose sum reproduces the input exactly, no
// matter what the profile does in the overlap regions; that exactness is a
// cancellation of multipliers, not an analytic statement, and the tests
// check it to machine precision.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kamred/fourier.hpp"

namespace kamred {

inline double bump_profile(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  double t = 2.0 * r - 1.0;  // in (0,1)
  double g = std::exp(-1.0 / t);
  double gc = std::exp(-1.0 / (1.0 - t));
  return gc / (g + gc);
}

template <typename Scalar>
FourierMatrix<Scalar> smooth(const FourierMatrix<Scalar>& a, Scalar sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("smooth: scale must be positive");
  FourierMatrix<Scalar> r = fm_zero<Scalar>(a.dim, a.nfreq);
  r.strip = a.strip;
  r.symmetric = a.symmetric;
  for (const auto& [k, c] : a.coeffs) {
    double w = bump_profile(static_cast<double>(sigma) * l1_norm(k));
    if (w == 0.0) continue;
    auto& rc = r.at_or_insert(k);
    rc.val = static_cast<Scalar>(w) * c.val;
    rc.der = static_cast<Scalar>(w) * c.der;
  }
  return r;
}

// Split a into radii.size() + 1 pieces: the core below the first radius, one
// annulus per consecutive pair, and the leftover tail.  Pieces sum to a
// exactly because the multipliers telescope mode by mode.
template <typename Scalar>
std::vector<FourierMatrix<Scalar>> smoothing_split(const FourierMatrix<Scalar>& a,
                                                   const std::vector<Scalar>& radii) {
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw std::invalid_argument("smoothing_split: radii must increase strictly");
  for (Scalar r : radii)
    if (!(r > 0)) throw std::invalid_argument("smoothing_split: radii must be positive");

  std::vector<FourierMatrix<Scalar>> pieces;
  pieces.reserve(radii.size() + 1);
  for (std::size_t i = 0; i <= radii.size(); ++i) {
    FourierMatrix<Scalar> p = fm_zero<Scalar>(a.dim, a.nfreq);
    p.strip = a.strip;
    p.symmetric = a.symmetric;
    pieces.push_back(std::move(p));
  }

  for (const auto& [k, c] : a.coeffs) {
    int kn = l1_norm(k);
    double prev = 0.0;  // multiplier already assigned to finer pieces
    for (std::size_t i = 0; i <= radii.size(); ++i) {
      double here = i < radii.size()
                        ? bump_profile(static_cast<double>(kn) / static_cast<double>(radii[i]))
                        : 1.0;
      double w = here - prev;
      prev = here;
      if (w == 0.0) continue;
      auto& pc = pieces[i].at_or_insert(k);
      pc.val = static_cast<Scalar>(w) * c.val;
      pc.der = static_cast<Scalar>(w) * c.der;
    }
  }
  return pieces;
}

}  // namespace kamred

#endif
