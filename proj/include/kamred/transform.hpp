#ifndef KAMRED_TRANSFORM_HPP
#define KAMRED_TRANSFORM_HPP

// Step transform of the iteration: the angle-frozen unitary
//
//     G(theta) = exp(-i eps F(theta)),
//
// summed directly as a Fourier series via the exponential's power series.
// Freezing the angle is what makes the first-order cancellation exact: the
// generator acts at fixed theta, and the angular transport term is accounted
// separately in the conjugation algebra (the derivative of the exponential
// enters through its own series there).
//
// F Hermitian as a family makes G unitary pointwise, so the inverse is the
// pointwise adjoint, i.e. the reflected-conjugated coefficient family, and
// costs nothing to form.

#include <cmath>
#include <sstream>

#include "kamred/errors.hpp"
#include "kamred/fourier.hpp"

namespace kamred {

template <typename Scalar>
struct StepTransform {
  FourierMatrix<Scalar> g;      // exp(-i eps F)
  FourierMatrix<Scalar> g_adj;  // exp(+i eps F), the pointwise inverse
  Scalar dist_identity = 0;     // |G - id| in the certification norm
  Scalar folded = 0;            // receipt for product mass beyond the cutoff
  int terms = 0;                // series terms actually summed
};

template <typename Scalar>
StepTransform<Scalar> exp_transform(const FourierMatrix<Scalar>& f, Scalar eps, int keep_cutoff,
                                    const NormSpec<Scalar>& ns, Scalar tol, int max_terms) {
  using Complex = std::complex<Scalar>;
  StepTransform<Scalar> out;
  out.g = fm_identity<Scalar>(f.dim, f.nfreq);
  out.g.strip = f.strip;
  out.g.symmetric = false;

  // term_j = (-i eps)^j F^j / j!, built by repeated multiplication
  FourierMatrix<Scalar> term = fm_identity<Scalar>(f.dim, f.nfreq);
  term.strip = f.strip;
  Scalar s = std::min(ns.strip, f.strip);
  int j = 0;
  while (true) {
    ++j;
    if (j > max_terms) {
      std::ostringstream os;
      os << "exp_transform: series above tolerance after " << max_terms << " terms";
      throw NoConvergence(os.str());
    }
    auto prod = fourier_multiply(term, f, keep_cutoff, ns);
    term = std::move(prod.series);
    Complex factor = Complex(0, -eps) / static_cast<Scalar>(j);
    for (auto& [k, c] : term.coeffs) {
      c.val *= factor;
      c.der *= factor;
    }
    // receipt scale: the dropped mass still gets multiplied by this and all
    // later factors; |factor| < 1 in every real use, so charging the full
    // dropped norm is an upper bound
    out.folded += prod.folded * std::abs(factor) + prod.folded_der * std::abs(factor);
    add_scaled(out.g, Complex(1, 0), term);
    Scalar tail = weighted_norm(term, ns.weight, s);
    if (tail < tol) break;
  }
  out.terms = j;

  FourierMatrix<Scalar> dev = out.g;
  add_scaled(dev, Complex(-1, 0), fm_identity<Scalar>(f.dim, f.nfreq));
  out.dist_identity = weighted_norm(dev, ns.weight, s);

  out.g_adj = adjoint_series(out.g);
  return out;
}

}  // namespace kamred

#endif
