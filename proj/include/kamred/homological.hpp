#ifndef KAMRED_HOMOLOGICAL_HPP
#define KAMRED_HOMOLOGICAL_HPP

// Solver for the averaging equation of one reduction step.
//
// Given the current diagonal frequencies lambda_i and the remainder family
// R(theta), find F(theta) with
//
//     (omega . d/dtheta) F  -  i (F Lambda - Lambda F)  =  R - [R],
//
// where [R] is the angular mean's diagonal.  Coefficientwise the equation
// decouples completely:
//
//     F_hat_ij(k) = -i R_hat_ij(k) / d(k,i,j),
//     d(k,i,j)    = <k, omega> + lambda_i - lambda_j,
//
// with the (k = 0, i = j) slots left at zero; those carry the eigenvalue
// update instead.  Every used divisor is checked against the certified
// lower bound for the retained parameter set; a miss throws with the exact
// witness so the caller can report which harmonic pinched.
//
// R Hermitian as a family (R_hat(-k) = R_hat(k)^H) makes F Hermitian as a
// family too, so the step transform built from it is unitary.  F is not
// entrywise symmetric; the divisor breaks that symmetry on purpose.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "kamred/errors.hpp"
#include "kamred/fourier.hpp"

namespace kamred {

// Diagonal frequencies lambda_i(tau) with their ray-parameter derivatives.
template <typename Scalar>
struct DiagonalPart {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda_der;
};

// Certified lower bound for |d(k,i,j)| on the retained set.  Harmonics k != 0
// are protected by excision down to gamma_m / |k|^{n+3}; the static pairs
// k = 0, i != j ride on the eigenvalue separation itself.
template <typename Scalar>
Scalar divisor_threshold(const ModeIndex& k, int i, int j, Scalar gamma_m) {
  int kn = l1_norm(k);
  if (kn == 0) {
    auto gap = static_cast<Scalar>(std::abs(i * i - j * j));
    return Scalar(0.5) * gap;
  }
  Scalar weight = std::pow(static_cast<Scalar>(kn), static_cast<Scalar>(k.size()) + 3);
  return gamma_m / weight;
}

template <typename Scalar>
struct HomologicalSolution {
  FourierMatrix<Scalar> f;
  Scalar divisor_min = std::numeric_limits<Scalar>::infinity();
  long denominators = 0;  // divisors actually used (nonzero numerator)
};

template <typename Scalar>
HomologicalSolution<Scalar> solve_homological(const FourierMatrix<Scalar>& r,
                                              const DiagonalPart<Scalar>& diag,
                                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& omega,
                                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& omega0,
                                              Scalar gamma_m, Scalar tau, int step_index) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index dim = r.dim;
  if (diag.lambda.size() != dim)
    throw ConfigError("solve_homological: frequency vector size mismatch");

  HomologicalSolution<Scalar> out;
  out.f = fm_zero<Scalar>(dim, r.nfreq);
  out.f.strip = r.strip;

  for (const auto& [k, c] : r.coeffs) {
    Scalar kw = dot(k, omega);
    Scalar kw0 = dot(k, omega0);
    bool is_zero_mode = l1_norm(k) == 0;

    auto& fc = out.f.at_or_insert(k);
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (is_zero_mode && a == b) continue;  // mean diagonal feeds the eigenvalue update
        Complex num = c.val(a, b);
        Complex num_der = c.der(a, b);
        if (num == Complex(0, 0) && num_der == Complex(0, 0)) continue;

        Scalar d = kw + diag.lambda(a) - diag.lambda(b);
        Scalar thr = divisor_threshold(k, static_cast<int>(a) + 1, static_cast<int>(b) + 1, gamma_m);
        if (!(std::abs(d) >= thr))
          throw ResonanceViolation(k, static_cast<int>(a) + 1, static_cast<int>(b) + 1,
                                   static_cast<double>(d), static_cast<double>(tau), step_index);
        out.divisor_min = std::min(out.divisor_min, std::abs(d));
        ++out.denominators;

        Complex fval = Complex(0, -1) * num / d;
        // derivative of the divisor along the ray
        Scalar dd = kw0 + diag.lambda_der(a) - diag.lambda_der(b);
        fc.val(a, b) = fval;
        fc.der(a, b) = (Complex(0, -1) * num_der - fval * dd) / d;
      }
    }
  }
  return out;
}

}  // namespace kamred

#endif
