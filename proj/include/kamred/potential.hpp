#ifndef KAMRED_POTENTIAL_HPP
#define KAMRED_POTENTIAL_HPP

// Time-quasi-periodic multiplicative potential
//
//     W(theta, x) = sum_{j >= 0} v_j(theta) cos(2 j x),   x in [0, pi],
//
// acting on functions with Dirichlet ends, expanded over sin(l x).  The
// matrix of W in that basis is assembled from the overlap integrals
//
//     c(j, l, k) = integral_0^pi cos(2 j x) sin(l x) sin(k x) dx,
//
// which vanish unless 2j = |l - k| (value pi/4) or 2j = l + k (value -pi/4),
// the j = 0 case degenerating to pi/2 on the diagonal.  Coincident branches
// add.  Even x-harmonics only: odd ones have zero overlap with every
// sin-pair difference of the same parity, and the reduction preserves the
// even sector, so nothing is lost at this interface.

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <vector>

#include "kamred/fourier.hpp"

namespace kamred {

double cosine_coupling(int j, int l, int k);

struct Potential {
  int nfreq = 1;
  // profiles[j] holds the angular Fourier coefficients of v_j; real-valued
  // profiles mean vhat_j(-k) = conj(vhat_j(k)), which the parsers enforce.
  std::vector<std::map<ModeIndex, std::complex<double>>> profiles;

  int max_x_mode() const { return static_cast<int>(profiles.size()) - 1; }
  int support_radius() const;
  // largest |vhat_j(k)| deviation from the reality constraint
  double reality_defect() const;
};

// Matrix family R(theta) of the potential on the first `dim` Dirichlet modes.
// Entries follow row = output mode, column = input mode; the overlap symmetry
// c(j,l,k) = c(j,k,l) makes every coefficient a symmetric matrix.
FourierMatrix<double> assemble_matrix(const Potential& w, Eigen::Index dim);

// Recover profiles from samples W(theta_p, x_q) on the uniform angular grid
// theta_p = 2 pi p / P (rows) and the midpoint spatial grid
// x_q = pi (q + 1/2) / Q (columns).  Keeps x-harmonics j <= max_x and
// angular harmonics |k| <= k_cutoff.  Single angular frequency only.
Potential potential_from_grid(const Eigen::MatrixXd& samples, int max_x, int k_cutoff);

}  // namespace kamred

#endif
