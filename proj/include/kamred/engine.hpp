#ifndef KAMRED_ENGINE_HPP
#define KAMRED_ENGINE_HPP

// Iterative reduction driver.
//
// State across steps is a diagonal part Lambda = diag(lambda_i) plus a
// ladder of remainder pieces R_{l,m} normalized so the operator at step m is
//
//     A_m = Lambda_m + sum_{l >= m} eps_l R_{l,m},      eps_l = eps^{(4/3)^l}.
//
// One step solves the averaging equation on the truncated level-m piece,
// conjugates by G_m = exp(-i eps_m F_m), absorbs the angular mean into the
// diagonal, and reassembles everything one level up.  The conjugation is
// exact Lie algebra: with Y = i[F, Lambda] (equal to the transport defect of
// F by the averaging equation), the identity
//
//   G* A G - i G* (omega . dtheta G)
//     = Lambda + eps [R]
//       + sum_{j>=1} (i eps)^j eps / j!        ad_F^j (Gamma R)
//       + sum_{t>=1} eps^{t+1} i^t / (t+1)!    ad_F^t (Y)
//       - sum_{j>=1} eps (i eps)^j / (j! (j+1)) ad_F^j (omega . dtheta F)
//       + full conjugation of the truncation tail and the higher pieces
//
// holds with the zeroth and first order terms cancelling exactly; the series
// here start where the formula says they start, and an independent
// brute-force conjugation cross-checks the assembled result every step.
//
// Nothing is dropped silently: products beyond the mode budget, series
// cleanup, everything returns a norm receipt that is accumulated into the
// step's tail and into the error bar of the final eigenvalue corrections.

#include <Eigen/Dense>

#include <vector>

#include "kamred/fourier.hpp"
#include "kamred/homological.hpp"
#include "kamred/potential.hpp"
#include "kamred/schedule.hpp"
#include "kamred/transform.hpp"

namespace kamred {

struct EngineConfig {
  int nfreq = 1;
  int dim = 16;              // retained Dirichlet modes
  int smoothness = 80;       // strip exponent of the schedule
  double eps = 1e-3;
  double gamma = 0.1;
  int max_steps = 4;
  double target_residual = 0.0;  // stop early below this (0 = never)
  int norm_weight = 2;           // weight exponent of the certification norm
  double slack_factor = 10.0;    // allowed slack on growth and tail budgets
  double c2_cap = 4.0;           // admissible per-step growth exponent
  bool strict_schedule = false;
  bool cross_check = true;       // brute-force conjugation check every step
  Eigen::VectorXd omega0;        // base frequency direction, size nfreq
  Eigen::VectorXd mass;          // constant diagonal shift, size dim (or empty)
};

struct StepRecord {
  int index = 0;
  double eps = 0;
  double strip = 0;
  int cutoff = 0;
  double gamma = 0;
  bool decay_certified = false;
  double f_norm = 0;           // |F_m| on the incoming strip
  double g_dist = 0;           // |G_m - id| on the outgoing strip
  double divisor_min = 0;
  long denominators = 0;
  int lie_terms = 0;           // largest ad-power summed across the series
  double receipts = 0;         // folded + compressed mass this step
  double piece_norm_new = 0;   // |R_{m+1,m+1}| after the step
  double growth = 0;           // C(m+1) / C(m)
  double c_meas = 0;           // max piece norm after the step
  double residual = 0;         // sum_l eps_l |R_{l,m+1}|
  double lambda_imag_residue = 0;
  double cross_defect = -1.0;  // -1 when the cross check was skipped

  // diagonal in force while this step was solved, with tau-derivatives;
  // the excision pipeline models lambda^(m)(tau) affinely from these
  Eigen::VectorXd lambda_val;
  Eigen::VectorXd lambda_der;
};

struct ReductionResult {
  Schedule schedule;
  double tau = 0;
  int steps_done = 0;
  bool converged = false;
  std::vector<StepRecord> steps;

  Eigen::VectorXd lambda_initial;
  DiagonalPart<double> diag;   // final frequencies with tau-derivatives
  Eigen::VectorXd xi;          // total diagonal corrections
  double xi_error = 0;         // residual + receipts error bar

  std::vector<StepTransform<double>> transforms;
  FourierMatrix<double> composed;      // G_0 G_1 ... G_{m-1}
  FourierMatrix<double> composed_adj;  // its pointwise inverse
  std::vector<FourierMatrix<double>> pieces;  // final ladder, levels steps_done..

  double c_initial = 0;
  double c1_fit = 0;  // measured growth law C(m) ~ c1 * 2^(c2 m)
  double c2_fit = 0;
  double final_residual = 0;
  double receipts_total = 0;
};

// Brute-force one-step conjugation G* A G - i G* (omega . dtheta G), used by
// the per-step cross check and by the tests.  Receipts for folded mass are
// added to *receipt when given.
FourierMatrix<double> conjugate_full(const FourierMatrix<double>& a,
                                     const StepTransform<double>& tr,
                                     const Eigen::VectorXd& omega, const Eigen::VectorXd& omega0,
                                     int keep, const NormSpec<double>& ns, double* receipt);

ReductionResult reduce(const EngineConfig& cfg, const Potential& w, double tau);

}  // namespace kamred

#endif
