#ifndef KAMRED_SCHEDULE_HPP
#define KAMRED_SCHEDULE_HPP

// Per-step parameters of the quadratic iteration: the perturbation ladder
// eps_v = eps^{(4/3)^v}, the analyticity strips drawn from it, the harmonic
// cutoffs, and the shrinking divisor thresholds.
//
// Two facts about the strips matter for everything downstream:
//   * the raw strip eps_{v+1}^{1/N} is clamped to 1/2 before use (angles
//     live on a fixed torus; certifying wider strips buys nothing), and
//   * the exponential gain e^{-K_v (s_v - s_{v+1})} only beats eps_v^{3/2}
//     once the strips actually start separating, which for moderate eps and
//     large N happens a few steps in, not at step zero.  Each step records
//     whether the gain held; a run may demand it (strict mode) or carry the
//     flags as diagnostics.

#include <vector>

namespace kamred {

struct StepParams {
  int index = 0;
  double eps = 0;        // perturbation size entering this step
  double eps_next = 0;   // target size after the step
  double strip_raw = 0;  // eps_next^{1/N} before clamping
  double strip = 0;      // working strip, min(strip_raw, 1/2)
  bool clamped = false;
  double strip_next = 0;  // next step's working strip (for the gain check)
  int cutoff = 0;         // harmonic truncation radius K_v
  double gamma = 0;       // divisor threshold scale gamma_v = gamma / 2^v
  // e^{-K_v (s_v - s_{v+1})} <= eps_v^{3/2}, the smoothing gain that powers
  // the quadratic convergence estimate.
  bool decay_certified = false;
  double decay_lhs = 0;
  double decay_rhs = 0;
};

struct Schedule {
  double eps0 = 0;
  int smoothness = 0;  // exponent driving the strip choice
  std::vector<StepParams> steps;
};

// Build the schedule for max_steps steps.  Throws ScheduleError if the ladder
// degenerates numerically (underflow to zero) or, in strict mode, if any
// step's exponential gain fails.
Schedule make_schedule(double eps, int smoothness, double gamma, int max_steps, bool strict);

}  // namespace kamred

#endif
