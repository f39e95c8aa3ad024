#include "kamred/schedule.hpp"

#include <cmath>
#include <sstream>

#include "kamred/errors.hpp"

namespace kamred {

Schedule make_schedule(double eps, int smoothness, double gamma, int max_steps, bool strict) {
  if (!(eps > 0) || eps >= 1) throw ScheduleError("schedule: eps must lie in (0,1)");
  if (smoothness < 2) throw ScheduleError("schedule: smoothness exponent must be >= 2");
  if (!(gamma > 0)) throw ScheduleError("schedule: gamma must be positive");
  if (max_steps < 1) throw ScheduleError("schedule: need at least one step");

  Schedule sched;
  sched.eps0 = eps;
  sched.smoothness = smoothness;

  // eps_v = eps^{(4/3)^v}; we need one past the end for the last strip pair.
  std::vector<double> ladder(static_cast<std::size_t>(max_steps) + 2);
  double abs_log_eps = -std::log(eps);
  for (int v = 0; v < max_steps + 2; ++v) {
    double expo = std::pow(4.0 / 3.0, v);
    ladder[static_cast<std::size_t>(v)] = std::exp(-expo * abs_log_eps);
    if (ladder[static_cast<std::size_t>(v)] <= 0.0) {
      std::ostringstream os;
      os << "schedule: eps ladder underflows at step " << v;
      throw ScheduleError(os.str());
    }
  }

  auto raw_strip = [&](int v) {
    return std::pow(ladder[static_cast<std::size_t>(v) + 1], 1.0 / smoothness);
  };
  auto working_strip = [&](int v) { return std::min(raw_strip(v), 0.5); };

  double prev_raw = 2.0;  // sentinel above any admissible strip
  for (int v = 0; v < max_steps; ++v) {
    StepParams p;
    p.index = v;
    p.eps = ladder[static_cast<std::size_t>(v)];
    p.eps_next = ladder[static_cast<std::size_t>(v) + 1];
    p.strip_raw = raw_strip(v);
    p.strip = working_strip(v);
    p.clamped = p.strip_raw > 0.5;
    p.strip_next = working_strip(v + 1);

    // The unclamped strips must shrink strictly; if they do not, the ladder
    // arithmetic itself has broken down.
    if (!(p.strip_raw < prev_raw)) throw ScheduleError("schedule: strips failed to decrease");
    prev_raw = p.strip_raw;

    double growth = std::pow(4.0 / 3.0, v);
    p.cutoff = static_cast<int>(std::ceil(10.0 * growth * abs_log_eps / p.strip));
    p.gamma = gamma / std::pow(2.0, v);

    p.decay_lhs = std::exp(-static_cast<double>(p.cutoff) * (p.strip - p.strip_next));
    p.decay_rhs = std::pow(p.eps, 1.5);
    p.decay_certified = p.decay_lhs <= p.decay_rhs;
    if (strict && !p.decay_certified) {
      std::ostringstream os;
      os << "schedule: exponential gain fails at step " << v << " (lhs " << p.decay_lhs << " rhs "
         << p.decay_rhs << ")";
      throw ScheduleError(os.str());
    }
    sched.steps.push_back(p);
  }
  return sched;
}

}  // namespace kamred
