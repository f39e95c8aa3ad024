#ifndef KAMRED_ERRORS_HPP
#define KAMRED_ERRORS_HPP

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamred {

// A small divisor crossed its exclusion threshold at the working parameter.
// Carries the witness so the caller can report exactly which harmonic and
// which mode pair pinched.
class ResonanceViolation : public std::runtime_error {
 public:
  ResonanceViolation(std::vector<std::int32_t> k_, int i_, int j_, double divisor_, double tau_,
                     int step_)
      : std::runtime_error(format(k_, i_, j_, divisor_, tau_, step_)),
        k(std::move(k_)),
        i(i_),
        j(j_),
        divisor(divisor_),
        tau(tau_),
        step(step_) {}

  std::vector<std::int32_t> k;
  int i;
  int j;
  double divisor;
  double tau;
  int step;

 private:
  static std::string format(const std::vector<std::int32_t>& k, int i, int j, double d, double tau,
                            int step) {
    std::ostringstream os;
    os << "resonance at step " << step << ": k=(";
    for (std::size_t t = 0; t < k.size(); ++t) os << (t ? "," : "") << k[t];
    os << ") modes (" << i << "," << j << ") divisor " << d << " tau " << tau;
    return os.str();
  }
};

// A certified bound the iteration relies on failed by more than the allowed
// slack: transform too far from identity, remainder growth constant off the
// geometric track, or tail mass beyond budget.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internally summed series (exponential, conjugation expansion) failed to
// reach its tolerance within the term cap.
class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Excision removed every candidate parameter from the working interval.
class EmptyRetainedSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed config or potential file, inconsistent dimensions,
// unreadable state file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The strict schedule contract was violated (only thrown when the run asks
// for strict mode; otherwise recorded per step as a diagnostic).
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kamred

#endif
