#ifndef KAMRED_MEASURE_HPP
#define KAMRED_MEASURE_HPP

// Retained parameter sets.
//
// The reduction is only valid on rays tau where every divisor
//
//     d(tau) = -<k, omega0> tau + lambda_i(tau) - lambda_j(tau)
//
// stays away from zero.  This module carves the forbidden neighbourhoods out
// of the window [1,2], one schedule step at a time: step m removes, for every
// harmonic |k|_1 <= K_m and every relevant mode pair, the sublevel set where
// |d| drops below (|i-j|+1) gamma_m / |k|_1^{n+3}.
//
// The diagonal enters through an affine model around a reference ray,
// lambda(tau) = value + slope (tau - tau_ref), built from the (value,
// d/dtau) pairs the reduction carries.  The model has no curvature by
// construction, so root bracketing on it is exact; a subdivision fallback
// covers the degenerate case where the certified divisor slope loses its
// sign.  The grid-scan oracle in the tests referees the same model point by
// point.
//
// Pairs with max(i,j) far above |k|_1 are skipped: the eigenvalue gap
// |i^2 - j^2| then dominates any <k, omega> on the window and the sublevel
// set is provably empty.  The skip boundary is validated by evaluating the
// band just outside it.  Diagonal pairs (i = j, k != 0) reduce to
// |<k, omega0>| tau, which never vanishes on [1,2] for nonzero k; they are
// verified, not excised.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "kamred/fourier.hpp"
#include "kamred/schedule.hpp"

namespace kamred {

struct Interval {
  double lo = 0;
  double hi = 0;
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

// Finite union of disjoint closed intervals, kept sorted.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(double lo, double hi);

  double measure() const;
  bool empty() const { return parts_.empty(); }
  bool contains(double tau) const;
  const std::vector<Interval>& parts() const { return parts_; }

  // Set subtraction of one interval.  Returns the measure actually removed.
  double remove(double lo, double hi);

  // Points at the (q + 1/2)/count quantiles of the retained measure:
  // deterministic, uniformly spread over the set, never on a boundary
  // of a removed interval.
  std::vector<double> quantile_points(std::size_t count) const;

 private:
  std::vector<Interval> parts_;
};

// Affine model of the running diagonal around a reference ray.
struct DiagonalModel {
  Eigen::VectorXd lambda;      // values at tau_ref
  Eigen::VectorXd lambda_der;  // d lambda / d tau at tau_ref
  double tau_ref = 1.5;
};

// Divisor as an affine function of tau: value(tau) = offset + slope * tau.
// The slope doubles as the certified derivative bound of the model.
struct DivisorFunction {
  double offset = 0;
  double slope = 0;
  double value_at(double tau) const { return offset + slope * tau; }
};

// i and j are 1-based mode labels.
DivisorFunction divisor_function(const ModeIndex& k, int i, int j, const DiagonalModel& model,
                                 const Eigen::VectorXd& omega0);

struct ExcisionWitness {
  int step = 0;
  ModeIndex k;
  int i = 0;  // 1-based mode labels
  int j = 0;
  double lo = 0;
  double hi = 0;
  double threshold = 0;
};

struct StepExcision {
  int step = 0;
  double gamma = 0;
  long cutoff = 0;
  double removed = 0;            // measure lost this step
  double measure_after = 0;
  std::size_t candidates = 0;    // (k,i,j) triples inspected
  std::size_t removals = 0;      // intervals subtracted
  std::size_t skipped_pairs = 0; // gap-dominated pairs not inspected
  std::size_t verified_diagonal = 0;
  std::size_t boundary_checked = 0;
};

struct ExcisionOptions {
  double tau_min = 1.0;
  double tau_max = 2.0;
  double measure_floor = 1e-3;     // below this the run cannot continue
  std::size_t max_witnesses = 256;
  std::optional<double> probe_tau; // remember the first removal covering this ray
};

struct MeasureResult {
  ParamSet retained;
  double initial_measure = 0;
  std::vector<StepExcision> per_step;
  std::vector<ExcisionWitness> witnesses;
  std::optional<ExcisionWitness> probe_hit;
  double loss_constant = 0;   // max over steps of removed_m / gamma_m
  double total_constant = 0;  // (initial - final measure) / gamma_0
};

// One step of excision.  Witnesses are appended up to opts.max_witnesses.
ParamSet excise(const ParamSet& pi, const DiagonalModel& model, const Eigen::VectorXd& omega0,
                long cutoff, double gamma_m, int step, const ExcisionOptions& opts,
                StepExcision& stats, std::vector<ExcisionWitness>& witnesses,
                std::optional<ExcisionWitness>& probe_hit);

// Full pipeline across a schedule.  models[m] is the diagonal in force at
// step m; if fewer models than steps are given the last one is reused (the
// corrections are eps-small, and the oracle tests run both ways).
// Throws EmptyRetainedSet when the running measure drops under the floor.
MeasureResult excise_schedule(const Schedule& sched, const std::vector<DiagonalModel>& models,
                              int dim, const Eigen::VectorXd& omega0, const ExcisionOptions& opts);

}  // namespace kamred

#endif
