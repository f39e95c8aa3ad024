#ifndef KAMRED_VERIFIER_HPP
#define KAMRED_VERIFIER_HPP

// Dynamical cross-examination of a finished reduction.  Everything here
// consumes only the potential, the run configuration, and the published
// ReductionResult, never the engine's intermediate state, so agreement is a
// genuine end-to-end statement: the original truncated system is integrated
// in time, the reduced diagonal flow is written in closed form, and the two
// are compared through the composed transform.
//
// The original flow  i u' = A(omega t) u  with  A(theta) = Lambda + eps
// R(theta)  is Hermitian, so the stepper must conserve the plain norm
// structurally rather than by renormalising.  The scheme used is the
// exponential midpoint rule
//
//     u_{n+1} = exp(-i h A(omega (t_n + h/2))) u_n,
//
// each factor unitary by construction (spectral decomposition of a Hermitian
// matrix), with step-doubling error control that always accepts the
// two-half-step state.  Richardson extrapolation is deliberately not used:
// the extrapolated combination of two unitaries is not unitary, and norm
// conservation is the very property under test.
//
// Growth diagnostics use a weighted Sobolev norm with the same modest weight
// exponent as the certification norms: instability of the reduced picture
// shows up as transfer toward high modes, which the plain norm cannot see.

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

#include "kamred/engine.hpp"
#include "kamred/potential.hpp"

namespace kamred {

struct TrajectoryOptions {
  double t_final = 1e3;
  int sample_count = 10000;      // uniform sample grid on [0, t_final], t = 0 included
  double tol = 1e-8;             // error-per-unit-time budget for the stepper
  double contamination = 0.0;    // adds i*c*Id to the generator; folded in exactly
  int norm_weight = 2;           // weight exponent of the reported Sobolev norms
};

struct Trajectory {
  Eigen::VectorXd times;
  std::vector<Eigen::VectorXcd> states;
  Eigen::VectorXd norms;    // weighted Sobolev norm per sample
  double norm_drift = 0;    // worst | ||u(t)|| - ||u(0)|| | of the unitary part
  long accepted = 0;
  long rejected = 0;
};

// The generator A(t) = Lambda + eps R(omega t) on the retained modes, with
// omega = tau * omega0.  An imaginary multiple of the identity commutes with
// everything, so contamination never enters here; callers scale by exp(c t)
// afterwards, which is the exact solution of the contaminated system.
class FlowGenerator {
 public:
  FlowGenerator(const EngineConfig& cfg, const Potential& w, double tau);

  Eigen::MatrixXcd hermitian_at(double t) const;
  Eigen::Index dim() const { return lambda_.size(); }
  // shortest angular period present, infinity when the potential is static
  double fastest_period() const;

 private:
  Eigen::VectorXd lambda_;
  std::vector<std::pair<double, Eigen::MatrixXcd>> waves_;  // (<k, omega>, eps * Rhat(k))
};

double weighted_state_norm(const Eigen::VectorXcd& u, int weight);

// Adaptive propagation of u from t0 to t1 (either direction).  Throws
// NoConvergence on step-size underflow.
Eigen::VectorXcd evolve(const FlowGenerator& gen, Eigen::VectorXcd u, double t0, double t1,
                        double tol, long* accepted = nullptr, long* rejected = nullptr);

Trajectory integrate_original(const EngineConfig& cfg, const Potential& w, double tau,
                              const Eigen::VectorXcd& u0, const TrajectoryOptions& opt);

// Closed-form reduced flow v_k(t) = v_k(0) exp(-i (k^2 + mass_k + xi_k) t).
// Exact: no integration error, norms constant by inspection.  Pass an empty
// mass or xi for zeros.
Trajectory integrate_reduced(const Eigen::VectorXd& xi, const Eigen::VectorXd& mass,
                             const Eigen::VectorXcd& v0, const TrajectoryOptions& opt);

// Slope of the best linear fit to log ||u(t)|| over the second half of the
// window; zero for any norm-preserving flow, the growth rate c for an exact
// exp(c t) envelope.
double lyapunov_estimate(const Trajectory& traj);

struct GrowthSummary {
  double max_norm = 0;
  double min_norm = 0;
  double final_norm = 0;
  double ratio = 0;      // max / min
  double exponent = 0;   // fitted slope of log norm against log (1 + t)
};

GrowthSummary sobolev_growth_report(const Trajectory& traj);

// Integrates the original system, runs the reduced flow from the pulled-back
// initial state v(0) = G_adj(0) u(0), and compares u(t) against G(omega t)
// v(t) in the weighted norm, relative to ||u(0)||.
struct ConjugacyReport {
  double residual = 0;        // max over the sample grid
  double residual_final = 0;  // at t_final
  Trajectory original;
  Trajectory reduced;
};

ConjugacyReport conjugate_compare(const ReductionResult& red, const EngineConfig& cfg,
                                  const Potential& w, double tau, const Eigen::VectorXcd& u0,
                                  const TrajectoryOptions& opt);

double conjugacy_residual(const ReductionResult& red, const EngineConfig& cfg, const Potential& w,
                          double tau, const Eigen::VectorXcd& u0, const TrajectoryOptions& opt);

}  // namespace kamred

#endif
