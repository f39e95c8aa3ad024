#include "kamred/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kamred/errors.hpp"

namespace kamred {

namespace {

using Complex = std::complex<double>;

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

// one exponential-midpoint step over [t, t+h]; unitary for any h
Eigen::VectorXcd flow_step(const FlowGenerator& gen, const Eigen::VectorXcd& u, double t,
                           double h) {
  Eigen::MatrixXcd a = gen.hermitian_at(t + 0.5 * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  Eigen::VectorXcd w = es.eigenvectors().adjoint() * u;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w(i) *= std::exp(Complex(0, -h * es.eigenvalues()(i)));
  return es.eigenvectors() * w;
}

}  // namespace

FlowGenerator::FlowGenerator(const EngineConfig& cfg, const Potential& w, double tau) {
  lambda_ = Eigen::VectorXd::Zero(cfg.dim);
  for (Eigen::Index i = 0; i < cfg.dim; ++i) {
    double base = static_cast<double>((i + 1) * (i + 1));
    if (cfg.mass.size() > i) base += cfg.mass(i);
    lambda_(i) = base;
  }
  if (cfg.eps == 0.0) return;
  Eigen::VectorXd omega = tau * cfg.omega0;
  FourierMatrix<double> r = assemble_matrix(w, cfg.dim);
  for (const auto& [k, c] : r.coeffs)
    waves_.emplace_back(dot(k, omega), (cfg.eps * c.val).eval());
}

Eigen::MatrixXcd FlowGenerator::hermitian_at(double t) const {
  Eigen::MatrixXcd a = lambda_.cast<Complex>().asDiagonal();
  for (const auto& [kw, m] : waves_) a += std::exp(Complex(0, kw * t)) * m;
  return a;
}

double FlowGenerator::fastest_period() const {
  double top = 0;
  for (const auto& [kw, m] : waves_) top = std::max(top, std::abs(kw));
  return top > 0 ? 2.0 * M_PI / top : std::numeric_limits<double>::infinity();
}

double weighted_state_norm(const Eigen::VectorXcd& u, int weight) {
  double s = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double d = std::pow(static_cast<double>(i + 1), weight);
    s += d * d * std::norm(u(i));
  }
  return std::sqrt(s);
}

Eigen::VectorXcd evolve(const FlowGenerator& gen, Eigen::VectorXcd u, double t0, double t1,
                        double tol, long* accepted, long* rejected) {
  const double span = t1 - t0;
  if (span == 0.0) return u;
  const double dir = span > 0 ? 1.0 : -1.0;

  // keep several evaluations inside the fastest angular period, so the error
  // estimator can never alias an oscillation away
  const double cap = std::min(std::abs(span), 0.2 * gen.fastest_period());
  const double floor_h = std::max(std::abs(span) * 1e-14, 1e-13);

  double t = t0;
  double h_sugg = std::min(cap, 1e-2 * std::abs(span));
  h_sugg = std::max(h_sugg, floor_h);

  while (dir * (t1 - t) > std::abs(span) * 1e-15) {
    const bool clamped = std::abs(t1 - t) <= h_sugg;
    const double hs = clamped ? std::abs(t1 - t) : h_sugg;
    const double h = dir * hs;

    Eigen::VectorXcd full = flow_step(gen, u, t, h);
    Eigen::VectorXcd half = flow_step(gen, flow_step(gen, u, t, 0.5 * h), t + 0.5 * h, 0.5 * h);
    const double err = (full - half).norm();
    // the absolute term keeps sliver steps at endpoints from demanding less
    // than rounding noise
    const double budget = tol * hs + 1e-14 * u.norm();

    if (err <= budget) {
      t = clamped ? t1 : t + h;
      u = std::move(half);
      if (accepted) ++*accepted;
      // grow only the genuine suggestion, not an endpoint-clamped remnant
      if (!clamped) {
        double f = err > 0 ? std::min(5.0, 0.9 * std::sqrt(budget / err)) : 5.0;
        h_sugg = std::min(cap, hs * std::max(f, 1.0));
      }
    } else {
      if (rejected) ++*rejected;
      double f = std::max(0.2, 0.9 * std::sqrt(budget / err));
      h_sugg = hs * f;
      if (h_sugg < floor_h) {
        std::ostringstream os;
        os << "evolve: step size underflow at t = " << t;
        throw NoConvergence(os.str());
      }
    }
  }
  return u;
}

Trajectory integrate_original(const EngineConfig& cfg, const Potential& w, double tau,
                              const Eigen::VectorXcd& u0, const TrajectoryOptions& opt) {
  FlowGenerator gen(cfg, w, tau);
  const int n = std::max(2, opt.sample_count);

  Trajectory traj;
  traj.times.resize(n);
  traj.states.reserve(static_cast<std::size_t>(n));
  traj.norms.resize(n);

  const double base_norm = u0.norm();
  Eigen::VectorXcd u = u0;
  for (int i = 0; i < n; ++i) {
    const double ti = opt.t_final * static_cast<double>(i) / static_cast<double>(n - 1);
    if (i > 0) {
      const double prev = opt.t_final * static_cast<double>(i - 1) / static_cast<double>(n - 1);
      u = evolve(gen, std::move(u), prev, ti, opt.tol, &traj.accepted, &traj.rejected);
    }
    traj.norm_drift = std::max(traj.norm_drift, std::abs(u.norm() - base_norm));
    traj.times(i) = ti;
    // contamination commutes with the whole generator, so the exact factor
    // exp(c t) is applied to the unitary solution rather than integrated
    Eigen::VectorXcd state = opt.contamination != 0.0
                                 ? (std::exp(opt.contamination * ti) * u).eval()
                                 : u;
    traj.norms(i) = weighted_state_norm(state, opt.norm_weight);
    traj.states.push_back(std::move(state));
  }
  return traj;
}

Trajectory integrate_reduced(const Eigen::VectorXd& xi, const Eigen::VectorXd& mass,
                             const Eigen::VectorXcd& v0, const TrajectoryOptions& opt) {
  const Eigen::Index dim = v0.size();
  Eigen::VectorXd phase(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    phase(k) = static_cast<double>((k + 1) * (k + 1));
    if (mass.size() > k) phase(k) += mass(k);
    if (xi.size() > k) phase(k) += xi(k);
  }

  const int n = std::max(2, opt.sample_count);
  Trajectory traj;
  traj.times.resize(n);
  traj.states.reserve(static_cast<std::size_t>(n));
  traj.norms.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ti = opt.t_final * static_cast<double>(i) / static_cast<double>(n - 1);
    Eigen::VectorXcd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = v0(k) * std::exp(Complex(0, -phase(k) * ti));
    traj.times(i) = ti;
    traj.norms(i) = weighted_state_norm(v, opt.norm_weight);
    traj.states.push_back(std::move(v));
  }
  return traj;
}

double lyapunov_estimate(const Trajectory& traj) {
  const Eigen::Index n = traj.times.size();
  std::vector<double> xs, ys;
  for (Eigen::Index i = n / 2; i < n; ++i) {
    if (traj.norms(i) <= 0) continue;
    xs.push_back(traj.times(i));
    ys.push_back(std::log(traj.norms(i)));
  }
  return fit_slope(xs, ys);
}

GrowthSummary sobolev_growth_report(const Trajectory& traj) {
  GrowthSummary g;
  if (traj.norms.size() == 0) return g;
  g.max_norm = traj.norms.maxCoeff();
  g.min_norm = traj.norms.minCoeff();
  g.final_norm = traj.norms(traj.norms.size() - 1);
  g.ratio = g.min_norm > 0 ? g.max_norm / g.min_norm : std::numeric_limits<double>::infinity();

  const Eigen::Index n = traj.times.size();
  std::vector<double> xs, ys;
  for (Eigen::Index i = n / 2; i < n; ++i) {
    if (traj.norms(i) <= 0) continue;
    xs.push_back(std::log1p(traj.times(i)));
    ys.push_back(std::log(traj.norms(i)));
  }
  g.exponent = fit_slope(xs, ys);
  return g;
}

ConjugacyReport conjugate_compare(const ReductionResult& red, const EngineConfig& cfg,
                                  const Potential& w, double tau, const Eigen::VectorXcd& u0,
                                  const TrajectoryOptions& opt) {
  ConjugacyReport rep;
  rep.original = integrate_original(cfg, w, tau, u0, opt);

  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(cfg.nfreq);
  Eigen::VectorXcd v0 = fm_at(red.composed_adj, theta0) * u0;
  rep.reduced = integrate_reduced(red.xi, cfg.mass, v0, opt);

  // flatten the composed transform once; it is evaluated at every sample
  Eigen::VectorXd omega = tau * cfg.omega0;
  std::vector<std::pair<double, Eigen::MatrixXcd>> waves;
  waves.reserve(red.composed.coeffs.size());
  for (const auto& [k, c] : red.composed.coeffs) waves.emplace_back(dot(k, omega), c.val);

  const double base = weighted_state_norm(u0, opt.norm_weight);
  const double scale = base > 0 ? base : 1.0;
  const Eigen::Index n = rep.original.times.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = rep.original.times(i);
    Eigen::VectorXcd pulled = Eigen::VectorXcd::Zero(u0.size());
    for (const auto& [kw, m] : waves)
      pulled += std::exp(Complex(0, kw * t)) * (m * rep.reduced.states[static_cast<std::size_t>(i)]);
    const double r = weighted_state_norm(rep.original.states[static_cast<std::size_t>(i)] - pulled,
                                         opt.norm_weight) /
                     scale;
    rep.residual = std::max(rep.residual, r);
    if (i == n - 1) rep.residual_final = r;
  }
  return rep;
}

double conjugacy_residual(const ReductionResult& red, const EngineConfig& cfg, const Potential& w,
                          double tau, const Eigen::VectorXcd& u0, const TrajectoryOptions& opt) {
  return conjugate_compare(red, cfg, w, tau, u0, opt).residual;
}

}  // namespace kamred
