#include "kamred/engine.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <utility>

#include "kamred/errors.hpp"
#include "kamred/smoothing.hpp"

namespace kamred {

namespace {

using Cd = std::complex<double>;
using FM = FourierMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr int kKeepAll = 1 << 20;

Cd ipow(int j) {
  switch (j & 3) {
    case 0: return Cd(1, 0);
    case 1: return Cd(0, 1);
    case 2: return Cd(-1, 0);
    default: return Cd(0, -1);
  }
}

double factorial(int j) {
  double f = 1.0;
  for (int t = 2; t <= j; ++t) f *= t;
  return f;
}

FM diagonal_series(const DiagonalPart<double>& dp, int nfreq) {
  FM s = fm_zero<double>(dp.lambda.size(), nfreq);
  auto& c = s.at_or_insert(zero_mode(nfreq));
  c.val = dp.lambda.cast<Cd>().asDiagonal();
  c.der = dp.lambda_der.cast<Cd>().asDiagonal();
  return s;
}

struct AdSeriesResult {
  int terms = 0;
  double receipts = 0;
};

// target += sum_{j >= j_begin} coeff(j) ad_F^j(seed), stopping once a term's
// certified norm falls below tol_abs.  Receipts cover product mass folded
// beyond the mode budget, charged at the weight of the term it feeds.
AdSeriesResult ad_series_accumulate(FM& target, const FM& f, FM seed, int j_begin,
                                    const std::function<Cd(int)>& coeff, int keep,
                                    const NormSpec<double>& ns, double tol_abs, int cap,
                                    const char* label) {
  AdSeriesResult out;
  if (seed.coeffs.empty()) return out;
  FM cur = std::move(seed);
  for (int j = 0;; ++j) {
    if (j >= j_begin) {
      Cd c = coeff(j);
      add_scaled(target, c, cur);
      double tn =
          std::abs(c) * weighted_norm(cur, ns.weight, std::min(ns.strip, cur.strip));
      out.terms = j;
      if (tn < tol_abs) break;
    }
    if (j + 1 > cap) {
      std::ostringstream os;
      os << label << ": ad-series still above tolerance after " << cap << " terms";
      throw NoConvergence(os.str());
    }
    auto br = commutator(f, cur, keep, ns);
    cur = std::move(br.series);
    out.receipts += (br.folded + br.folded_der) * std::abs(coeff(j + 1));
  }
  return out;
}

}  // namespace

FM conjugate_full(const FM& a, const StepTransform<double>& tr, const Vec& omega,
                  const Vec& omega0, int keep, const NormSpec<double>& ns, double* receipt) {
  auto ga = fourier_multiply(tr.g_adj, a, keep, ns);
  auto gag = fourier_multiply(ga.series, tr.g, keep, ns);
  FM dg = omega_dtheta(tr.g, omega, omega0);
  auto gdg = fourier_multiply(tr.g_adj, dg, keep, ns);
  FM out = std::move(gag.series);
  add_scaled(out, Cd(0, -1), gdg.series);
  if (receipt)
    *receipt += ga.folded + ga.folded_der + gag.folded + gag.folded_der + gdg.folded +
                gdg.folded_der;
  return out;
}

ReductionResult reduce(const EngineConfig& cfg, const Potential& w, double tau) {
  if (cfg.dim < 2) throw ConfigError("reduce: need at least two Dirichlet modes");
  if (cfg.nfreq < 1) throw ConfigError("reduce: need at least one angular frequency");
  if (cfg.omega0.size() != cfg.nfreq)
    throw ConfigError("reduce: base frequency size does not match nfreq");
  if (w.nfreq != cfg.nfreq)
    throw ConfigError("reduce: potential frequency count does not match config");
  if (cfg.mass.size() != 0 && cfg.mass.size() != cfg.dim)
    throw ConfigError("reduce: diagonal shift size does not match dim");
  if (!(tau > 0)) throw ConfigError("reduce: ray parameter must be positive");
  if (w.reality_defect() > 1e-12) throw ConfigError("reduce: potential profiles must be real");

  // The unperturbed operator is already a constant multiplier: nothing to do.
  if (cfg.eps == 0.0) {
    ReductionResult res;
    res.schedule.eps0 = 0.0;
    res.schedule.smoothness = cfg.smoothness;
    res.tau = tau;
    res.steps_done = 0;
    res.converged = true;
    res.lambda_initial.resize(cfg.dim);
    for (int i = 0; i < cfg.dim; ++i) {
      res.lambda_initial(i) = static_cast<double>((i + 1) * (i + 1));
      if (cfg.mass.size()) res.lambda_initial(i) += cfg.mass(i);
    }
    res.diag.lambda = res.lambda_initial;
    res.diag.lambda_der = Vec::Zero(cfg.dim);
    res.xi = Vec::Zero(cfg.dim);
    res.composed = fm_identity<double>(cfg.dim, cfg.nfreq);
    res.composed_adj = fm_identity<double>(cfg.dim, cfg.nfreq);
    return res;
  }

  Schedule sched =
      make_schedule(cfg.eps, cfg.smoothness, cfg.gamma, cfg.max_steps, cfg.strict_schedule);
  const int L = cfg.max_steps;
  const int W = cfg.norm_weight;

  ReductionResult res;
  res.schedule = sched;
  res.tau = tau;

  res.lambda_initial.resize(cfg.dim);
  for (int i = 0; i < cfg.dim; ++i) {
    res.lambda_initial(i) = static_cast<double>((i + 1) * (i + 1));
    if (cfg.mass.size()) res.lambda_initial(i) += cfg.mass(i);
  }
  res.diag.lambda = res.lambda_initial;
  res.diag.lambda_der = Vec::Zero(cfg.dim);

  const Vec omega = tau * cfg.omega0;

  // Ladder initialization: annular split of the potential matrix along the
  // harmonic cutoffs, each piece renormalized to its own rung of the ladder.
  FM rfull = assemble_matrix(w, cfg.dim);
  if (hermiticity_defect(rfull) > 1e-12)
    throw ConfigError("reduce: assembled potential matrix is not Hermitian");

  auto eps_of = [&](int l) {
    return l < L ? sched.steps[static_cast<std::size_t>(l)].eps : sched.steps.back().eps_next;
  };

  std::vector<double> radii;
  for (const auto& p : sched.steps) radii.push_back(static_cast<double>(p.cutoff));
  std::vector<FM> pieces = smoothing_split(rfull, radii);  // levels 0 .. L
  for (int l = 0; l <= L; ++l)
    pieces[static_cast<std::size_t>(l)] =
        scaled(pieces[static_cast<std::size_t>(l)], Cd(cfg.eps / eps_of(l), 0));

  double s0 = sched.steps[0].strip;
  double c_prev = 0;
  for (int l = 0; l <= L; ++l)
    c_prev = std::max(c_prev, weighted_norm(pieces[static_cast<std::size_t>(l)], W, s0));
  res.c_initial = c_prev;

  res.composed = fm_identity<double>(cfg.dim, cfg.nfreq);

  for (int m = 0; m < L; ++m) {
    const StepParams& p = sched.steps[static_cast<std::size_t>(m)];
    NormSpec<double> ns_out{W, p.strip_next};
    const int keep = p.cutoff;
    const double tol_lie = p.eps_next * p.eps_next * 1e-2;  // absolute series tolerance
    const double tol_norm = tol_lie / p.eps_next;           // on the next rung's scale

    StepRecord rec;
    rec.index = m;
    rec.eps = p.eps;
    rec.strip = p.strip;
    rec.cutoff = p.cutoff;
    rec.gamma = p.gamma;
    rec.decay_certified = p.decay_certified;

    // snapshot for the cross check
    DiagonalPart<double> diag_before = res.diag;
    std::vector<FM> pieces_before;
    if (cfg.cross_check) pieces_before = pieces;
    rec.lambda_val = res.diag.lambda;
    rec.lambda_der = res.diag.lambda_der;

    auto [low, high] = truncation(pieces[static_cast<std::size_t>(m)], p.cutoff);

    auto sol = solve_homological(low, res.diag, omega, cfg.omega0, p.gamma, tau, m);
    rec.f_norm = weighted_norm(sol.f, W, p.strip);
    rec.divisor_min = sol.divisor_min;
    rec.denominators = sol.denominators;

    double tol_exp = 1e-14 * (1.0 + p.eps * rec.f_norm);
    auto tr = exp_transform(sol.f, p.eps, keep, ns_out, tol_exp, 50);
    rec.g_dist = tr.dist_identity;
    rec.receipts += tr.folded;
    if (!(tr.dist_identity <= std::sqrt(p.eps))) {
      std::ostringstream os;
      os << "step " << m << ": transform distance " << tr.dist_identity
         << " exceeds the near-identity budget " << std::sqrt(p.eps);
      throw BoundViolation(os.str());
    }

    // absorb the angular mean of the solved piece into the diagonal
    auto [d0, dd0] = zero_mode_diagonal(low);
    rec.lambda_imag_residue =
        std::max(d0.imag().cwiseAbs().maxCoeff(), dd0.imag().cwiseAbs().maxCoeff());
    if (rec.lambda_imag_residue > 1e-8) {
      std::ostringstream os;
      os << "step " << m << ": diagonal correction has imaginary residue "
         << rec.lambda_imag_residue;
      throw BoundViolation(os.str());
    }
    res.diag.lambda += p.eps * d0.real();
    res.diag.lambda_der += p.eps * dd0.real();

    const double em = p.eps;
    const double en = p.eps_next;
    const double scale_next = p.eps / p.eps_next;
    int max_terms = 0;

    // new level-(m+1) mass, normalized by eps_{m+1}
    FM fresh = fm_zero<double>(cfg.dim, cfg.nfreq);

    // remainder series seeded by the solved piece
    {
      auto r = ad_series_accumulate(
          fresh, sol.f, low, 1,
          [=](int j) { return ipow(j) * std::pow(em, j) / factorial(j) * scale_next; }, keep,
          ns_out, tol_norm, 50, "remainder series");
      rec.receipts += p.eps_next * r.receipts;
      max_terms = std::max(max_terms, r.terms);
    }
    // series seeded by the transport defect Y = i [F, Lambda]
    {
      FM lam = diagonal_series(diag_before, cfg.nfreq);
      auto ybr = commutator(sol.f, lam, keep, ns_out);
      FM y = scaled(ybr.series, Cd(0, 1));
      rec.receipts += ybr.folded + ybr.folded_der;
      auto r = ad_series_accumulate(
          fresh, sol.f, std::move(y), 1,
          [=](int t) { return ipow(t) * std::pow(em, t + 1) / factorial(t + 1) / en; }, keep,
          ns_out, tol_norm, 50, "frequency series");
      rec.receipts += p.eps_next * r.receipts;
      max_terms = std::max(max_terms, r.terms);
    }
    // series seeded by the angular transport of F
    {
      FM df = omega_dtheta(sol.f, omega, cfg.omega0);
      auto r = ad_series_accumulate(
          fresh, sol.f, std::move(df), 1,
          [=](int j) { return -em * ipow(j) * std::pow(em, j) / (factorial(j) * (j + 1)) / en; },
          keep, ns_out, tol_norm, 50, "transport series");
      rec.receipts += p.eps_next * r.receipts;
      max_terms = std::max(max_terms, r.terms);
    }
    // truncation tail, conjugated whole
    {
      auto r = ad_series_accumulate(
          fresh, sol.f, std::move(high), 0,
          [=](int j) { return ipow(j) * std::pow(em, j) / factorial(j) * scale_next; }, keep,
          ns_out, tol_norm, 50, "tail conjugation");
      rec.receipts += p.eps_next * r.receipts;
      max_terms = std::max(max_terms, r.terms);
    }
    // higher rungs ride along under the same conjugation
    for (int l = m + 1; l <= L; ++l) {
      FM conj = fm_zero<double>(cfg.dim, cfg.nfreq);
      double el = eps_of(l);
      auto r = ad_series_accumulate(
          conj, sol.f, std::move(pieces[static_cast<std::size_t>(l)]), 0,
          [=](int j) { return ipow(j) * std::pow(em, j) / factorial(j); }, keep, ns_out,
          tol_lie / el, 50, "ladder conjugation");
      rec.receipts += el * r.receipts;
      max_terms = std::max(max_terms, r.terms);
      pieces[static_cast<std::size_t>(l)] = std::move(conj);
    }
    rec.lie_terms = max_terms;

    add_scaled(pieces[static_cast<std::size_t>(m) + 1], Cd(1, 0), fresh);
    pieces[static_cast<std::size_t>(m)].coeffs.clear();

    // keep supports lean; everything surrendered lands in the receipts
    for (int l = m + 1; l <= L; ++l) {
      double el = eps_of(l);
      double dropped =
          compress(pieces[static_cast<std::size_t>(l)], 0.1 * tol_lie / el, ns_out);
      rec.receipts += el * dropped;
    }

    rec.piece_norm_new = weighted_norm(pieces[static_cast<std::size_t>(m) + 1], W, p.strip_next);
    double c_meas = 0;
    double residual = 0;
    for (int l = m + 1; l <= L; ++l) {
      double nl = weighted_norm(pieces[static_cast<std::size_t>(l)], W, p.strip_next);
      c_meas = std::max(c_meas, nl);
      residual += eps_of(l) * nl;
    }
    rec.c_meas = c_meas;
    rec.growth = c_prev > 0 ? c_meas / c_prev : 0.0;
    rec.residual = residual;
    if (c_prev > 0 && c_meas > cfg.slack_factor * std::pow(2.0, cfg.c2_cap) * c_prev) {
      std::ostringstream os;
      os << "step " << m << ": remainder growth " << rec.growth
         << " exceeds the allowed geometric envelope";
      throw BoundViolation(os.str());
    }
    c_prev = std::max(c_meas, 1e-300);

    // extend the composed change of frame
    {
      auto comp = fourier_multiply(res.composed, tr.g, kKeepAll, ns_out);
      res.composed = std::move(comp.series);
      rec.receipts += comp.folded;
    }

    if (cfg.cross_check) {
      FM before = diagonal_series(diag_before, cfg.nfreq);
      for (int l = m; l <= L; ++l)
        add_scaled(before, Cd(eps_of(l), 0), pieces_before[static_cast<std::size_t>(l)]);
      double direct_receipt = 0;
      FM direct = conjugate_full(before, tr, omega, cfg.omega0, kKeepAll, ns_out, &direct_receipt);

      FM after = diagonal_series(res.diag, cfg.nfreq);
      for (int l = m + 1; l <= L; ++l)
        add_scaled(after, Cd(eps_of(l), 0), pieces[static_cast<std::size_t>(l)]);

      add_scaled(direct, Cd(-1, 0), after);
      rec.cross_defect = weighted_norm(direct, W, p.strip_next);
      double tol_cross =
          cfg.slack_factor * (5.0 * tol_lie + rec.receipts + direct_receipt) + 1e-11;
      if (rec.cross_defect > tol_cross) {
        std::ostringstream os;
        os << "step " << m << ": independent conjugation disagrees by " << rec.cross_defect
           << " (allowed " << tol_cross << ")";
        throw BoundViolation(os.str());
      }
    }

    res.receipts_total += rec.receipts;
    res.transforms.push_back(std::move(tr));
    res.steps.push_back(rec);
    res.steps_done = m + 1;
    res.final_residual = rec.residual;

    if (cfg.target_residual > 0 && rec.residual <= cfg.target_residual) {
      res.converged = true;
      break;
    }
  }

  // a run converged when it met its residual target or walked the whole
  // schedule without a violation
  if (cfg.target_residual > 0 && res.final_residual <= cfg.target_residual)
    res.converged = true;
  if (res.steps_done == L) res.converged = true;

  res.composed_adj = adjoint_series(res.composed);
  res.xi = res.diag.lambda - res.lambda_initial;
  res.xi_error = res.final_residual + res.receipts_total;
  for (int l = res.steps_done; l <= L; ++l)
    res.pieces.push_back(std::move(pieces[static_cast<std::size_t>(l)]));

  // growth-law fit C(m) ~ c1 2^(c2 m) over the measured step constants
  {
    std::vector<double> xs, ys;
    if (res.c_initial > 0) {
      xs.push_back(0);
      ys.push_back(std::log2(res.c_initial));
    }
    for (const auto& s : res.steps)
      if (s.c_meas > 0) {
        xs.push_back(static_cast<double>(s.index) + 1);
        ys.push_back(std::log2(s.c_meas));
      }
    if (xs.size() >= 2) {
      double n = static_cast<double>(xs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      res.c2_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      res.c1_fit = std::pow(2.0, (sy - res.c2_fit * sx) / n);
    } else if (xs.size() == 1) {
      res.c1_fit = std::pow(2.0, ys[0]);
      res.c2_fit = 0;
    }
  }

  return res;
}

}  // namespace kamred
