#include "kamred/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "kamred/errors.hpp"

namespace kamred {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + tok + "'");
  }
}

long parse_integer(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an integer: '" + tok + "'");
  }
}

bool parse_flag(const std::string& tok, const std::string& where) {
  if (tok == "1" || tok == "true" || tok == "yes" || tok == "on") return true;
  if (tok == "0" || tok == "false" || tok == "no" || tok == "off") return false;
  throw ConfigError(where + ": not a flag: '" + tok + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n",          "j",           "smoothness",   "mass",          "omega0",
      "epsilon",    "gamma",       "max_steps",    "target_residual", "norm_weight",
      "slack_factor", "c2_cap",    "strict_schedule", "cross_check",
      "tau",        "scan_count",  "tau_min",      "tau_max",       "measure_floor",
      "t_final",    "tol",         "sample_count", "contamination", "growth_ratio_max",
      "seed",       "out",         "quiet",        "potential",
      "mode",       "grid",        "grid_rows",    "grid_cols",     "grid_max_x",
      "grid_k_cutoff",
  };
  return keys;
}

}  // namespace

bool Document::has(const std::string& key) const {
  return find_last(key) != nullptr;
}

const std::vector<std::string>* Document::find_last(const std::string& key) const {
  const std::vector<std::string>* hit = nullptr;
  for (const auto& [k, v] : rows)
    if (k == key) hit = &v;
  return hit;
}

std::vector<const std::vector<std::string>*> Document::all(const std::string& key) const {
  std::vector<const std::vector<std::string>*> out;
  for (const auto& [k, v] : rows)
    if (k == key) out.push_back(&v);
  return out;
}

double Document::number(const std::string& key, double fallback) const {
  const auto* v = find_last(key);
  if (!v) return fallback;
  if (v->size() != 1) throw ConfigError("key '" + key + "' wants exactly one value");
  return parse_number((*v)[0], "key '" + key + "'");
}

long Document::integer(const std::string& key, long fallback) const {
  const auto* v = find_last(key);
  if (!v) return fallback;
  if (v->size() != 1) throw ConfigError("key '" + key + "' wants exactly one value");
  return parse_integer((*v)[0], "key '" + key + "'");
}

std::string Document::word(const std::string& key, const std::string& fallback) const {
  const auto* v = find_last(key);
  if (!v) return fallback;
  if (v->size() != 1) throw ConfigError("key '" + key + "' wants exactly one value");
  return (*v)[0];
}

Document parse_document(const std::string& text, const std::string& origin) {
  Document doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream toks(line);
    std::string key;
    toks >> key;
    std::vector<std::string> vals;
    std::string t;
    while (toks >> t) vals.push_back(t);
    if (vals.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key +
                        "' has no value");
    doc.rows.emplace_back(std::move(key), std::move(vals));
  }
  return doc;
}

Document parse_document_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path);
}

Potential potential_from_document(const Document& doc, int nfreq) {
  Potential w;
  w.nfreq = nfreq;

  auto mode_rows = doc.all("mode");
  bool has_grid = doc.has("grid");
  if (!mode_rows.empty() && has_grid)
    throw ConfigError("give either mode rows or a sample grid, not both");

  if (has_grid) {
    if (nfreq != 1) throw ConfigError("grid ingestion is single-frequency only");
    long rows = doc.integer("grid_rows", 0);
    long cols = doc.integer("grid_cols", 0);
    if (rows < 2 || cols < 2) throw ConfigError("grid_rows/grid_cols missing or too small");
    long max_x = doc.integer("grid_max_x", 4);
    long cutoff = doc.integer("grid_k_cutoff", 8);
    std::vector<double> vals;
    for (const auto* row : doc.all("grid"))
      for (const auto& tok : *row) vals.push_back(parse_number(tok, "grid sample"));
    if (static_cast<long>(vals.size()) != rows * cols)
      throw ConfigError("grid wants " + std::to_string(rows * cols) + " samples, got " +
                        std::to_string(vals.size()));
    Eigen::MatrixXd samples(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) samples(r, c) = vals[static_cast<std::size_t>(r * cols + c)];
    return potential_from_grid(samples, static_cast<int>(max_x), static_cast<int>(cutoff));
  }

  for (const auto* row : mode_rows) {
    // mode <j> <k_1 .. k_n> <re> [im]
    const std::size_t nf = static_cast<std::size_t>(nfreq);
    if (row->size() != nf + 2 && row->size() != nf + 3)
      throw ConfigError("mode row wants j, " + std::to_string(nfreq) + " frequency entries, re [im]");
    long jx = parse_integer((*row)[0], "mode row");
    if (jx < 0) throw ConfigError("mode row: negative spatial harmonic");
    ModeIndex k(nf, 0);
    for (std::size_t c = 0; c < nf; ++c)
      k[c] = static_cast<std::int32_t>(parse_integer((*row)[1 + c], "mode row"));
    double re = parse_number((*row)[1 + nf], "mode row");
    double im = row->size() == nf + 3 ? parse_number((*row)[2 + nf], "mode row") : 0.0;

    if (static_cast<long>(w.profiles.size()) <= jx) w.profiles.resize(static_cast<std::size_t>(jx + 1));
    auto& prof = w.profiles[static_cast<std::size_t>(jx)];
    if (prof.count(k)) throw ConfigError("mode row repeated for the same (j, k)");
    prof[k] = std::complex<double>(re, im);
  }

  // reality: fill the mirrored half, check explicit pairs against each other
  for (auto& prof : w.profiles) {
    for (const auto& [k, c] : std::map<ModeIndex, std::complex<double>>(prof)) {
      ModeIndex nk = negated(k);
      auto it = prof.find(nk);
      if (it == prof.end()) {
        prof[nk] = std::conj(c);
      } else if (std::abs(it->second - std::conj(c)) > 1e-12 * (1.0 + std::abs(c))) {
        throw ConfigError("mode table breaks the reality constraint at a +/-k pair");
      }
    }
  }
  if (w.reality_defect() > 1e-12)
    throw ConfigError("mode table breaks the reality constraint");
  return w;
}

namespace {

void validate(const RunConfig& rc) {
  const auto& e = rc.engine;
  if (e.nfreq < 1 || e.nfreq > 8) throw ConfigError("n out of range [1, 8]");
  if (e.dim < 1 || e.dim > 4096) throw ConfigError("j out of range [1, 4096]");
  if (e.smoothness < 2) throw ConfigError("smoothness wants at least 2");
  if (e.eps < 0) throw ConfigError("epsilon must be nonnegative");
  if (e.gamma <= 0) throw ConfigError("gamma must be positive");
  if (e.max_steps < 1) throw ConfigError("max_steps wants at least 1");
  if (e.target_residual < 0) throw ConfigError("target_residual must be nonnegative");
  if (e.norm_weight < 0) throw ConfigError("norm_weight must be nonnegative");
  if (e.slack_factor < 1) throw ConfigError("slack_factor wants at least 1");
  if (e.omega0.size() != e.nfreq) throw ConfigError("omega0 wants n entries");
  if (!rc.tau_scan && (rc.tau < 1.0 || rc.tau > 2.0))
    throw ConfigError("tau out of the parameter window [1, 2]");
  if (rc.scan_count < 1) throw ConfigError("scan_count wants at least 1");
  if (!(rc.tau_min >= 1.0 && rc.tau_min < rc.tau_max && rc.tau_max <= 2.0))
    throw ConfigError("tau window wants 1 <= tau_min < tau_max <= 2");
  if (rc.measure_floor <= 0) throw ConfigError("measure_floor must be positive");
  if (rc.t_final <= 0) throw ConfigError("t_final must be positive");
  if (rc.tol <= 0) throw ConfigError("tol must be positive");
  if (rc.sample_count < 2) throw ConfigError("sample_count wants at least 2");
  if (rc.growth_ratio_max < 1) throw ConfigError("growth_ratio_max wants at least 1");
  for (std::size_t jx = 0; jx < rc.potential.profiles.size(); ++jx)
    for (const auto& [k, c] : rc.potential.profiles[jx])
      if (l1_norm(k) == 0 && std::abs(c.imag()) > 1e-12)
        throw ConfigError("static profile component must be real");
}

void apply_scalars(RunConfig& rc, const Document& d) {
  auto& e = rc.engine;
  e.nfreq = static_cast<int>(d.integer("n", e.nfreq));
  e.dim = static_cast<int>(d.integer("j", static_cast<long>(e.dim)));
  e.smoothness = static_cast<int>(d.integer("smoothness", e.smoothness));
  e.eps = d.number("epsilon", e.eps);
  e.gamma = d.number("gamma", e.gamma);
  e.max_steps = static_cast<int>(d.integer("max_steps", e.max_steps));
  e.target_residual = d.number("target_residual", e.target_residual);
  e.norm_weight = static_cast<int>(d.integer("norm_weight", e.norm_weight));
  e.slack_factor = d.number("slack_factor", e.slack_factor);
  e.c2_cap = d.number("c2_cap", e.c2_cap);
  if (d.has("strict_schedule"))
    e.strict_schedule = parse_flag(d.word("strict_schedule", ""), "strict_schedule");
  if (d.has("cross_check")) e.cross_check = parse_flag(d.word("cross_check", ""), "cross_check");

  if (const auto* om = d.find_last("omega0")) {
    Eigen::VectorXd w(om->size());
    for (std::size_t i = 0; i < om->size(); ++i)
      w(static_cast<Eigen::Index>(i)) = parse_number((*om)[i], "omega0");
    e.omega0 = w;
  }

  if (const auto* tv = d.find_last("tau")) {
    if (tv->size() != 1) throw ConfigError("key 'tau' wants exactly one value");
    if ((*tv)[0] == "scan") {
      rc.tau_scan = true;
    } else {
      rc.tau_scan = false;
      rc.tau = parse_number((*tv)[0], "tau");
    }
  }
  rc.scan_count = static_cast<int>(d.integer("scan_count", rc.scan_count));
  rc.tau_min = d.number("tau_min", rc.tau_min);
  rc.tau_max = d.number("tau_max", rc.tau_max);
  rc.measure_floor = d.number("measure_floor", rc.measure_floor);
  rc.t_final = d.number("t_final", rc.t_final);
  rc.tol = d.number("tol", rc.tol);
  rc.sample_count = static_cast<int>(d.integer("sample_count", rc.sample_count));
  rc.contamination = d.number("contamination", rc.contamination);
  rc.growth_ratio_max = d.number("growth_ratio_max", rc.growth_ratio_max);
  rc.seed = static_cast<unsigned long>(d.integer("seed", static_cast<long>(rc.seed)));
  rc.out_dir = d.word("out", rc.out_dir);
  if (d.has("quiet")) rc.quiet = parse_flag(d.word("quiet", ""), "quiet");
}

void check_known(const Document& d, const std::string& origin) {
  for (const auto& [k, v] : d.rows)
    if (!known_keys().count(k)) throw ConfigError(origin + ": unknown key '" + k + "'");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  Document top = parse_document_file(path);
  check_known(top, path);

  RunConfig rc;
  std::vector<const Document*> chain;
  Document referenced;
  if (top.has("potential")) {
    std::string ppath = top.word("potential", "");
    referenced = parse_document_file(ppath);
    check_known(referenced, ppath);
    if (referenced.has("potential")) throw ConfigError(ppath + ": nested potential reference");
    chain.push_back(&referenced);
  }
  chain.push_back(&top);

  for (const auto* d : chain) apply_scalars(rc, *d);
  if (rc.engine.omega0.size() == 0) rc.engine.omega0 = Eigen::VectorXd::Ones(rc.engine.nfreq);

  // the last document carrying its own mode table (or grid) wins outright
  const Document* src = nullptr;
  for (const auto* d : chain)
    if (!d->all("mode").empty() || d->has("grid")) src = d;
  if (src) rc.potential = potential_from_document(*src, rc.engine.nfreq);
  rc.potential.nfreq = rc.engine.nfreq;

  double mass = 0.0;
  for (const auto* d : chain) mass = d->number("mass", mass);
  if (mass != 0.0) rc.engine.mass = Eigen::VectorXd::Constant(rc.engine.dim, mass);

  validate(rc);
  return rc;
}

// ---------------------------------------------------------------------------
// artifacts

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::ordered_json reduction_report(const ReductionResult& red, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["kind"] = "reduction";
  j["tau"] = red.tau;
  j["epsilon"] = cfg.engine.eps;
  j["nfreq"] = cfg.engine.nfreq;
  j["dim"] = cfg.engine.dim;
  j["smoothness"] = cfg.engine.smoothness;
  j["gamma"] = cfg.engine.gamma;
  j["norm_weight"] = cfg.engine.norm_weight;
  j["converged"] = red.converged;
  j["steps_done"] = red.steps_done;

  j["xi"] = std::vector<double>(red.xi.begin(), red.xi.end());
  j["xi_error"] = red.xi_error;
  j["lambda_initial"] = std::vector<double>(red.lambda_initial.begin(), red.lambda_initial.end());
  std::vector<double> lf(red.diag.lambda.begin(), red.diag.lambda.end());
  j["lambda_final"] = lf;

  j["c_initial"] = red.c_initial;
  j["c1_fit"] = red.c1_fit;
  j["c2_fit"] = red.c2_fit;
  j["final_residual"] = red.final_residual;
  j["receipts_total"] = red.receipts_total;

  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : red.steps) {
    nlohmann::ordered_json e;
    e["index"] = s.index;
    e["eps"] = s.eps;
    e["strip"] = s.strip;
    e["cutoff"] = s.cutoff;
    e["gamma"] = s.gamma;
    e["decay_certified"] = s.decay_certified;
    e["f_norm"] = s.f_norm;
    e["g_dist"] = s.g_dist;
    e["divisor_min"] = s.divisor_min;
    e["denominators"] = s.denominators;
    e["lie_terms"] = s.lie_terms;
    e["receipts"] = s.receipts;
    e["piece_norm_new"] = s.piece_norm_new;
    e["growth"] = s.growth;
    e["c_meas"] = s.c_meas;
    e["residual"] = s.residual;
    e["lambda_imag_residue"] = s.lambda_imag_residue;
    e["cross_defect"] = s.cross_defect;
    steps.push_back(std::move(e));
  }
  j["step_log"] = std::move(steps);
  return j;
}

nlohmann::ordered_json measure_report(const MeasureResult& m) {
  nlohmann::ordered_json j;
  j["kind"] = "measure";
  j["initial_measure"] = m.initial_measure;
  j["retained_measure"] = m.retained.measure();
  j["retention"] = m.initial_measure > 0 ? m.retained.measure() / m.initial_measure : 0.0;
  j["loss_constant"] = m.loss_constant;
  j["total_constant"] = m.total_constant;
  j["witness_count"] = m.witnesses.size();

  if (m.probe_hit) {
    nlohmann::ordered_json p;
    p["step"] = m.probe_hit->step;
    p["k"] = m.probe_hit->k;
    p["i"] = m.probe_hit->i;
    p["j"] = m.probe_hit->j;
    p["lo"] = m.probe_hit->lo;
    p["hi"] = m.probe_hit->hi;
    p["threshold"] = m.probe_hit->threshold;
    j["probe_hit"] = std::move(p);
  } else {
    j["probe_hit"] = nullptr;
  }

  nlohmann::ordered_json parts = nlohmann::ordered_json::array();
  for (const auto& iv : m.retained.parts()) parts.push_back({iv.lo, iv.hi});
  j["retained_intervals"] = std::move(parts);

  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : m.per_step) {
    nlohmann::ordered_json e;
    e["step"] = s.step;
    e["gamma"] = s.gamma;
    e["cutoff"] = s.cutoff;
    e["candidates"] = s.candidates;
    e["removals"] = s.removals;
    e["skipped_pairs"] = s.skipped_pairs;
    e["verified_diagonal"] = s.verified_diagonal;
    e["boundary_checked"] = s.boundary_checked;
    e["removed"] = s.removed;
    e["measure_after"] = s.measure_after;
    steps.push_back(std::move(e));
  }
  j["per_step"] = std::move(steps);
  return j;
}

void write_retained_csv(const std::string& path, const ParamSet& set) {
  std::ostringstream out;
  out << "tau_lo,tau_hi\n";
  for (const auto& iv : set.parts()) out << fmt_double(iv.lo) << "," << fmt_double(iv.hi) << "\n";
  write_text_file(path, out.str());
}

ParamSet read_retained_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<Interval> parts;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("tau_lo", 0) == 0) continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path + ": malformed row '" + line + "'");
    Interval iv;
    iv.lo = parse_number(trim(line.substr(0, comma)), path);
    iv.hi = parse_number(trim(line.substr(comma + 1)), path);
    if (!(iv.hi >= iv.lo)) throw ConfigError(path + ": interval out of order");
    if (!parts.empty() && iv.lo < parts.back().hi)
      throw ConfigError(path + ": intervals out of order");
    parts.push_back(iv);
  }
  if (parts.empty()) return ParamSet();
  ParamSet set(parts.front().lo, parts.back().hi);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) set.remove(parts[i].hi, parts[i + 1].lo);
  return set;
}

void write_witness_jsonl(const std::string& path, const std::vector<ExcisionWitness>& ws) {
  std::ostringstream out;
  for (const auto& w : ws) {
    nlohmann::ordered_json j;
    j["step"] = w.step;
    j["k"] = w.k;
    j["i"] = w.i;
    j["j"] = w.j;
    j["lo"] = w.lo;
    j["hi"] = w.hi;
    j["threshold"] = w.threshold;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int j_export) {
  std::ostringstream out;
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index jx = std::min<Eigen::Index>(dim, std::max(1, j_export));
  out << "t";
  for (Eigen::Index k = 1; k <= jx; ++k) out << ",re_" << k << ",im_" << k;
  out << "\n";
  for (Eigen::Index i = 0; i < traj.times.size(); ++i) {
    out << fmt_double(traj.times(i));
    for (Eigen::Index k = 0; k < jx; ++k) {
      const auto& u = traj.states[static_cast<std::size_t>(i)];
      out << "," << fmt_double(u(k).real()) << "," << fmt_double(u(k).imag());
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// transform chain dump

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

void put_f64(std::ostream& out, double v) {
  static_assert(sizeof(double) == 8);
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError(path + ": truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::int32_t get_i32(std::istream& in, const std::string& path) {
  return static_cast<std::int32_t>(get_u32(in, path));
}

double get_f64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ConfigError(path + ": truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v = 0;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_block(std::ostream& out, const FourierMatrix<double>& fm) {
  for (const auto& [k, c] : fm.coeffs) {
    for (auto comp : k) put_i32(out, comp);
    for (Eigen::Index r = 0; r < fm.dim; ++r)
      for (Eigen::Index col = 0; col < fm.dim; ++col) {
        put_f64(out, c.val(r, col).real());
        put_f64(out, c.val(r, col).imag());
      }
  }
}

FourierMatrix<double> get_block(std::istream& in, const std::string& path, std::uint32_t count,
                                int nfreq, Eigen::Index dim) {
  FourierMatrix<double> fm = fm_zero<double>(dim, nfreq);
  fm.symmetric = false;
  for (std::uint32_t m = 0; m < count; ++m) {
    ModeIndex k(static_cast<std::size_t>(nfreq));
    for (int c = 0; c < nfreq; ++c) k[static_cast<std::size_t>(c)] = get_i32(in, path);
    auto& coeff = fm.at_or_insert(k);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index col = 0; col < dim; ++col) {
        double re = get_f64(in, path);
        double im = get_f64(in, path);
        coeff.val(r, col) = std::complex<double>(re, im);
      }
  }
  return fm;
}

}  // namespace

void write_transforms(const std::string& path, const ReductionResult& red) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write("KAMR", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(red.composed.nfreq));
  put_u32(out, static_cast<std::uint32_t>(red.composed.dim));
  put_u32(out, static_cast<std::uint32_t>(red.transforms.size()));
  for (const auto& tr : red.transforms)
    put_u32(out, static_cast<std::uint32_t>(tr.g.coeffs.size()));
  for (const auto& tr : red.transforms) put_block(out, tr.g);
  put_u32(out, static_cast<std::uint32_t>(red.composed.coeffs.size()));
  put_block(out, red.composed);
  put_u32(out, static_cast<std::uint32_t>(red.composed_adj.coeffs.size()));
  put_block(out, red.composed_adj);
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

TransformChain read_transforms(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "KAMR", 4) != 0)
    throw ConfigError(path + ": bad magic, not a transform dump");
  std::uint32_t version = get_u32(in, path);
  if (version != 1) throw ConfigError(path + ": unsupported version " + std::to_string(version));

  TransformChain chain;
  chain.nfreq = static_cast<int>(get_u32(in, path));
  chain.dim = static_cast<Eigen::Index>(get_u32(in, path));
  if (chain.nfreq < 1 || chain.nfreq > 8 || chain.dim < 1 || chain.dim > 4096)
    throw ConfigError(path + ": implausible header");

  std::uint32_t steps = get_u32(in, path);
  std::vector<std::uint32_t> counts(steps);
  for (auto& c : counts) c = get_u32(in, path);
  for (std::uint32_t s = 0; s < steps; ++s)
    chain.steps.push_back(get_block(in, path, counts[s], chain.nfreq, chain.dim));
  std::uint32_t nc = get_u32(in, path);
  chain.composed = get_block(in, path, nc, chain.nfreq, chain.dim);
  nc = get_u32(in, path);
  chain.composed_adj = get_block(in, path, nc, chain.nfreq, chain.dim);
  return chain;
}

}  // namespace kamred
