#ifndef KAMRED_IO_HPP
#define KAMRED_IO_HPP

// Serialization surface: one text format in, two formats out.
//
// Input is a self-describing key-value document, shared by run configs and
// potential tables so there is a single parser to trust.  Each line is
// `key value...`, `#` starts a comment, repeated keys accumulate (mode and
// grid rows).  A config may reference a separate potential file with
// `potential PATH`; keys given in the referencing file win.
//
// Output is JSON for every report (insertion-ordered keys, no timestamps,
// fixed summation orders upstream, so identical runs serialize identically)
// plus two flat artifacts: a CSV of retained parameter intervals and a
// binary dump of the transform chain.
//
// transforms.bin layout, all little-endian, doubles IEEE-754:
//   "KAMR"  u32 version=1  u32 n  u32 J  u32 steps  steps x u32 mode_count
//   then per step the coefficient table: mode_count x { n x i32 ; J*J pairs
//   of f64 (re, im), row-major }.  After the per-step blocks the composed
//   chain and its pointwise inverse follow, each as u32 mode_count plus one
//   coefficient table.  Values only; tau-derivatives stay in process.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kamred/engine.hpp"
#include "kamred/measure.hpp"
#include "kamred/potential.hpp"
#include "kamred/verifier.hpp"

namespace kamred {

struct Document {
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;

  bool has(const std::string& key) const;
  // last occurrence wins for scalar lookups
  const std::vector<std::string>* find_last(const std::string& key) const;
  std::vector<const std::vector<std::string>*> all(const std::string& key) const;

  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::string word(const std::string& key, const std::string& fallback) const;
};

Document parse_document(const std::string& text, const std::string& origin);
Document parse_document_file(const std::string& path);

Potential potential_from_document(const Document& doc, int nfreq);

struct RunConfig {
  EngineConfig engine;
  Potential potential;

  bool tau_scan = false;
  double tau = 1.5;
  int scan_count = 5;

  double tau_min = 1.0;
  double tau_max = 2.0;
  double measure_floor = 1e-3;

  double t_final = 1e3;
  double tol = 1e-8;
  int sample_count = 10000;
  double contamination = 0.0;
  double growth_ratio_max = 1.5;

  unsigned long seed = 0;
  std::string out_dir = ".";
  bool quiet = false;
};

// Parses the file, follows a `potential` reference if present, validates
// ranges.  Throws ConfigError with a one-line reason on any defect.
RunConfig load_run_config(const std::string& path);

// ---------------------------------------------------------------------------
// artifacts

void write_text_file(const std::string& path, const std::string& text);

void write_json_file(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::json read_json_file(const std::string& path);

nlohmann::ordered_json reduction_report(const ReductionResult& red, const RunConfig& cfg);
nlohmann::ordered_json measure_report(const MeasureResult& m);

void write_retained_csv(const std::string& path, const ParamSet& set);
ParamSet read_retained_csv(const std::string& path);

void write_witness_jsonl(const std::string& path, const std::vector<ExcisionWitness>& ws);

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int j_export);

struct TransformChain {
  int nfreq = 0;
  Eigen::Index dim = 0;
  std::vector<FourierMatrix<double>> steps;
  FourierMatrix<double> composed;
  FourierMatrix<double> composed_adj;
};

void write_transforms(const std::string& path, const ReductionResult& red);
TransformChain read_transforms(const std::string& path);

}  // namespace kamred

#endif
