#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rwcap {

/// Full run configuration, parsed from a plain-text nested key-value file:
///
///   section {
///     key value [value ...]
///   }
///
/// Unknown sections or keys, malformed values, and non-positive tolerances
/// are reported with line and field diagnostics.  serialize() round-trips:
/// parse(serialize(c)) == c.
struct RunConfig {
  struct Green {
    double quad_tol = 1e-8;
    int series_cutoff = 5000;
    int box_radius = 0;
    std::string cache_path;
    bool operator==(const Green&) const = default;
  } green;

  struct Gn {
    int coarse_grid = 200;
    int fine_grid = 400;
    int max_iters = 4000;
    double tol = 1e-11;
    int starts = 6;
    bool operator==(const Gn&) const = default;
  } gn;

  struct Experiment {
    std::vector<uint64_t> n_list = {256, 1024, 4096};
    int samples = 20;
    uint64_t seed = 1;
    int b_n = 0;  // 0 = default rule max(1, floor(log log n))
    std::vector<double> lambda_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    int m_max = 3;
    bool operator==(const Experiment&) const = default;
  } experiment;

  struct Output {
    std::string dir = "out";
    std::string store = "results.jsonl";
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const RunConfig&) const = default;

  std::string serialize() const;
  static RunConfig parse_text(const std::string& text);
  static RunConfig parse_file(const std::string& path);
};

}  // namespace rwcap
