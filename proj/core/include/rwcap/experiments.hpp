#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace rwcap {

inline constexpr const char* kCodeVersion = "rwcap-0.1.0";

/// One completed experiment: everything needed to reproduce it (kind +
/// parameters, which include all seeds) plus the resulting estimates.
/// `timestamp` is the only field excluded from replay comparison.
struct ExperimentRecord {
  std::string experiment_id;  // kind + parameter digest
  std::string kind;           // expected_capacity | nonintersection |
                              // lower_tail | tl_moments | bridge_bound
  nlohmann::json parameters;
  nlohmann::json estimates;   // values, std errors, tolerances, flags
  std::string timestamp;
  std::string code_version;

  nlohmann::json to_json() const;
  static ExperimentRecord from_json(const nlohmann::json& j);
};

/// Append-only JSON-lines store, one record per line.
class ResultStore {
 public:
  explicit ResultStore(std::string path);
  void append(const ExperimentRecord& record) const;
  std::vector<ExperimentRecord> load_all() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// b_n = max(1, floor(log log n)) -- the default block rule.
int default_b_rule(size_t n);

/// MC estimate of E[Cap(S[1,n])] per n: `samples` walks, capacity estimated
/// by stratified escape sampling over range points.  Reports the estimate,
/// standard error, bias bound, and r(n) = estimate * log(n) / n.
std::vector<ExperimentRecord> expected_capacity_curve(
    const std::vector<size_t>& n_list, int samples, uint64_t seed);

/// Mean over walk points y of P(R'_y avoids S[1,n]) by fresh-walk MC;
/// reports the normalized value p_hat * 8 log(n) / pi^2.
std::vector<ExperimentRecord> nonintersection_curve(
    const std::vector<size_t>& n_list, int samples, uint64_t seed);

/// Empirical lower-tail rates of the per-sample capacity statistic at
/// offsets lambda * n * b_n / (log n)^2 below the empirical mean.
/// b_n <= 0 selects the default rule.
ExperimentRecord lower_tail_experiment(size_t n,
                                       const std::vector<double>& lambda_grid,
                                       int b_n, int samples, uint64_t seed);

/// Empirical moments of TL'_n over `samples` independent walk pairs, with
/// the TL' >= TL dominance check per pair.  Requires n <= 4096.
ExperimentRecord tl_moment_check(size_t n, int m_max, int samples,
                                 uint64_t seed);

/// Growth of E[sum_i G_D(S_i - z)]: unconditioned fit against log n, plus
/// the bridge-conditioned (S_n near y) estimate by rejection sampling.
std::vector<ExperimentRecord> bridge_bound_check(
    const std::vector<size_t>& n_list, int samples, uint64_t seed);

/// Re-run the experiment described by the record's (kind, parameters).
ExperimentRecord replay(const ExperimentRecord& record);

/// True iff replay reproduces `estimates` bit-for-bit.
bool replay_matches(const ExperimentRecord& record);

/// Plot-ready summary: one "kind,n,estimate,std_error" CSV line per record.
std::string csv_summary(const std::vector<ExperimentRecord>& records);

}  // namespace rwcap
