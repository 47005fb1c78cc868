#include "rwcap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rwcap/capacity.hpp"
#include "rwcap/crossterm.hpp"
#include "rwcap/green.hpp"
#include "rwcap/rng.hpp"
#include "rwcap/walk.hpp"

namespace rwcap {

namespace {

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentRecord make_record(const std::string& kind, nlohmann::json params,
                             nlohmann::json estimates) {
  ExperimentRecord r;
  r.kind = kind;
  r.parameters = std::move(params);
  r.estimates = std::move(estimates);
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a(kind + r.parameters.dump())));
  r.experiment_id = kind + "-" + hex;
  r.timestamp = iso_timestamp();
  r.code_version = kCodeVersion;
  return r;
}

uint64_t kind_seed(const std::string& kind, uint64_t seed, uint64_t n) {
  return CounterRng::mix(CounterRng::mix(seed ^ fnv1a(kind)) ^ n);
}

// Shared Green table for the experiments that need exact solves.  The
// orchestration here is single-threaded; modules parallelize internally.
GreenTable& shared_table() {
  static GreenTable table;
  return table;
}

// G_D with the far-field approximation beyond the cached core; the relative
// error beyond ||z||_inf = 8 is under 2%, adequate for growth-law fits.
double green_hybrid(GreenTable& table, const Point& z) {
  if (z.norm_inf() <= 8) return table.green(z);
  return green_d_far_field(static_cast<double>(z.norm2_sq()));
}

struct CapEstimate {
  double cap = 0.0;
  double std_error = 0.0;
  double bias_bound = 0.0;  // self-consistent far-field bound + undecided
  size_t range_size = 0;
};

// Stratified escape sampling over the range of one walk: `points` points
// taken at equal strides through the canonical set order, `trials` fresh
// walks per point, all stopped at `radius` (<= 0: 10 x diameter default).
CapEstimate estimate_capacity(const PointSet& S, double radius, int points,
                              int trials, uint64_t seed, uint64_t stream_base) {
  CapEstimate e;
  e.range_size = S.size();
  McEscapeContext ctx(S, radius);
  int t = std::min<int>(points, static_cast<int>(S.size()));
  uint64_t escaped = 0, total = 0, undecided = 0;
  for (int j = 0; j < t; ++j) {
    size_t idx = (static_cast<size_t>(j) * S.size()) / static_cast<size_t>(t);
    McEscapeResult r =
        ctx.run(S[idx], static_cast<uint64_t>(trials), seed,
                stream_base + static_cast<uint64_t>(j) * static_cast<uint64_t>(trials));
    escaped += r.trials - r.captured;
    undecided += r.undecided;
    total += r.trials;
  }
  double p = static_cast<double>(escaped) / static_cast<double>(total);
  double ns = static_cast<double>(S.size());
  e.cap = ns * p;
  e.std_error =
      ns * std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(total)) /
                     static_cast<double>(total));
  // A walk that reached the decision radius R without hitting S hits later
  // with probability at most ~ Cap(S) * far-field(R); use the estimate
  // itself (x1.25 slack) since no better upper bound is available here.
  e.bias_bound =
      ns * (1.25 * std::max(e.cap, 1.0) *
                green_d_far_field(ctx.escape_radius() * ctx.escape_radius()) +
            static_cast<double>(undecided) / static_cast<double>(total));
  return e;
}

double curve_radius(size_t n) {
  // Beyond the exact-solver range, stop fresh walks at 3 sqrt(n): outside
  // the bulk of the range, with the residual return probability recorded in
  // the bias bound.
  return n <= 4096 ? 0.0 : 3.0 * std::sqrt(static_cast<double>(n));
}

struct LinFit {
  double slope = 0.0, intercept = 0.0, corr = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinFit f;
  size_t n = x.size();
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double dn = static_cast<double>(n);
  double vx = sxx - sx * sx / dn, vy = syy - sy * sy / dn;
  double cxy = sxy - sx * sy / dn;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / dn;
  f.corr = (vx <= 0.0 || vy <= 0.0) ? 0.0 : cxy / std::sqrt(vx * vy);
  return f;
}

}  // namespace

nlohmann::json ExperimentRecord::to_json() const {
  return {{"experiment_id", experiment_id}, {"kind", kind},
          {"parameters", parameters},       {"estimates", estimates},
          {"timestamp", timestamp},         {"code_version", code_version}};
}

ExperimentRecord ExperimentRecord::from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  r.experiment_id = j.at("experiment_id").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.parameters = j.at("parameters");
  r.estimates = j.at("estimates");
  r.timestamp = j.at("timestamp").get<std::string>();
  r.code_version = j.at("code_version").get<std::string>();
  return r;
}

ResultStore::ResultStore(std::string path) : path_(std::move(path)) {}

void ResultStore::append(const ExperimentRecord& record) const {
  std::ofstream os(path_, std::ios::app);
  if (!os) throw std::runtime_error("result store not writable: " + path_);
  os << record.to_json().dump() << "\n";
}

std::vector<ExperimentRecord> ResultStore::load_all() const {
  std::vector<ExperimentRecord> out;
  std::ifstream is(path_);
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(ExperimentRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("result store " + path_ + " line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

int default_b_rule(size_t n) {
  double ll = std::log(std::log(std::max<double>(3.0, static_cast<double>(n))));
  return std::max(1, static_cast<int>(std::floor(ll)));
}

std::vector<ExperimentRecord> expected_capacity_curve(
    const std::vector<size_t>& n_list, int samples, uint64_t seed) {
  std::vector<ExperimentRecord> out;
  for (size_t n : n_list) {
    uint64_t ks = kind_seed("expected_capacity", seed, n);
    double sum = 0.0, sumsq = 0.0, bias = 0.0;
    for (int s = 0; s < samples; ++s) {
      uint64_t base = static_cast<uint64_t>(s) << 32;
      WalkPath w = sample_walk(n, ks, base);
      PointSet S = range_of(w, 1, n);
      CapEstimate e = estimate_capacity(S, curve_radius(n), 64, 4, ks, base + 1);
      sum += e.cap;
      sumsq += e.cap * e.cap;
      bias += e.bias_bound;
    }
    double m = static_cast<double>(samples);
    double mean = sum / m;
    double var = std::max(0.0, sumsq / m - mean * mean);
    double se = samples > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
    double r = mean * std::log(static_cast<double>(n)) / static_cast<double>(n);
    out.push_back(make_record(
        "expected_capacity",
        {{"n", n}, {"samples", samples}, {"seed", seed},
         {"points", 64}, {"trials_per_point", 4}, {"radius", curve_radius(n)}},
        {{"primary", mean}, {"primary_se", se}, {"capacity", mean},
         {"std_error", se}, {"r_n", r}, {"mean_bias_bound", bias / m}}));
  }
  return out;
}

std::vector<ExperimentRecord> nonintersection_curve(
    const std::vector<size_t>& n_list, int samples, uint64_t seed) {
  std::vector<ExperimentRecord> out;
  for (size_t n : n_list) {
    uint64_t ks = kind_seed("nonintersection", seed, n);
    double sum = 0.0, sumsq = 0.0, bias = 0.0;
    for (int s = 0; s < samples; ++s) {
      uint64_t base = static_cast<uint64_t>(s) << 32;
      WalkPath w = sample_walk(n, ks, base);
      PointSet S = range_of(w, 1, n);
      CapEstimate e = estimate_capacity(S, curve_radius(n), 64, 8, ks, base + 1);
      double p = e.cap / static_cast<double>(S.size());
      sum += p;
      sumsq += p * p;
      bias += e.bias_bound / static_cast<double>(S.size());
    }
    double m = static_cast<double>(samples);
    double mean = sum / m;
    double var = std::max(0.0, sumsq / m - mean * mean);
    double se = samples > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
    double norm = mean * 8.0 * std::log(static_cast<double>(n)) / (M_PI * M_PI);
    out.push_back(make_record(
        "nonintersection",
        {{"n", n}, {"samples", samples}, {"seed", seed},
         {"points", 64}, {"trials_per_point", 8}, {"radius", curve_radius(n)}},
        {{"primary", mean}, {"primary_se", se}, {"p_hat", mean},
         {"std_error", se}, {"normalized", norm}, {"mean_bias_bound", bias / m}}));
  }
  return out;
}

ExperimentRecord lower_tail_experiment(size_t n,
                                       const std::vector<double>& lambda_grid,
                                       int b_n, int samples, uint64_t seed) {
  if (lambda_grid.empty() || samples < 2) {
    throw std::invalid_argument("lower_tail_experiment: bad parameters");
  }
  int b = b_n > 0 ? b_n : default_b_rule(n);
  uint64_t ks = kind_seed("lower_tail", seed, n);
  // Shallow truncation keeps M large; the common truncation bias cancels in
  // the mean-centered statistic, and the estimator noise level is recorded.
  double radius = std::max(12.0, 0.5 * std::sqrt(static_cast<double>(n)));
  std::vector<double> caps(static_cast<size_t>(samples));
  double sum = 0.0, mean_se = 0.0;
  for (int s = 0; s < samples; ++s) {
    uint64_t base = static_cast<uint64_t>(s) << 32;
    WalkPath w = sample_walk(n, ks, base);
    PointSet S = range_of(w, 1, n);
    CapEstimate e = estimate_capacity(S, radius, 48, 4, ks, base + 1);
    caps[static_cast<size_t>(s)] = e.cap;
    sum += e.cap;
    mean_se += e.std_error;
  }
  double m = static_cast<double>(samples);
  double mean = sum / m;
  double var = 0.0;
  for (double c : caps) var += (c - mean) * (c - mean);
  double sd = std::sqrt(var / (m - 1.0));

  double logn = std::log(static_cast<double>(n));
  double scale = static_cast<double>(n) * static_cast<double>(b) / (logn * logn);
  nlohmann::json lam_j = nlohmann::json::array(), p_j = nlohmann::json::array();
  nlohmann::json rho_j = nlohmann::json::array(),
                 count_j = nlohmann::json::array(),
                 flag_j = nlohmann::json::array();
  std::vector<double> fit_x, fit_y;
  bool monotone = true;
  double prev_rho = -1e300;
  for (double lam : lambda_grid) {
    double thresh = mean - lam * scale;
    int count = 0;
    for (double c : caps) {
      if (c <= thresh) ++count;
    }
    double p = static_cast<double>(count) / m;
    double rho = -std::log(std::max(p, 0.5 / m)) / static_cast<double>(b);
    lam_j.push_back(lam);
    p_j.push_back(p);
    rho_j.push_back(rho);
    count_j.push_back(count);
    flag_j.push_back(count < 10);
    if (count >= 1) {
      fit_x.push_back(lam);
      fit_y.push_back(rho);
    }
    monotone = monotone && rho >= prev_rho;
    prev_rho = rho;
  }
  LinFit fit = linear_fit(fit_x, fit_y);
  return make_record(
      "lower_tail",
      {{"n", n}, {"lambda_grid", lambda_grid}, {"b_n", b},
       {"samples", samples}, {"seed", seed}, {"radius", radius},
       {"points", 48}, {"trials_per_point", 4}},
      {{"primary", fit.slope}, {"primary_se", 0.0}, {"mean_capacity", mean},
       {"capacity_sd", sd}, {"estimator_noise_sd", mean_se / m},
       {"deviation_scale", scale}, {"lambda", lam_j}, {"p_hat", p_j},
       {"rho_hat", rho_j}, {"tail_counts", count_j},
       {"insufficient_tail_mass", flag_j}, {"rho_monotone", monotone},
       {"fit_slope", fit.slope}, {"fit_intercept", fit.intercept},
       {"fit_corr", fit.corr}});
}

ExperimentRecord tl_moment_check(size_t n, int m_max, int samples,
                                 uint64_t seed) {
  if (n > 4096) {
    throw std::invalid_argument("tl_moment_check: n beyond exact-solver budget");
  }
  if (m_max < 1 || m_max > 4) {
    throw std::invalid_argument("tl_moment_check: m_max must be in [1,4]");
  }
  int b = default_b_rule(n);
  size_t block = n / static_cast<size_t>(b);
  size_t nn = block * static_cast<size_t>(b);  // divisible length
  uint64_t ks = kind_seed("tl_moments", seed, n);
  GreenTable& table = shared_table();

  std::vector<double> msum(static_cast<size_t>(m_max), 0.0);
  std::vector<double> msumsq(static_cast<size_t>(m_max), 0.0);
  int violations = 0;
  double min_margin = 1e300;
  for (int s = 0; s < samples; ++s) {
    WalkPath w1 = sample_walk(nn, ks, 2 * static_cast<uint64_t>(s));
    WalkPath w2 = sample_walk(nn, ks, 2 * static_cast<uint64_t>(s) + 1);
    // TL from the two full-range solves directly (tl() would repeat both).
    PointSet A = range_of(w1, 1, nn), B = range_of(w2, 1, nn);
    EquilibriumSolution ea(A, table), eb(B, table);
    double tln = 0.0;
    for (size_t i = 0; i < A.size(); ++i) {
      double acc = 0.0;
      for (size_t j = 0; j < B.size(); ++j) {
        acc += table.green(A[i] - B[j]) * eb.es_vector()[static_cast<long>(j)];
      }
      tln += ea.es_vector()[static_cast<long>(i)] * acc;
    }
    double tlp = tl_prime(w1, w2, b, table);
    // TL' == TL exactly for b = 1, so dominance is checked against a
    // roundoff-and-solve-tolerance margin, not bitwise.
    if (tlp < tln - 1e-9 * std::max(1.0, tln)) ++violations;
    min_margin = std::min(min_margin, tlp - tln);
    double pw = 1.0;
    for (int mm = 0; mm < m_max; ++mm) {
      pw *= tlp;
      msum[static_cast<size_t>(mm)] += pw;
      msumsq[static_cast<size_t>(mm)] += pw * pw;
    }
  }
  double m = static_cast<double>(samples);
  double logn = std::log(static_cast<double>(nn));
  double scale = static_cast<double>(nn) / (logn * logn);
  nlohmann::json mom_j = nlohmann::json::array(), c_j = nlohmann::json::array(),
                 se_j = nlohmann::json::array();
  double fact = 1.0;
  for (int mm = 1; mm <= m_max; ++mm) {
    fact *= mm;
    double mean = msum[static_cast<size_t>(mm - 1)] / m;
    double var = std::max(0.0, msumsq[static_cast<size_t>(mm - 1)] / m - mean * mean);
    mom_j.push_back(mean);
    se_j.push_back(samples > 1 ? std::sqrt(var / (m - 1.0)) : 0.0);
    c_j.push_back(std::pow(mean / (fact * std::pow(scale, mm)),
                           1.0 / static_cast<double>(mm)));
  }
  return make_record(
      "tl_moments",
      {{"n", nn}, {"m_max", m_max}, {"samples", samples}, {"seed", seed},
       {"b_n", b}},
      {{"primary", c_j[0]}, {"primary_se", se_j[0]}, {"moments", mom_j},
       {"moment_se", se_j}, {"c_hat", c_j}, {"dominance_violations", violations},
       {"min_margin", min_margin}, {"scale", scale}});
}

std::vector<ExperimentRecord> bridge_bound_check(
    const std::vector<size_t>& n_list, int samples, uint64_t seed) {
  std::vector<ExperimentRecord> out;
  GreenTable& table = shared_table();
  std::vector<double> xs, ys;
  for (size_t n : n_list) {
    uint64_t ks = kind_seed("bridge_bound", seed, n);
    CounterRng setup(ks, 0);
    double rn = std::sqrt(static_cast<double>(n));
    // Conditioning target at typical scale, parity-matched to n so that
    // S_n = y is reachable; z is an independent random point at scale rn.
    Point y{static_cast<int>(std::lround(0.5 * rn)),
            static_cast<int>(std::lround(0.25 * rn)), 0, 0};
    if (((y.norm1() & 1) ^ (static_cast<long>(n) & 1)) != 0) y[2] = 1;
    Point z;
    for (int d = 0; d < 4; ++d) {
      z[d] = static_cast<int>(std::lround((setup.next_double() - 0.5) * rn));
    }
    double ball = std::max(2.0, 0.35 * std::pow(static_cast<double>(n), 0.5));
    long ball_sq = static_cast<long>(ball * ball);

    double sum_u = 0.0, sumsq_u = 0.0;
    double sum_c = 0.0, sumsq_c = 0.0;
    int accepted = 0;
    uint64_t attempts = 0;
    uint64_t max_attempts = static_cast<uint64_t>(samples) * 20000ULL;
    uint64_t stream = 1;
    // Unconditioned pass (fixed budget), then rejection bridge sampling.
    for (int s = 0; s < samples; ++s) {
      WalkPath w = sample_walk(n, ks, stream++);
      double g = 0.0;
      for (size_t i = 1; i <= n; ++i) g += green_hybrid(table, w.position(i));
      sum_u += g;
      sumsq_u += g * g;
    }
    while (accepted < samples && attempts < max_attempts) {
      ++attempts;
      WalkPath w = sample_walk(n, ks, stream++);
      if ((w.position(n) - y).norm2_sq() > ball_sq) continue;
      double g = 0.0;
      for (size_t i = 1; i <= n; ++i) g += green_hybrid(table, w.position(i) - z);
      sum_c += g;
      sumsq_c += g * g;
      ++accepted;
    }
    double acc_rate = static_cast<double>(accepted) /
                      static_cast<double>(std::max<uint64_t>(attempts, 1));
    bool failed = acc_rate < 1e-4 && accepted < samples;
    double m = static_cast<double>(samples);
    double mean_u = sum_u / m;
    double se_u = std::sqrt(std::max(0.0, sumsq_u / m - mean_u * mean_u) /
                            std::max(1.0, m - 1.0));
    double mean_c = accepted > 0 ? sum_c / accepted : 0.0;
    double se_c =
        accepted > 1
            ? std::sqrt(std::max(0.0, sumsq_c / accepted - mean_c * mean_c) /
                        (accepted - 1.0))
            : 0.0;
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(mean_u);
    out.push_back(make_record(
        "bridge_bound",
        {{"n", n}, {"samples", samples}, {"seed", seed},
         {"y", {y[0], y[1], y[2], y[3]}}, {"z", {z[0], z[1], z[2], z[3]}},
         {"ball_radius_sq", ball_sq}},
        {{"primary", mean_u}, {"primary_se", se_u},
         {"unconditioned_mean", mean_u}, {"unconditioned_se", se_u},
         {"conditioned_mean", mean_c}, {"conditioned_se", se_c},
         {"accepted", accepted}, {"attempts", attempts},
         {"acceptance_rate", acc_rate}, {"bridge_failed", failed}}));
  }
  if (n_list.size() >= 2) {
    LinFit fit = linear_fit(xs, ys);
    out.push_back(make_record(
        "bridge_bound",
        {{"n_list", n_list}, {"samples", samples}, {"seed", seed}},
        {{"primary", fit.slope}, {"primary_se", 0.0}, {"fit_slope", fit.slope},
         {"fit_intercept", fit.intercept}, {"fit_corr", fit.corr}}));
  }
  return out;
}

ExperimentRecord replay(const ExperimentRecord& record) {
  const nlohmann::json& p = record.parameters;
  uint64_t seed = p.at("seed").get<uint64_t>();
  if (record.kind == "expected_capacity") {
    return expected_capacity_curve({p.at("n").get<size_t>()},
                                   p.at("samples").get<int>(), seed)[0];
  }
  if (record.kind == "nonintersection") {
    return nonintersection_curve({p.at("n").get<size_t>()},
                                 p.at("samples").get<int>(), seed)[0];
  }
  if (record.kind == "lower_tail") {
    return lower_tail_experiment(p.at("n").get<size_t>(),
                                 p.at("lambda_grid").get<std::vector<double>>(),
                                 p.at("b_n").get<int>(),
                                 p.at("samples").get<int>(), seed);
  }
  if (record.kind == "tl_moments") {
    return tl_moment_check(p.at("n").get<size_t>(), p.at("m_max").get<int>(),
                           p.at("samples").get<int>(), seed);
  }
  if (record.kind == "bridge_bound") {
    if (p.contains("n_list")) {
      auto all = bridge_bound_check(p.at("n_list").get<std::vector<size_t>>(),
                                    p.at("samples").get<int>(), seed);
      return all.back();
    }
    return bridge_bound_check({p.at("n").get<size_t>()},
                              p.at("samples").get<int>(), seed)[0];
  }
  throw std::invalid_argument("replay: unknown experiment kind " + record.kind);
}

bool replay_matches(const ExperimentRecord& record) {
  ExperimentRecord fresh = replay(record);
  return fresh.estimates == record.estimates &&
         fresh.parameters == record.parameters &&
         fresh.experiment_id == record.experiment_id;
}

std::string csv_summary(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << "kind,experiment_id,n,primary,primary_se\n";
  os.precision(17);
  for (const ExperimentRecord& r : records) {
    os << r.kind << "," << r.experiment_id << ",";
    if (r.parameters.contains("n")) {
      os << r.parameters.at("n").get<size_t>();
    }
    os << "," << r.estimates.value("primary", 0.0) << ","
       << r.estimates.value("primary_se", 0.0) << "\n";
  }
  return os.str();
}

}  // namespace rwcap
