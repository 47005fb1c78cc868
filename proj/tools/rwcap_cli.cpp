// rwcap: command-line front end for the random-walk capacity laboratory.
//
// Subcommands: green, capacity, crossterm, gn, experiment, report.
// Exit status is 0 iff no tolerance breach and no error flag was produced.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwcap/capacity.hpp"
#include "rwcap/config.hpp"
#include "rwcap/crossterm.hpp"
#include "rwcap/experiments.hpp"
#include "rwcap/gn.hpp"
#include "rwcap/green.hpp"
#include "rwcap/lattice.hpp"
#include "rwcap/walk.hpp"

namespace {

using namespace rwcap;
namespace fs = std::filesystem;

Point parse_point(const std::string& spec) {
  Point p;
  std::istringstream is(spec);
  char comma;
  for (int i = 0; i < 4; ++i) {
    if (i > 0 && !(is >> comma && comma == ',')) {
      throw CLI::ValidationError("point", "expected x,y,z,w: " + spec);
    }
    if (!(is >> p[i])) {
      throw CLI::ValidationError("point", "expected x,y,z,w: " + spec);
    }
  }
  return p;
}

PointSet load_set_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("set", "cannot read " + path);
  std::vector<Point> pts;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p[0])) continue;  // blank line
    if (!(ls >> p[1] >> p[2] >> p[3])) {
      throw CLI::ValidationError(
          "set", path + " line " + std::to_string(lineno) + ": need 4 coords");
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw CLI::ValidationError("set", path + " is empty");
  return PointSet(std::move(pts));
}

// Walk spec "n[:seed[:stream]]" or a path to a saved walk file.
PointSet resolve_set(const std::string& spec, uint64_t default_seed,
                     uint64_t default_stream) {
  if (fs::exists(spec)) {
    if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".wlk") {
      WalkPath w = load_walk(spec);
      return range_of(w, 1, w.length());
    }
    return load_set_file(spec);
  }
  uint64_t n = 0, seed = default_seed, stream = default_stream;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> n)) {
    throw CLI::ValidationError("walk", "not a file or walk spec: " + spec);
  }
  if (is >> c1 >> seed) is >> c2 >> stream;
  WalkPath w = sample_walk(n, seed, stream);
  return range_of(w, 1, w.length());
}

void write_text(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk capacity laboratory on Z^4"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_dir = "out";
  uint64_t seed = 1;
  int workers = 1;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Master seed (overrides config)");
  app.add_option("--workers", workers, "Worker count (modules are serial here)");
  app.add_option("--out", out_dir, "Output directory");

  // green
  auto* green_cmd = app.add_subcommand("green", "Evaluate lattice Green functions");
  std::vector<std::string> green_points{"0,0,0,0"};
  bool green_sqrt_flag = false;
  int prefill_radius = 0;
  std::string cache_out;
  green_cmd->add_option("--point", green_points, "Points x,y,z,w (repeatable)");
  green_cmd->add_flag("--sqrt", green_sqrt_flag, "Also emit the convolutional square root");
  green_cmd->add_option("--prefill", prefill_radius, "Prefill all orbits up to this radius");
  green_cmd->add_option("--save-cache", cache_out, "Write the binary Green cache here");

  // capacity
  auto* cap_cmd = app.add_subcommand("capacity", "Equilibrium measure and capacity");
  std::string cap_spec;
  cap_cmd->add_option("set", cap_spec, "Set file, walk file (.wlk), or walk spec n[:seed[:stream]]")
      ->required();

  // crossterm
  auto* cross_cmd = app.add_subcommand("crossterm", "Cross-terms of two sets");
  std::string cross_a, cross_b;
  cross_cmd->add_option("a", cross_a, "First set (file or walk spec)")->required();
  cross_cmd->add_option("b", cross_b, "Second set (file or walk spec)")->required();

  // gn
  auto* gn_cmd = app.add_subcommand("gn", "Variational constant solver");
  gn_cmd->add_subcommand("solve", "Maximize the ratio");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Seeded Monte Carlo experiments");
  std::string exp_kind;
  exp_cmd
      ->add_option("kind", exp_kind,
                   "expected_capacity | nonintersection | lower_tail | "
                   "tl_moments | bridge_bound")
      ->required();

  // report
  auto* rep_cmd = app.add_subcommand("report", "Summarize the result store");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::parse_file(config_path);
    if (app.count("--seed") > 0) cfg.experiment.seed = seed;
    if (app.count("--out") == 0) out_dir = cfg.output.dir;
    std::string store_path = (fs::path(out_dir) / cfg.output.store).string();
    bool breach = false;

    if (*green_cmd) {
      GreenTable::Params gp;
      gp.quad_tol = cfg.green.quad_tol;
      gp.series_cutoff = cfg.green.series_cutoff;
      GreenTable table(gp);
      if (prefill_radius > 0) table.prefill(prefill_radius, green_sqrt_flag);
      nlohmann::json out = nlohmann::json::array();
      for (const std::string& ps : green_points) {
        Point z = parse_point(ps);
        nlohmann::json e{{"point", {z[0], z[1], z[2], z[3]}},
                         {"green", table.green(z)},
                         {"tolerance", table.green_tol()}};
        if (green_sqrt_flag) e["green_sqrt"] = table.green_sqrt(z);
        out.push_back(e);
      }
      if (!cache_out.empty()) table.save(cache_out);
      std::string path = (fs::path(out_dir) / "green.json").string();
      write_text(path, out.dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
    } else if (*cap_cmd) {
      GreenTable table;
      PointSet A = resolve_set(cap_spec, cfg.experiment.seed, 0);
      EquilibriumSolution es(A, table);
      nlohmann::json out{{"size", A.size()},
                         {"capacity", es.capacity()},
                         {"tolerance", es.tolerance()}};
      nlohmann::json esj = nlohmann::json::array();
      for (size_t i = 0; i < A.size(); ++i) {
        esj.push_back({{"point", {A[i][0], A[i][1], A[i][2], A[i][3]}},
                       {"es", es.es_vector()[static_cast<long>(i)]}});
      }
      out["equilibrium_measure"] = esj;
      std::string path = (fs::path(out_dir) / "capacity.json").string();
      write_text(path, out.dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
    } else if (*cross_cmd) {
      GreenTable table;
      PointSet A = resolve_set(cross_a, cfg.experiment.seed, 0);
      PointSet B = resolve_set(cross_b, cfg.experiment.seed, 1);
      CrossTermReport r = cross_term_report(A, B, table);
      breach = std::abs(r.residual) > 10.0 * r.tolerance;
      std::string path = (fs::path(out_dir) / "crossterm.json").string();
      write_text(path, r.to_json() + "\n");
      std::cout << r.to_json() << "\n";
    } else if (*gn_cmd) {
      GNConfig gc;
      gc.coarse_grid = cfg.gn.coarse_grid;
      gc.fine_grid = cfg.gn.fine_grid;
      gc.max_iters = cfg.gn.max_iters;
      gc.tol = cfg.gn.tol;
      gc.starts = cfg.gn.starts;
      gc.seed = cfg.experiment.seed;
      GNResult res = maximize_ratio(gc);
      breach = !res.converged || res.kappa <= 0.0;
      write_text((fs::path(out_dir) / "gn_result.json").string(),
                 res.to_json() + "\n");
      write_text((fs::path(out_dir) / "gn_profile.csv").string(),
                 res.profile_csv());
      std::cout << res.to_json() << "\n";
    } else if (*exp_cmd) {
      ResultStore store(store_path);
      fs::create_directories(out_dir);
      std::vector<ExperimentRecord> records;
      std::vector<size_t> n_list(cfg.experiment.n_list.begin(),
                                 cfg.experiment.n_list.end());
      if (exp_kind == "expected_capacity") {
        records = expected_capacity_curve(n_list, cfg.experiment.samples,
                                          cfg.experiment.seed);
      } else if (exp_kind == "nonintersection") {
        records = nonintersection_curve(n_list, cfg.experiment.samples,
                                        cfg.experiment.seed);
      } else if (exp_kind == "lower_tail") {
        records.push_back(lower_tail_experiment(
            n_list.back(), cfg.experiment.lambda_grid, cfg.experiment.b_n,
            cfg.experiment.samples, cfg.experiment.seed));
      } else if (exp_kind == "tl_moments") {
        records.push_back(tl_moment_check(n_list.back(), cfg.experiment.m_max,
                                          cfg.experiment.samples,
                                          cfg.experiment.seed));
      } else if (exp_kind == "bridge_bound") {
        records = bridge_bound_check(n_list, cfg.experiment.samples,
                                     cfg.experiment.seed);
      } else {
        std::cerr << "unknown experiment kind: " << exp_kind << "\n";
        return 2;
      }
      for (const ExperimentRecord& r : records) {
        store.append(r);
        std::cout << r.to_json().dump() << "\n";
        for (const char* flag : {"bridge_failed", "rho_monotone"}) {
          if (r.estimates.contains(flag)) {
            bool v = r.estimates.at(flag).get<bool>();
            if ((std::string(flag) == "bridge_failed" && v) ||
                (std::string(flag) == "rho_monotone" && !v)) {
              breach = true;
            }
          }
        }
        if (r.estimates.contains("dominance_violations") &&
            r.estimates.at("dominance_violations").get<int>() > 0) {
          breach = true;
        }
      }
    } else if (*rep_cmd) {
      ResultStore store(store_path);
      std::vector<ExperimentRecord> records = store.load_all();
      std::string csv = csv_summary(records);
      write_text((fs::path(out_dir) / "summary.csv").string(), csv);
      std::cout << csv;
      nlohmann::json by_kind;
      for (const ExperimentRecord& r : records) by_kind[r.kind].push_back(r.to_json());
      write_text((fs::path(out_dir) / "report.json").string(),
                 by_kind.dump(2) + "\n");
    }
    return breach ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
