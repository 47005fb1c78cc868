#include "rwcap/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rwcap {

namespace {

[[noreturn]] void fail(size_t line, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, size_t line, const std::string& key) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(line, "field '" + key + "': expected a number, got '" + s + "'");
  }
}

long long parse_int(const std::string& s, size_t line, const std::string& key) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(line, "field '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

void expect_one(const std::vector<std::string>& toks, size_t line) {
  if (toks.size() != 2) {
    fail(line, "field '" + toks[0] + "': expected exactly one value");
  }
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "green {\n"
     << "  quad_tol " << green.quad_tol << "\n"
     << "  series_cutoff " << green.series_cutoff << "\n"
     << "  box_radius " << green.box_radius << "\n";
  if (!green.cache_path.empty()) os << "  cache_path " << green.cache_path << "\n";
  os << "}\n"
     << "gn {\n"
     << "  coarse_grid " << gn.coarse_grid << "\n"
     << "  fine_grid " << gn.fine_grid << "\n"
     << "  max_iters " << gn.max_iters << "\n"
     << "  tol " << gn.tol << "\n"
     << "  starts " << gn.starts << "\n"
     << "}\n"
     << "experiment {\n"
     << "  n_list";
  for (uint64_t n : experiment.n_list) os << " " << n;
  os << "\n"
     << "  samples " << experiment.samples << "\n"
     << "  seed " << experiment.seed << "\n"
     << "  b_n " << experiment.b_n << "\n"
     << "  lambda_grid";
  for (double l : experiment.lambda_grid) os << " " << l;
  os << "\n"
     << "  m_max " << experiment.m_max << "\n"
     << "}\n"
     << "output {\n"
     << "  dir " << output.dir << "\n"
     << "  store " << output.store << "\n"
     << "}\n";
  return os.str();
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string raw;
  size_t lineno = 0;
  std::string section;
  while (std::getline(is, raw)) {
    ++lineno;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::vector<std::string> toks = tokenize(raw);
    if (toks.empty()) continue;
    if (toks.size() == 2 && toks[1] == "{") {
      if (!section.empty()) fail(lineno, "nested section '" + toks[0] + "'");
      section = toks[0];
      if (section != "green" && section != "gn" && section != "experiment" &&
          section != "output") {
        fail(lineno, "unknown section '" + section + "'");
      }
      continue;
    }
    if (toks.size() == 1 && toks[0] == "}") {
      if (section.empty()) fail(lineno, "unmatched '}'");
      section.clear();
      continue;
    }
    if (section.empty()) fail(lineno, "key '" + toks[0] + "' outside a section");
    const std::string& key = toks[0];
    if (section == "green") {
      if (key == "quad_tol") {
        expect_one(toks, lineno);
        c.green.quad_tol = parse_double(toks[1], lineno, key);
        if (c.green.quad_tol <= 0) fail(lineno, "quad_tol must be > 0");
      } else if (key == "series_cutoff") {
        expect_one(toks, lineno);
        c.green.series_cutoff = static_cast<int>(parse_int(toks[1], lineno, key));
        if (c.green.series_cutoff < 100) fail(lineno, "series_cutoff must be >= 100");
      } else if (key == "box_radius") {
        expect_one(toks, lineno);
        c.green.box_radius = static_cast<int>(parse_int(toks[1], lineno, key));
      } else if (key == "cache_path") {
        expect_one(toks, lineno);
        c.green.cache_path = toks[1];
      } else {
        fail(lineno, "unknown key '" + key + "' in section green");
      }
    } else if (section == "gn") {
      expect_one(toks, lineno);
      if (key == "coarse_grid") {
        c.gn.coarse_grid = static_cast<int>(parse_int(toks[1], lineno, key));
      } else if (key == "fine_grid") {
        c.gn.fine_grid = static_cast<int>(parse_int(toks[1], lineno, key));
      } else if (key == "max_iters") {
        c.gn.max_iters = static_cast<int>(parse_int(toks[1], lineno, key));
      } else if (key == "tol") {
        c.gn.tol = parse_double(toks[1], lineno, key);
        if (c.gn.tol <= 0) fail(lineno, "tol must be > 0");
      } else if (key == "starts") {
        c.gn.starts = static_cast<int>(parse_int(toks[1], lineno, key));
      } else {
        fail(lineno, "unknown key '" + key + "' in section gn");
      }
    } else if (section == "experiment") {
      if (key == "n_list") {
        if (toks.size() < 2) fail(lineno, "n_list needs at least one value");
        c.experiment.n_list.clear();
        for (size_t i = 1; i < toks.size(); ++i) {
          long long v = parse_int(toks[i], lineno, key);
          if (v < 1) fail(lineno, "n_list entries must be >= 1");
          c.experiment.n_list.push_back(static_cast<uint64_t>(v));
        }
      } else if (key == "lambda_grid") {
        if (toks.size() < 2) fail(lineno, "lambda_grid needs at least one value");
        c.experiment.lambda_grid.clear();
        for (size_t i = 1; i < toks.size(); ++i) {
          c.experiment.lambda_grid.push_back(parse_double(toks[i], lineno, key));
        }
      } else if (key == "samples") {
        expect_one(toks, lineno);
        c.experiment.samples = static_cast<int>(parse_int(toks[1], lineno, key));
        if (c.experiment.samples < 1) fail(lineno, "samples must be >= 1");
      } else if (key == "seed") {
        expect_one(toks, lineno);
        c.experiment.seed =
            static_cast<uint64_t>(parse_int(toks[1], lineno, key));
      } else if (key == "b_n") {
        expect_one(toks, lineno);
        c.experiment.b_n = static_cast<int>(parse_int(toks[1], lineno, key));
      } else if (key == "m_max") {
        expect_one(toks, lineno);
        c.experiment.m_max = static_cast<int>(parse_int(toks[1], lineno, key));
      } else {
        fail(lineno, "unknown key '" + key + "' in section experiment");
      }
    } else {  // output
      expect_one(toks, lineno);
      if (key == "dir") {
        c.output.dir = toks[1];
      } else if (key == "store") {
        c.output.store = toks[1];
      } else {
        fail(lineno, "unknown key '" + key + "' in section output");
      }
    }
  }
  if (!section.empty()) {
    fail(lineno, "unterminated section '" + section + "'");
  }
  return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config file not readable: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str());
}

}  // namespace rwcap
