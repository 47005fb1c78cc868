#include <stdexcept>
#include <string>

#include "doctest.h"
#include "rwcap/config.hpp"

using namespace rwcap;

namespace {
bool fails_mentioning(const std::string& text, const std::string& needle) {
  try {
    RunConfig::parse_text(text);
    return false;
  } catch (const std::runtime_error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
}
}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults serialize and parse back to themselves") {
  RunConfig def;
  RunConfig round = RunConfig::parse_text(def.serialize());
  CHECK(round == def);
}

TEST_CASE("non-default values survive the round trip") {
  RunConfig c;
  c.green.quad_tol = 2.5e-7;
  c.green.series_cutoff = 12345;
  c.green.cache_path = "cache/green.bin";
  c.gn.fine_grid = 777;
  c.gn.tol = 3e-9;
  c.experiment.n_list = {1, 2, 512};
  c.experiment.lambda_grid = {0.0, 1.25};
  c.experiment.seed = 987654321;
  c.output.dir = "elsewhere";
  RunConfig round = RunConfig::parse_text(c.serialize());
  CHECK(round == c);
}

TEST_CASE("comments and blank lines are ignored") {
  RunConfig c = RunConfig::parse_text(
      "# leading comment\n\n"
      "experiment {\n"
      "  samples 9   # trailing comment\n"
      "}\n");
  CHECK(c.experiment.samples == 9);
  CHECK(c.experiment.seed == RunConfig{}.experiment.seed);
}

TEST_CASE("errors carry line numbers and field names") {
  CHECK(fails_mentioning("experiment {\n  samples zero\n}\n", "line 2"));
  CHECK(fails_mentioning("experiment {\n  samples zero\n}\n", "samples"));
  CHECK(fails_mentioning("gn {\n  tol not-a-number\n}\n", "tol"));
  CHECK(fails_mentioning("typo {\n}\n", "unknown section"));
  CHECK(fails_mentioning("gn {\n  wibble 3\n}\n", "unknown key"));
  CHECK(fails_mentioning("samples 3\n", "outside a section"));
  CHECK(fails_mentioning("gn {\n  tol 1e-9\n", "unterminated"));
  CHECK(fails_mentioning("experiment {\n  samples 0\n}\n", "samples"));
  CHECK(fails_mentioning("green {\n  quad_tol -1e-8\n}\n", "quad_tol"));
  CHECK(fails_mentioning("experiment {\n  n_list\n}\n", "n_list"));
  CHECK(fails_mentioning("gn {\n  gn {\n}\n}\n", "nested"));
}

TEST_CASE("file parsing reports unreadable paths") {
  CHECK_THROWS_AS(RunConfig::parse_file("/no/such/config.txt"),
                  std::runtime_error);
}

}  // TEST_SUITE
