#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ipfasst/config.hpp"
#include "ipfasst/error.hpp"
#include "ipfasst/experiments.hpp"
#include "ipfasst/heat.hpp"

using namespace ipfasst;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& overrides,
                     const std::string& experiment = "") {
  try {
    parse_config(text, overrides, experiment);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("empty config with an experiment gives the defaults") {
  const ExperimentConfig cfg = parse_config("", {}, "weak-scaling");
  CHECK(cfg.experiment == "weak-scaling");
  CHECK(cfg.variant == Variant::IPFASST);
  CHECK(cfg.levels == 3);
  CHECK(cfg.nodes == std::vector<int>{2, 2, 1});
  CHECK(cfg.sizes == std::vector<int>{32, 64, 128});
  CHECK(cfg.tol == doctest::Approx(1e-9));
}

TEST_CASE("overrides beat the file, the subcommand beats both") {
  const std::string text = "experiment = damping\n# comment\n\nnx=64\nomega=1/2\n";
  ExperimentConfig cfg = parse_config(text, {"nx=32"});
  CHECK(cfg.experiment == "damping");
  CHECK(cfg.nx == 32);
  CHECK(cfg.omega == 0.5);

  cfg = parse_config(text, {"experiment=order-study"}, "vcycle-study");
  CHECK(cfg.experiment == "vcycle-study");
  CHECK(cfg.nx == 64);  // file wins over the preset
  CHECK(cfg.ranks == 128);
}

TEST_CASE("variant and level count must agree") {
  const std::string err = error_of("", {"variant=IPFASST", "levels=1"}, "weak-scaling");
  CHECK(contains(err, "levels"));
  CHECK(!error_of("", {"variant=SDC", "levels=2", "nodes=2,1", "stencil=2,2"}, "weak-scaling").empty());
}

TEST_CASE("unknown and missing keys are listed together") {
  const std::string unknown = error_of("nx=16\nfoo=1\nbar=2\n", {}, "damping");
  CHECK(contains(unknown, "foo"));
  CHECK(contains(unknown, "bar"));

  const std::string missing = error_of("", {}, "single-run");
  CHECK(contains(missing, "variant"));
  CHECK(contains(missing, "nx"));
  CHECK(contains(missing, "nt"));

  CHECK(contains(error_of("", {}), "experiment"));
}

TEST_CASE("malformed values name the field") {
  CHECK(contains(error_of("", {"nx=abc"}, "damping"), "field 'nx'"));
  CHECK(contains(error_of("", {"smoother=sor"}, "damping"), "field 'smoother'"));
  CHECK_THROWS_AS(load_config("/nonexistent/dir/cfg.txt", {}, "damping"), IoError);
}

TEST_CASE("single-run with one step of one node is backward Euler") {
  const ExperimentConfig cfg = parse_config(
      "", {"variant=SDC", "levels=1", "nodes=1", "stencil=2", "nx=16", "nt=1", "smoother=gauss-seidel",
           "mg_tol=1e-14", "tol=1e-12"},
      "single-run");
  const Table t = single_run(cfg);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.all_ok());

  // sine mode: one BE step scales the amplitude by 1/(1 - dt*nu*d)
  const double d = discrete_symbol(Grid(1, 16), 1);
  const double be = 1.0 / (1.0 - d);
  CHECK(t.num(0, "ode_error") == doctest::Approx(std::abs(be - std::exp(d))).epsilon(1e-9));
  CHECK(t.num(0, "pde_error") == doctest::Approx(std::abs(be - std::exp(-M_PI * M_PI))).epsilon(1e-9));
}

TEST_CASE("csv has header, rows and config footer, and is deterministic") {
  const ExperimentConfig cfg = parse_config("", {"damping_points=5", "damping_nodes=2"}, "damping");
  std::ostringstream a, b;
  write_csv(a, run_experiment(cfg), cfg);
  write_csv(b, run_experiment(cfg), cfg);
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 7);
  CHECK(lines.front() == "nodes,z,rho,status");
  CHECK(lines.back().rfind("# config experiment=damping ", 0) == 0);
  CHECK(contains(lines.back(), "damping_points=5"));
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) CHECK(contains(lines[i], ",ok"));
}
