#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semiwave/config.hpp"
#include "semiwave/errors.hpp"
#include "semiwave/io.hpp"

using namespace semiwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semiwave_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(SEMIWAVE_CLI) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults round-trip through text") {
  const Config a;
  const Config b = Config::from_string(a.serialize());
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(Config::from_string(Config::defaults_text()) == a);
  CHECK(a.number("energy.E0") == 0.5);
  CHECK(a.numbers("energy.h_list") == std::vector<double>{0.04, 0.02, 0.01});
  CHECK(a.flag("wkb.through_caustics"));
}

TEST_CASE("overrides and partial files") {
  Config c = Config::from_string("[energy]\nE0 = 0.75\n");
  CHECK(c.number("energy.E0") == 0.75);
  CHECK(c.get("potential.family") == "zero");
  const std::string before = c.hash();
  c.set("energy.h_list=0.05, 0.025");
  CHECK(c.numbers("energy.h_list") == std::vector<double>{0.05, 0.025});
  CHECK(c.hash() != before);
  const std::string h = c.hash();
  c.set("run.threads=7");
  c.set("run.output_dir=/elsewhere");
  CHECK(c.hash() == h);
  c.set("run.id", "x");
  CHECK(c.get("run.id") == "x");
}

TEST_CASE("bad keys and values") {
  CHECK(error_of([] { Config::from_string("[energy]\nE0 = 1\nE2 = 3\n[nope]\na = 1\n"); }) ==
        "unknown config keys: energy.E2, nope.a");
  CHECK(error_of([] { Config().set("solve.eps"); }).find("key=value") != std::string::npos);
  CHECK(error_of([] { Config().set("energy.E9=1"); }) == "unknown config keys: energy.E9");
  Config c;
  c.set("energy.E0=abc");
  CHECK_THROWS_AS(c.number("energy.E0"), ConfigError);
  c.set("run.threads=1.5");
  CHECK_THROWS_AS(c.integer("run.threads"), ConfigError);
  c.set("wkb.through_caustics=maybe");
  CHECK_THROWS_AS(c.flag("wkb.through_caustics"), ConfigError);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/semiwave.ini"), ConfigError);
}

TEST_CASE("energy validation names the hypothesis") {
  Config c;
  c.set("energy.E1_im=-0.5");
  CHECK(error_of([&] { energy_from(c, potential_from(c)); }).find("H6") != std::string::npos);
  c.set("energy.E1_im=1");
  c.set("potential.family=gaussian-bump");
  c.set("potential.params=2 1 0");
  CHECK(error_of([&] { energy_from(c, potential_from(c)); }).find("H3") != std::string::npos);
  c.set("potential.family=zero");
  c.set("energy.h_list=0.01 0.02");
  CHECK_THROWS_AS(energy_from(c, potential_from(c)), ConfigError);
}

TEST_CASE("builders") {
  Config c;
  c.set("potential.family=barrier-1d");
  const PotentialSpec pot = potential_from(c);
  CHECK(pot.value(vec1(2.0)) == doctest::Approx(1.0));
  const EnergySpec e = energy_from(c, pot);
  CHECK(e.E1 == Complex(0.0, 1.0));
  const SourceProfile s = source_from(c, 1);
  CHECK(std::abs(s.hat(0.0)) == doctest::Approx(1.0));
  CHECK(source_base(c, 1)(0) == 0.0);
  CHECK(source_base(c, 2) == vec2(0, 0));
  c.set("source.base=0 0 0");
  CHECK_THROWS_AS(source_base(c, 2), ConfigError);
  c.set("source.base=0");

  const Observable q = observable_from(c, "observable", 1, pot, e.E0);
  CHECK(q(vec1(1.5), vec1(1.0)) == doctest::Approx(1.0));
  c.set("observable.kind=weighted");
  const Observable w = observable_from(c, "observable", 1, pot, e.E0);
  CHECK(w(vec1(1.5), vec1(1.2)) == doctest::Approx(q(vec1(1.5), vec1(1.2)) * std::pow(0.72 + pot.value(vec1(1.5)) - 0.5, 2)));
  c.set("observable.kind=ring");
  CHECK_THROWS_AS(observable_from(c, "observable", 1, pot, e.E0), ConfigError);
  c.set("observable.kind=bump");
  c.set("observable.x_half=0");
  CHECK_THROWS_AS(observable_from(c, "observable", 1, pot, e.E0), ConfigError);

  const Observable cq = observable_from(c, "counterexample", 1, pot, e.E0);
  CHECK(cq.box().xi_hi(0) <= 0.0);

  c.set("rays.n_dirs=1");
  CHECK_THROWS_AS(rays_from(c), ConfigError);
  c.set("grid.half_width=-1");
  CHECK_THROWS_AS(grid_from(c), ConfigError);
  c.set("wigner.max_lags=4");
  CHECK_THROWS_AS(wigner_from(c), ConfigError);
  c.set("potential.family=tabulated");
  CHECK_THROWS_AS(potential_from(c), ConfigError);
}

TEST_CASE("json lines and csv") {
  const fs::path dir = scratch("io");
  {
    JsonlWriter w(dir / "sub" / "log.jsonl");
    w.append(json{{"b", 1}, {"a", 0.1}});
    w.append(json{{"c", "x"}});
  }
  const auto recs = read_jsonl(dir / "sub" / "log.jsonl");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].begin().key() == "b");
  CHECK(recs[0]["a"].get<double>() == 0.1);
  CHECK(read_jsonl(dir / "missing.jsonl").empty());

  {
    CsvWriter csv(dir / "t.csv", {"h", "value"});
    csv.row(std::vector<double>{0.1, 1.0 / 3.0});
    CHECK_THROWS_AS(csv.row(std::vector<double>{1.0}), Error);
  }
  CHECK(slurp(dir / "t.csv") == "h,value\n0.10000000000000001,0.33333333333333331\n");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("command line: hypothesis report") {
  const fs::path dir = scratch("cli_hyp");
  CHECK(run_cli("--out " + dir.string() + " check-hyp", dir / "stdout.txt") == 0);
  const auto recs = read_jsonl(dir / "default" / "run_log.jsonl");
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r["status"] == "ok");
    CHECK(r["result"]["verdict"] == "holds");
  }
  CHECK(fs::exists(dir / "default" / "config.ini"));
  CHECK(Config::from_file((dir / "default" / "config.ini").string()).hash() == recs[0]["config_hash"]);
}

TEST_CASE("command line: configuration errors") {
  const fs::path dir = scratch("cli_bad");
  CHECK(run_cli("--out " + dir.string() + " --set foo.bar=1 check-hyp", dir / "o.txt") == 2);
  CHECK(slurp(dir / "o.txt").find("unknown config keys: foo.bar") != std::string::npos);
  CHECK(run_cli("--out " + dir.string() + " --set energy.E1_im=-1 ray-measure", dir / "o2.txt") == 2);
  const auto recs = read_jsonl(dir / "default" / "run_log.jsonl");
  REQUIRE_FALSE(recs.empty());
  CHECK(recs.back()["status"] == "config-error");
}

TEST_CASE("command line: empty report") {
  const fs::path dir = scratch("cli_empty");
  CHECK(run_cli("report --dir " + dir.string(), dir / ".." / "semiwave_test_cli_empty.txt") == 0);
  CHECK(slurp(dir / ".." / "semiwave_test_cli_empty.txt").find("empty table") != std::string::npos);
}

TEST_CASE("command line: identical runs give identical logs") {
  const fs::path a = scratch("cli_a"), b = scratch("cli_b");
  const std::string args = " --set energy.h_list=0.04 --threads 3 ray-measure";
  CHECK(run_cli("--out " + a.string() + args, a / "o.txt") == 0);
  CHECK(run_cli("--out " + b.string() + " --set energy.h_list=0.04 --threads 1 ray-measure", b / "o.txt") == 0);
  const std::string la = slurp(a / "default" / "run_log.jsonl");
  CHECK_FALSE(la.empty());
  CHECK(la == slurp(b / "default" / "run_log.jsonl"));
  CHECK(fnv1a(la) == fnv1a(slurp(b / "default" / "run_log.jsonl")));
}

TEST_CASE("command line: defaults are printable and loadable") {
  const fs::path dir = scratch("cli_defaults");
  CHECK(run_cli("--print-defaults", dir / "d.ini") == 0);
  CHECK(Config::from_file((dir / "d.ini").string()) == Config());
}
