#include "iashock/cli.hpp"
#include "iashock/config.hpp"
#include "iashock/error.hpp"
#include "iashock/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iashock;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int         code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args)
{
  std::ostringstream o, e;
  Run r;
  r.code = cli::dispatch(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

fs::path scratch(const std::string &name)
{
  fs::path const p = fs::temp_directory_path() / ("iashock_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_SUITE("cli")
{
  TEST_CASE("config parsing")
  {
    Config c;
    c.declare("t_end", "10", "");
    c.declare("eps-list", "0.1,0.2", "");
    c.declare("modified", "false", "");
    c.declare("name", "x", "");
    c.parse_string("# comment\n t-end = 25   # trailing\n\nmodified = yes\nname = \"two words\"\n");
    CHECK(c.num("t_end") == 25.0);
    CHECK(c.was_set("t-end"));
    CHECK_FALSE(c.was_set("eps_list"));
    CHECK(c.flag("modified"));
    CHECK(c.str("name") == "two words");
    CHECK(c.list("eps-list") == std::vector<double>{0.1, 0.2});
    CHECK(c.dump().find("t-end = 25\n") != std::string::npos);

    auto kind = [&](const std::string &text) {
      try {
        c.parse_string(text);
      }
      catch (const SolverError &e) {
        return e.kind();
      }
      return ErrorKind::InvalidArgument;
    };
    CHECK(kind("unknown = 1") == ErrorKind::ConfigError);
    CHECK(kind("no equals sign") == ErrorKind::ConfigError);
    c.set("t-end", "abc");
    CHECK_THROWS_AS(c.num("t-end"), SolverError);
    c.set("t-end", "2.5");
    CHECK_THROWS_AS(c.integer("t-end"), SolverError);
  }

  TEST_CASE("csv round trip keeps header values and exact numbers")
  {
    fs::path const dir = scratch("csv");
    Vec const a = Vec::LinSpaced(5, -1.0, 1.0) / 3.0;
    io::write_csv((dir / "a.csv").string(), {{"x", a}, {"y", a.array().square().matrix()}}, "T = 1\ns = 0.5\n");
    io::CsvTable const t = io::read_csv((dir / "a.csv").string());
    CHECK(t.names == std::vector<std::string>{"x", "y"});
    CHECK(t.column("x") == a);
    CHECK(t.meta.at("T") == "1");
    CHECK(t.meta.at("s") == "0.5");
    CHECK_THROWS_AS(t.column("z"), SolverError);
  }

  TEST_CASE("rh subcommand")
  {
    Run const r = run({"rh", "--T", "0", "--eps", "0.1"});
    CHECK(r.code == cli::ok);
    CHECK(r.out.find("s = 0.9\n") != std::string::npos);
    CHECK(r.out.find("n+ = 0.81\n") != std::string::npos);

    Run const j = run({"rh", "--eps", "0.1", "--json"});
    CHECK(j.code == cli::ok);
    auto const doc = nlohmann::json::parse(j.out);
    CHECK(doc["s"].get<double>() == doctest::Approx(0.9));
    CHECK(doc["config"]["eps"] == "0.1");
  }

  TEST_CASE("usage errors")
  {
    Run const r = run({"rh", "--bogus", "1"});
    CHECK(r.code == cli::usage_error);
    CHECK(r.err.find("\"error\":\"UsageError\"") != std::string::npos);
    CHECK(run({}).code == cli::usage_error);
    CHECK(run({"nonsense"}).code == cli::usage_error);
    CHECK(run({"rh", "--eps", "abc"}).code == cli::usage_error);
    CHECK(run({"--help"}).code == cli::ok);
    CHECK(run({"profile", "--help"}).out.find("--nodes") != std::string::npos);
  }

  TEST_CASE("scaled and physical parameters must agree")
  {
    fs::path const dir = scratch("scaled");
    Run const bad = run({"profile", "--eps", "0.02", "--mu", "0.5", "--mu-bar", "50", "--out", (dir / "p.csv").string()});
    CHECK(bad.code == cli::usage_error);
    CHECK(bad.err.find("ConfigError") != std::string::npos);
    Run const good =
      run({"profile", "--eps", "0.02", "--mu", "1", "--mu-bar", "50", "--out", (dir / "p.csv").string()});
    CHECK(good.code == cli::ok);
  }

  TEST_CASE("solver failures exit with 1")
  {
    fs::path const dir = scratch("fail");
    Run const r = run({"kdvb", "--delta", "0.01", "--L", "2", "--out", (dir / "k.csv").string()});
    CHECK(r.code == cli::solver_failed);
    auto const rec = nlohmann::json::parse(r.err);
    CHECK(rec["subcommand"] == "kdvb");
    CHECK(rec.contains("message"));
  }

  TEST_CASE("profile output is deterministic and carries the configuration")
  {
    fs::path const dir = scratch("profile");
    std::vector<std::string> const args{"profile", "--eps", "0.02", "--nodes", "2001", "--out",
                                        (dir / "a.csv").string()};
    REQUIRE(run(args).code == cli::ok);
    std::string const first = slurp(dir / "a.csv"), side = slurp(dir / "a.json");
    REQUIRE(run(args).code == cli::ok);
    CHECK(slurp(dir / "a.csv") == first);
    CHECK(slurp(dir / "a.json") == side);
    CHECK(first.rfind("# L = 0\n", 0) == 0);
    CHECK(first.find("# nodes = 2001\n") != std::string::npos);
    auto const doc = nlohmann::json::parse(side);
    CHECK(doc["monotone"]["n"].get<bool>());
    CHECK(doc["config"]["nodes"] == "2001");
  }

  TEST_CASE("default output root comes from the environment")
  {
    fs::path const dir = scratch("env");
    setenv("IASHOCK_OUT", dir.string().c_str(), 1);
    Run const r = run({"kdvb", "--delta", "0.01", "--nodes", "801"});
    unsetenv("IASHOCK_OUT");
    CHECK(r.code == cli::ok);
    CHECK(fs::exists(dir / "kdvb.csv"));
    CHECK(fs::exists(dir / "kdvb.json"));
  }

  TEST_CASE("evolve from a config file and diagnose a snapshot")
  {
    fs::path const dir = scratch("evolve");
    std::ofstream(dir / "run.cfg") << "t_end = 20\nsample_every = 5\nsnapshot_every = 10\ny_max = 300\ny_min = -300\n";
    Run const r = run({"evolve", "--config", (dir / "run.cfg").string(), "--profile-nodes", "4001", "--out",
                       (dir / "traj").string()});
    REQUIRE(r.code == cli::ok);
    for (auto f : {"profile.csv", "diagnostics.csv", "summary.json", "snapshot_00000.csv", "snapshot_00001.csv",
                   "snapshot_00002.csv"}) {
      CHECK(fs::exists(dir / "traj" / f));
    }
    io::CsvTable const diag = io::read_csv((dir / "traj" / "diagnostics.csv").string());
    CHECK(diag.column("t").size() == 5);
    CHECK(diag.meta.at("t-end") == "20");
    CHECK(diag.meta.at("profile-nodes") == "4001");

    Run const d = run({"diagnose", "--state", (dir / "traj" / "snapshot_00002.csv").string(), "--profile",
                       (dir / "traj" / "profile.csv").string()});
    REQUIRE(d.code == cli::ok);
    auto const doc = nlohmann::json::parse(d.out);
    CHECK(doc["t"].get<double>() == doctest::Approx(20.0));
    CHECK(doc["E"].get<double>() == doctest::Approx(diag.column("E")[4]).epsilon(1e-12));
    CHECK(doc["D"].get<double>() == doctest::Approx(diag.column("D")[4]).epsilon(1e-12));
  }

  TEST_CASE("sweep gives each run its own directory")
  {
    fs::path const dir = scratch("sweep");
    std::ofstream(dir / "base.cfg") << "t_end = 10\nsample_every = 5\ny_max = 300\ny_min = -300\nprofile_nodes = 4001\n";
    Run const r = run({"sweep", "--run-config", (dir / "base.cfg").string(), "--param", "E0", "--values", "1e-4,1e-3",
                       "--jobs", "2", "--out", (dir / "out").string()});
    REQUIRE(r.code == cli::ok);
    CHECK(fs::exists(dir / "out" / "run_0" / "summary.json"));
    CHECK(fs::exists(dir / "out" / "run_1" / "summary.json"));
    auto const doc = nlohmann::json::parse(slurp(dir / "out" / "sweep.json"));
    CHECK(doc["runs"].size() == 2);
    CHECK(doc["runs"][1]["E0"].get<double>() == doctest::Approx(1e-3).epsilon(1e-10));
    CHECK(run({"sweep", "--param", "nope", "--out", (dir / "x").string()}).code == cli::usage_error);
  }
}
