#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "meanrisk/cli.hpp"
#include "meanrisk/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kDemo = MEANRISK_DEMO_DIR;

std::string demo(const std::string& name) { return kDemo + "/" + name; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "meanrisk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = meanrisk::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "meanrisk_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("eval") {
  const auto r = run({"eval", "--model", demo("linear_expectation.json"), "--measure", demo("base_uniform.json"),
                      "--x", "5"});
  REQUIRE(r.code == 0);
  const auto j = meanrisk::Json::parse(r.out);
  CHECK(j["index"] == 5);
  CHECK(j["x"][0] == 0.5);
  CHECK(j["Q"].get<double>() == doctest::Approx(0.25));

  const auto all = run({"eval", "--model", demo("linear_avar.json"), "--measure", demo("base_uniform.json"), "--all"});
  REQUIRE(all.code == 0);
  const auto ja = meanrisk::Json::parse(all.out);
  CHECK(ja["Q"].size() == 11);
  CHECK(ja["argmin"] == meanrisk::Json::parse("[5]"));
  CHECK(ja["phi"].get<double>() == doctest::Approx(0.45).epsilon(1e-9));
}

TEST_CASE("metrics prints a bare number") {
  const auto dir = scratch("metrics");
  write(dir / "a.json", R"({"dim": 1, "atoms": [{"point": [0], "weight": 1}]})");
  write(dir / "b.json", R"({"dim": 1, "atoms": [{"point": [5], "weight": 1}]})");
  const auto a = (dir / "a.json").string();
  const auto b = (dir / "b.json").string();
  CHECK(run({"metrics", "--measure", a, "--measure2", b, "--kind", "bl"}).out == "2\n");
  CHECK(run({"metrics", "--measure", a, "--measure2", b, "--kind", "wasserstein"}).out == "5\n");
  CHECK(run({"metrics", "--measure", a, "--measure2", b, "--kind", "fm", "--q", "2"}).out == "25\n");
  CHECK(run({"metrics", "--measure", a, "--measure2", b, "--kind", "psi", "--q", "2"}).out == "27\n");
  CHECK(run({"metrics", "--measure", a, "--measure2", b, "--kind", "tv"}).code == 2);
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"eval", "--model", demo("linear_expectation.json"), "--measure", demo("base_uniform.json")}).code == 2);
  CHECK(run({"eval", "--model", demo("linear_expectation.json"), "--measure", demo("base_uniform.json"), "--x",
             "11"})
            .code == 2);
  CHECK(run({"eval", "--model", "/nonexistent.json", "--measure", demo("base_uniform.json"), "--all"}).code == 2);
  const auto r = run({"eval", "--model", demo("base_uniform.json"), "--measure", demo("base_uniform.json"), "--all"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("model errors exit with 3") {
  const auto dir = scratch("model_error");
  write(dir / "neg.json", R"({"dim": 1, "atoms": [{"point": [-1], "weight": 1}]})");
  write(dir / "model.json", R"({"recourse": {"kind": "linear", "n": 1, "s": 1, "A": [[1]],
                                             "q": {"affine": {"c": [1]}}, "h": {"affine": {"z": [[1]]}}},
                                "risk": {"kind": "expectation"}, "decisions": {"points": [[0]]}})");
  const auto r = run({"eval", "--model", (dir / "model.json").string(), "--measure", (dir / "neg.json").string(),
                      "--all"});
  CHECK(r.code == 3);
  CHECK(r.err.find("RecourseInfeasible") != std::string::npos);
}

TEST_CASE("stability writes reports and enforces gates") {
  const auto dir = scratch("stability");
  const auto ok = run({"stability", "--model", demo("linear_expectation.json"), "--measure", demo("base_uniform.json"),
                       "--scheme", demo("scheme_contamination_zero.json"), "--out", (dir / "zero").string()});
  CHECK(ok.code == 0);
  for (const char* f : {"report.csv", "report.json", "report.svg"}) CHECK(fs::exists(dir / "zero" / f));
  CHECK(meanrisk::Json::parse(ok.out)["rows"] == 3);

  const auto esc = run({"stability", "--model", demo("linear_expectation.json"), "--measure",
                        demo("base_uniform.json"), "--scheme", demo("scheme_escape.json"), "--out",
                        (dir / "escape").string(), "--gate", "d_psi:2"});
  CHECK(esc.code == 4);
  const auto j = meanrisk::Json::parse(esc.out);
  CHECK(j["uniformly_integrating"] == false);
  CHECK(j["gates"][0]["pass"] == false);
  CHECK(esc.err.find("gate failed: d_psi") != std::string::npos);

  CHECK(run({"stability", "--model", demo("linear_expectation.json"), "--measure", demo("base_uniform.json"),
             "--scheme", demo("scheme_escape.json"), "--out", (dir / "bad").string(), "--gate", "nope:2"})
            .code == 2);
}

TEST_CASE("stability output is byte-identical across runs and thread counts") {
  const auto dir = scratch("determinism");
  const std::vector<std::string> common = {"stability", "--model",  demo("linear_avar.json"), "--measure",
                                           demo("base_uniform.json"), "--scheme", demo("scheme_saa.json")};
  auto with = [&](const std::string& out, const std::string& threads) {
    auto args = common;
    for (const auto& s : {std::string("--out"), out, std::string("--threads"), threads}) args.push_back(s);
    return run(args);
  };
  const auto a = with((dir / "a").string(), "1");
  const auto b = with((dir / "b").string(), "3");
  CHECK(a.code == b.code);
  for (const char* f : {"report.csv", "report.json", "report.svg"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(!slurp(dir / "a" / f).empty());
  }
  auto seeded = common;
  for (const auto& s : {std::string("--out"), (dir / "c").string(), std::string("--seed"), std::string("1")}) {
    seeded.push_back(s);
  }
  run(seeded);
  CHECK(slurp(dir / "a" / "report.csv") != slurp(dir / "c" / "report.csv"));
}

TEST_CASE("certify") {
  const auto r = run({"certify", "--model", demo("milp_simple.json"), "--measure", demo("base_uniform.json"),
                      "--samples", "200", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto j = meanrisk::Json::parse(r.out);
  CHECK(j["theoretical_exponent"] == 1.0);
  CHECK(j["decisions"].size() == 11);
  CHECK(j["decisions"][0]["eta_hat"].get<double>() <= 2.0);
  CHECK(run({"certify", "--model", demo("milp_simple.json"), "--measure", demo("base_uniform.json"), "--samples",
             "200", "--seed", "3"})
            .out == r.out);
}
