#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "qchaos/runner/experiments.hpp"

using namespace qchaos;
using namespace qchaos::runner;

namespace {

struct Proc {
  int code = -1;
  std::string output;
};

// Runs the CLI through the shell, stderr folded into the captured output.
Proc cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + QCHAOS_CLI_PATH + " " + args + " 2>&1";
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.output.append(buf, n);
  const int status = pclose(f);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qchaos_runner_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

RunOutput run_with(const std::string& name, std::map<std::string, Value> params, std::uint64_t seed = 1,
                   Format f = Format::CSV) {
  ExperimentConfig c;
  c.experiment = name;
  c.seed = seed;
  c.format = f;
  for (auto& [k, v] : params) c.params[k] = v;
  return run(c, "test");
}

std::vector<std::vector<std::string>> csv_rows(const std::string& data) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(data);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

// Small parameter sets that keep every experiment under a second.
std::map<std::string, std::map<std::string, Value>> quick_params() {
  using namespace std::string_literals;
  return {
      {"kho-classical", {{"steps", std::int64_t{5}}, {"orbits", std::int64_t{2}}}},
      {"kho-otoc", {{"t_max", std::int64_t{5}}}},
      {"kho-qfi", {{"t_max", std::int64_t{5}}}},
      {"kct-otoc", {{"t_max", std::int64_t{4}}}},
      {"kct-classical", {{"initial_conditions", std::int64_t{4}}, {"steps", std::int64_t{1000}}}},
      {"kct-rmt", {{"samples", std::int64_t{40}}}},
      {"rmt-check", {{"check", "coe"s}, {"samples", std::int64_t{100}}}},
      {"designs-delta", {{"N_B_max", std::int64_t{5}}, {"samples", std::int64_t{3}}, {"generator", "translation"s}}},
      {"designs-violation", {{"N", std::int64_t{5}}}},
      {"designs-moment", {{"samples", std::int64_t{100}}}},
      {"ising-deep", {{"N", std::int64_t{8}}, {"tau_max", 6.0}, {"dt", 0.25}, {"baseline_samples", std::int64_t{4}}}},
  };
}

}  // namespace

// ---------------------------------------------------------------- config format

TEST(Config, ParsesTypesSectionsAndComments) {
  const ExperimentConfig c = parse_config(
      "# header comment\n"
      "experiment: string = kho-otoc\n"
      "seed: int = 42\n"
      "format: string = json\n"
      "params.t_max: int = 7\n"
      "\n"
      "[params]\n"
      "R: double = 2\n"
      "K: double = 1e-1\n"
      "  M: int = 3  \n");
  EXPECT_EQ(c.experiment, "kho-otoc");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.format, Format::JSON);
  EXPECT_EQ(std::get<double>(c.params.at("R")), 2.0);
  EXPECT_EQ(std::get<double>(c.params.at("K")), 0.1);
  EXPECT_EQ(std::get<std::int64_t>(c.params.at("M")), 3);
  EXPECT_EQ(std::get<std::int64_t>(c.params.at("t_max")), 7);
  EXPECT_TRUE(std::get<bool>(parse_tree("x: bool = true").at("x")));
  EXPECT_EQ(std::get<std::string>(parse_tree("x: string = a b").at("x")), "a b");
}

TEST(Config, RejectsMalformedInputNamingTheKey) {
  const auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key;
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(key_of("bogus: int = 1"), "bogus");
  EXPECT_EQ(key_of("seed: double = 1.5"), "seed");
  EXPECT_EQ(key_of("seed: int = 1x"), "seed");
  EXPECT_EQ(key_of("[params]\nR: float = 1"), "params.R");
  EXPECT_EQ(key_of("[params]\nR: double = 1\nR: double = 2"), "params.R");
  EXPECT_EQ(key_of("flag: bool = yes"), "flag");
  EXPECT_EQ(key_of("format: string = xml"), "format");
  EXPECT_EQ(key_of("seed = 3"), "seed");
}

TEST(Config, SerializationRoundTripsAndHashes) {
  ExperimentConfig c;
  c.experiment = "designs-delta";
  c.seed = 123456789012345ULL;
  c.params["alpha"] = 0.1 + 0.2;
  c.params["basis"] = std::string("eig-tb");
  c.params["N_A"] = std::int64_t{3};
  c.params["flag"] = false;
  const ExperimentConfig back = parse_config(c.serialize());
  EXPECT_EQ(back.serialize(), c.serialize());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(std::get<double>(back.params.at("alpha")), 0.1 + 0.2);

  ExperimentConfig other = c;
  other.output_path = "/somewhere/else.csv";
  EXPECT_EQ(other.hash(), c.hash());
  other.seed += 1;
  EXPECT_NE(other.hash(), c.hash());
  other = c;
  other.params["alpha"] = 0.3;
  EXPECT_NE(other.hash(), c.hash());
  EXPECT_EQ(c.hash_hex().size(), 16u);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Params, DefaultsCoercionAndOverrides) {
  const Experiment& e = find_experiment("kho-otoc");
  ParamTree given;
  given["R"] = std::int64_t{2};
  const ParamTree r = resolve_params(e, given);
  EXPECT_EQ(std::get<double>(r.at("R")), 2.0);
  EXPECT_EQ(std::get<std::int64_t>(r.at("D")), 256);
  EXPECT_EQ(r.size(), e.params.size());
  given["D"] = 256.0;
  EXPECT_THROW(resolve_params(e, given), ConfigError);
  given.erase("D");
  given["nope"] = 1.0;
  EXPECT_THROW(resolve_params(e, given), ConfigError);

  const auto [k, v] = parse_override(e, "params.K=0.25");
  EXPECT_EQ(k, "K");
  EXPECT_EQ(std::get<double>(v), 0.25);
  EXPECT_EQ(std::get<std::int64_t>(parse_override(e, "t_max=9").second), 9);
  EXPECT_THROW(parse_override(e, "t_max=nine"), ConfigError);
  EXPECT_THROW(parse_override(e, "K"), ConfigError);
  EXPECT_THROW(find_experiment("no-such"), ConfigError);
}

// ---------------------------------------------------------------- tables

TEST(Table, CsvDialectAndDataSection) {
  ResultTable t{{"name", "n", "x"}, {}};
  t.add({std::string("plain"), std::int64_t{-3}, 0.1});
  t.add({std::string("has,comma \"q\""), std::int64_t{0}, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(t.add({std::int64_t{1}}), DimensionError);
  const std::string data = csv_data(t);
  EXPECT_EQ(data, "name,n,x\nplain,-3,0.10000000000000001\n\"has,comma \"\"q\"\"\",0,nan\n");
  Metadata m;
  m.version = "v";
  m.config = "seed: int = 1\n";
  const std::string csv = render(t, m, Format::CSV);
  EXPECT_EQ(data_section(csv), data);
  EXPECT_EQ(embedded_config(csv), m.config);
  const std::string json = render(t, m, Format::JSON);
  const auto j = nlohmann::json::parse(json);
  EXPECT_TRUE(j["data"]["rows"][1][2].is_null());
  EXPECT_EQ(j["data"]["rows"][0][2].get<double>(), 0.1);
  EXPECT_EQ(embedded_config(json), m.config);
  EXPECT_EQ(t.column("x"), 2u);
}

// ---------------------------------------------------------------- runs

TEST(Run, KhoOtocMatchesClosedForm) {
  const RunOutput out = run_with("kho-otoc", {{"R", 2.0}, {"K", 0.1}, {"t_max", std::int64_t{50}}});
  const auto& t = out.table;
  ASSERT_EQ(t.rows.size(), 51u);
  for (const auto& r : t.rows) {
    const int tt = static_cast<int>(std::get<std::int64_t>(r[0]));
    const double oracle = r2_vacuum_otoc(0.1, 1.0, 1.0, tt);
    EXPECT_DOUBLE_EQ(std::get<double>(r[2]), oracle);
    EXPECT_NEAR(std::get<double>(r[1]), oracle, 1e-4 * oracle) << "t=" << tt;
  }
}

TEST(Run, EveryExperimentCarriesHashAndConfig) {
  const auto quick = quick_params();
  for (const auto& e : catalog()) {
    ASSERT_TRUE(quick.count(e.name)) << e.name;
    for (Format f : {Format::CSV, Format::JSON}) {
      const RunOutput out = run_with(e.name, quick.at(e.name), 5, f);
      EXPECT_FALSE(out.table.rows.empty()) << e.name;
      EXPECT_NE(out.rendered.find(out.meta.config_hash), std::string::npos) << e.name;
      const ExperimentConfig back = parse_config(embedded_config(out.rendered));
      EXPECT_EQ(back.hash_hex(), out.meta.config_hash) << e.name;
      EXPECT_EQ(back.experiment, e.name);
    }
  }
}

TEST(Run, SameSeedSameDataAcrossWorkerCounts) {
  const auto quick = quick_params();
  for (const std::string name : {"designs-delta", "kct-rmt", "rmt-check", "kct-classical", "ising-deep"}) {
    std::vector<std::string> data;
    for (const char* w : {"1", "3", "1"}) {
      setenv("QCHAOS_WORKERS", w, 1);
      data.push_back(data_section(run_with(name, quick.at(name), 11).rendered));
    }
    unsetenv("QCHAOS_WORKERS");
    EXPECT_EQ(data[0], data[1]) << name;
    EXPECT_EQ(data[0], data[2]) << name;
    EXPECT_NE(data[0], data_section(run_with(name, quick.at(name), 12).rendered)) << name;
  }
}

// ---------------------------------------------------------------- catalog

TEST(Catalog, CoversSubcommandsAndCriteria) {
  std::set<std::string> names;
  std::set<int> criteria;
  for (const auto& e : catalog()) {
    EXPECT_TRUE(names.insert(e.name).second) << "duplicate " << e.name;
    EXPECT_FALSE(e.description.empty());
    EXPECT_FALSE(e.anchors.empty());
    criteria.insert(e.criteria.begin(), e.criteria.end());
    std::set<std::string> pnames;
    for (const auto& p : e.params) EXPECT_TRUE(pnames.insert(p.name).second) << e.name << "." << p.name;
  }
  for (const char* s : {"kho-classical", "kho-otoc", "kho-qfi", "kct-otoc", "kct-rmt", "designs-delta",
                        "designs-violation", "ising-deep", "rmt-check"})
    EXPECT_TRUE(names.count(s)) << s;
  for (int c = 1; c <= 13; ++c) EXPECT_TRUE(criteria.count(c)) << "criterion " << c;
}

TEST(Catalog, AnchorsResolveToHeaderFunctions) {
  const std::filesystem::path inc = std::filesystem::path(QCHAOS_SOURCE_DIR) / "include" / "qchaos";
  for (const auto& e : catalog())
    for (const auto& a : e.anchors) {
      const auto sep = a.find("::");
      ASSERT_NE(sep, std::string::npos) << a;
      const auto header = inc / (a.substr(0, sep) + ".hpp");
      ASSERT_TRUE(std::filesystem::exists(header)) << a;
      const std::regex def("inline[^;{]*\\b" + a.substr(sep + 2) + "\\(");
      EXPECT_TRUE(std::regex_search(read_file(header), def)) << a;
    }
}

// ---------------------------------------------------------------- command line

TEST(Cli, WritesFileAndMatchesOracle) {
  const auto out = scratch("otoc.csv");
  std::filesystem::remove(out);
  const Proc p = cli("kho-otoc --set R=2 --set K=0.1 --set t_max=20 --seed 9 --out " + out.string());
  ASSERT_EQ(p.code, 0) << p.output;
  const std::string text = read_file(out);
  EXPECT_NE(text.find("# config_hash: "), std::string::npos);
  EXPECT_NE(text.find("# seed: 9"), std::string::npos);
  EXPECT_NE(text.find("# qchaos " QCHAOS_VERSION), std::string::npos);
  EXPECT_NE(text.find("# wall_time_s: "), std::string::npos);
  const auto rows = csv_rows(text);
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "otoc", "oracle"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double num = std::stod(rows[i][1]), oracle = r2_vacuum_otoc(0.1, 1.0, 1.0, static_cast<int>(i - 1));
    EXPECT_NEAR(num, oracle, 1e-4 * oracle);
  }
}

TEST(Cli, DeterministicAcrossRunsAndWorkers) {
  const std::string args = "designs-delta --set N_B_max=6 --set samples=4 --seed 77";
  const Proc a = cli(args, "QCHAOS_WORKERS=1"), b = cli(args, "QCHAOS_WORKERS=3"), c = cli(args, "QCHAOS_WORKERS=1");
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_EQ(data_section(a.output), data_section(b.output));
  EXPECT_EQ(data_section(a.output), data_section(c.output));
  const Proc j1 = cli(args + " --format json", "QCHAOS_WORKERS=1"), j2 = cli(args + " --format json", "QCHAOS_WORKERS=2");
  ASSERT_EQ(j1.code, 0) << j1.output;
  EXPECT_EQ(data_section(j1.output), data_section(j2.output));
}

TEST(Cli, ConfigFileRoundTrip) {
  const auto cfg = scratch("run.cfg");
  {
    std::ofstream f(cfg);
    f << "# sweep point\nexperiment: string = designs-violation\nseed: int = 4\n[params]\nN: int = 6\nbasis: string = sigma-x\n";
  }
  const Proc first = cli("run --config " + cfg.string());
  ASSERT_EQ(first.code, 0) << first.output;
  const auto echoed = scratch("echo.cfg");
  {
    std::ofstream f(echoed);
    f << embedded_config(first.output);
  }
  const Proc second = cli("run --config " + echoed.string());
  ASSERT_EQ(second.code, 0) << second.output;
  EXPECT_EQ(data_section(first.output), data_section(second.output));
  const std::regex hash("# config_hash: ([0-9a-f]{16})");
  std::smatch m1, m2;
  ASSERT_TRUE(std::regex_search(first.output, m1, hash));
  ASSERT_TRUE(std::regex_search(second.output, m2, hash));
  EXPECT_EQ(m1[1], m2[1]);
  // Flags override file keys.
  const Proc over = cli("designs-violation --config " + cfg.string() + " --set N=5");
  ASSERT_EQ(over.code, 0) << over.output;
  EXPECT_EQ(csv_rows(over.output).size(), 6u);
  EXPECT_NE(over.output.find("params.N: int = 5"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwoNamingTheKey) {
  Proc p = cli("kho-otoc --set bogus=1");
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.output.find("params.bogus"), std::string::npos) << p.output;
  p = cli("kho-otoc --set t_max=ten");
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.output.find("params.t_max"), std::string::npos) << p.output;
  p = cli("kho-otoc --format xml");
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.output.find("format"), std::string::npos) << p.output;
  const auto cfg = scratch("bad.cfg");
  {
    std::ofstream f(cfg);
    f << "experiment: string = kho-otoc\nspeed: int = 3\n";
  }
  p = cli("run --config " + cfg.string());
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.output.find("speed"), std::string::npos) << p.output;
  p = cli("kct-otoc --config " + cfg.string());
  EXPECT_EQ(p.code, 2);
  p = cli("no-such-experiment");
  EXPECT_EQ(p.code, 2);
}

TEST(Cli, RuntimeGuardsExitThreeWithModuleContext) {
  const Proc p = cli("ising-deep --set N=15");
  EXPECT_EQ(p.code, 3);
  EXPECT_NE(p.output.find("ising-deep"), std::string::npos) << p.output;
  EXPECT_NE(p.output.find("N must be"), std::string::npos) << p.output;
  const Proc leak = cli("kho-otoc --set D=16 --set K=5 --set t_max=40 --set R=3.3");
  EXPECT_EQ(leak.code, 3) << leak.output;
  EXPECT_NE(leak.output.find("increase D"), std::string::npos) << leak.output;
}

TEST(Cli, ListPrintsCatalog) {
  const Proc p = cli("list");
  ASSERT_EQ(p.code, 0);
  for (const auto& e : catalog()) EXPECT_NE(p.output.find(e.name + "\n"), std::string::npos) << e.name;
  EXPECT_NE(p.output.find("anchors:"), std::string::npos);
}
