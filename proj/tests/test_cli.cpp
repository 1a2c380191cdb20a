#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lelong/cli.hpp"

using namespace lelong;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
  int code = 0;
  std::string out;
  std::string err;
};

RunOutput run(std::vector<std::string> args) {
  args.insert(args.begin(), "lelong");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("lelong_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

// small grids so that each pipeline runs in about a second
const char* kSmallConfig = R"({
  "singularity": {"lambda": [0, 1]},
  "grids": {"r": [0.5, 0.25, 0.125], "s": [1, 4, 16], "y": [-10, 0, 10]},
  "tolerance": {"rel": 1e-6, "abs": 1e-12},
  "seed": 7,
  "regimes": {"samples": 500},
  "recurrence": {"horizon": 6, "n_t": 64, "n_theta": 256, "replicas": 2}
})";

}  // namespace

TEST_F(CliTest, OraclePrintsClosedFormValue) {
  const auto r = run({"oracle", "--s0", "1", "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("computed 0.75"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("expected 0.75"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(dir_ / "o" / "oracle.csv").substr(0, 45), "s0,computed,expected,abs_error,error_estimate");
}

TEST_F(CliTest, ZeroProfileGivesAllZeroMassProfile) {
  const auto cfg = write_config("zero.json", R"({"current": {"atoms": [{"profile": {"kind": "zero"}}]},
                                               "grids": {"r": [0.5, 0.25, 0.125, 0.0625]}})");
  const auto r = run({"profile", "--config", cfg.string(), "--out", (dir_ / "z").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "z" / "mass_profile.csv"),
            "r,F,G,F_err,G_err,monotone_violation\n"
            "0.5,0,0,0,0,0\n0.25,0,0,0,0,0\n0.125,0,0,0,0,0\n0.0625,0,0,0,0,0\n");
}

TEST_F(CliTest, KernelBoundWithRefinementReportsDrift) {
  const auto cfg = write_config("c.json", kSmallConfig);
  const auto r = run({"kernel-bound", "--gamma-from-lambda", "i", "--refine", "--config", cfg.string(), "--out",
                      (dir_ / "k").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kernel = slurp(dir_ / "k" / "kernel.csv");
  EXPECT_EQ(kernel.substr(0, kernel.find('\n')), "s,y,K,K_err,bound_ratio");
  const auto summary = slurp(dir_ / "k" / "kernel_summary.csv");
  EXPECT_NE(summary.substr(0, summary.find('\n')).find("refinement_drift"), std::string::npos);
  // 3 x 3 base cells plus the refined 5 x 5 grid minus the base cells
  EXPECT_EQ(std::count(kernel.begin(), kernel.end(), '\n'), 1 + 25);
}

TEST_F(CliTest, SameConfigAndSeedGiveByteIdenticalCsv) {
  const auto cfg = write_config("c.json", kSmallConfig);
  for (const char* cmd : {"regimes", "recurrence", "profile"}) {
    ASSERT_EQ(run({cmd, "--config", cfg.string(), "--out", (dir_ / "a").string()}).code, 0) << cmd;
    ASSERT_EQ(run({cmd, "--config", cfg.string(), "--out", (dir_ / "b").string()}).code, 0) << cmd;
    for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
      const auto other = dir_ / "b" / entry.path().filename();
      ASSERT_TRUE(fs::exists(other)) << other;
      EXPECT_EQ(slurp(entry.path()), slurp(other)) << cmd << " " << entry.path().filename();
    }
    fs::remove_all(dir_ / "a");
    fs::remove_all(dir_ / "b");
  }
}

TEST_F(CliTest, SeedChangesSampledOutputOnly) {
  const auto cfg = write_config("c.json", kSmallConfig);
  ASSERT_EQ(run({"regimes", "--config", cfg.string(), "--out", (dir_ / "a").string()}).code, 0);
  ASSERT_EQ(run({"regimes", "--config", cfg.string(), "--seed", "8", "--out", (dir_ / "b").string()}).code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "regimes.csv"), slurp(dir_ / "b" / "regimes.csv"));
  const auto meta = json::parse(slurp(dir_ / "b" / "metadata.json"));
  EXPECT_EQ(meta.at("seed").get<std::uint64_t>(), 8u);
}

TEST_F(CliTest, JsonMirrorsCsvTables) {
  const auto cfg = write_config("c.json", kSmallConfig);
  ASSERT_EQ(run({"profile", "--config", cfg.string(), "--out", (dir_ / "c").string()}).code, 0);
  ASSERT_EQ(run({"profile", "--config", cfg.string(), "--format", "json", "--out", (dir_ / "j").string()}).code, 0);
  const auto doc = json::parse(slurp(dir_ / "j" / "report.json"));
  const auto& mp = doc.at("tables").at("mass_profile");
  EXPECT_EQ(mp.at("headers"), json({"r", "F", "G", "F_err", "G_err", "monotone_violation"}));
  const auto csv = slurp(dir_ / "c" / "mass_profile.csv");
  ASSERT_EQ(mp.at("rows").size(), static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n') - 1));
  // the second CSV line holds the first row at 17 significant digits
  const std::string first = csv.substr(csv.find('\n') + 1);
  const double G_csv = std::stod(first.substr(first.find(',', first.find(',') + 1) + 1));
  EXPECT_EQ(mp.at("rows")[0].at("G").get<double>(), G_csv);
  EXPECT_EQ(doc.at("version"), kVersion);
  EXPECT_TRUE(doc.at("converged").get<bool>());
}

TEST_F(CliTest, MalformedConfigExitsTwoWithLocation) {
  const auto bad = write_config("bad.json", "{\n  \"seed\": 1,\n  \"grids\": {\"r\": [0.5,]}\n}\n");
  auto r = run({"profile", "--config", bad.string(), "--out", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  const auto field = write_config("field.json", R"({"grids": {"r": [0.5, 0.75]}})");
  r = run({"profile", "--config", field.string(), "--out", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grids.r[1]"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "x"));
  r = run({"profile", "--config", (dir_ / "missing.json").string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, NonIntegrableCurrentIsAConfigError) {
  const auto cfg = write_config("slow.json", R"({"current": {"atoms": [{"profile": {"kind": "algebraic", "beta": 0.3}}]}})");
  const auto r = run({"profile", "--config", cfg.string(), "--out", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("1/gamma"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
  std::ofstream(dir_ / "file") << "x";
  const auto r = run({"oracle", "--out", (dir_ / "file" / "sub").string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, NonConvergenceExitsOneWithFlaggedPartialReports) {
  const auto cfg = write_config("tight.json", R"({"grids": {"s": [1, 2], "y": [0, 10]},
                                                 "tolerance": {"rel": 1e-15, "abs": 1e-300, "max_evals": 1000}})");
  const auto r = run({"kernel-bound", "--config", cfg.string(), "--out", (dir_ / "p").string()});
  EXPECT_EQ(r.code, 1) << r.err;
  const auto meta = json::parse(slurp(dir_ / "p" / "metadata.json"));
  EXPECT_FALSE(meta.at("converged").get<bool>());
  EXPECT_FALSE(meta.at("warnings").empty());
  EXPECT_TRUE(fs::exists(dir_ / "p" / "kernel.csv"));
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
  const auto target = dir_ / "from_env";
  ::setenv(kOutDirEnv, target.c_str(), 1);
  const auto r = run({"oracle"});
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(target / "oracle.csv"));
}

TEST_F(CliTest, BadArgumentsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"oracle", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"oracle", "--s0", "0.5", "--out", (dir_ / "o").string()}).code, 2);
  EXPECT_EQ(run({"kernel-bound", "--gamma-from-lambda", "2", "--out", (dir_ / "o").string()}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(ParseLambda, AcceptsCommonSpellings) {
  EXPECT_EQ(parse_lambda("i"), cplx(0, 1));
  EXPECT_EQ(parse_lambda("1+i"), cplx(1, 1));
  EXPECT_EQ(parse_lambda("-1+i"), cplx(-1, 1));
  EXPECT_EQ(parse_lambda("0.5-2i"), cplx(0.5, -2));
  EXPECT_EQ(parse_lambda("2.5i"), cplx(0, 2.5));
  EXPECT_EQ(parse_lambda("-1e-3+1e2i"), cplx(-1e-3, 1e2));
  EXPECT_EQ(parse_lambda("0.3, 2"), cplx(0.3, 2));
  EXPECT_THROW(parse_lambda("x+i"), ConfigError);
  EXPECT_THROW(parse_lambda(""), ConfigError);
  EXPECT_EQ(lambda_label({-1, 1}), "-1+i");
  EXPECT_EQ(lambda_label({0, 1}), "i");
  EXPECT_EQ(lambda_label({1, 1}), "1+i");
}

TEST(Config, DefaultsAreTheBumpAtUnitImaginaryRatio) {
  const auto cfg = parse_config(json::object());
  EXPECT_EQ(cfg.lambda, cplx(0, 1));
  ASSERT_EQ(cfg.current.atoms.size(), 1u);
  EXPECT_EQ(cfg.current.atoms[0].profile.kind(), BoundaryProfile::Kind::triangle);
  EXPECT_EQ(cfg.r_grid, default_r_grid());
  EXPECT_EQ(cfg.s_grid, default_s_grid());
  EXPECT_EQ(cfg.y_grid, default_y_grid());
  EXPECT_FALSE(cfg.seed.has_value());
}

TEST(Config, FieldPathDiagnostics) {
  auto msg = [](const char* text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg(R"({"singularity": {"lambda": [1, 0]}})").find("singularity"), std::string::npos);
  EXPECT_NE(msg(R"({"singularity": {"lambda": 3}})").find("singularity.lambda"), std::string::npos);
  EXPECT_NE(msg(R"({"grids": {"r": []}})").find("grids.r"), std::string::npos);
  EXPECT_NE(msg(R"({"grids": {"s": [1, -2]}})").find("grids.s[1]"), std::string::npos);
  EXPECT_NE(msg(R"({"seed": -3})").find("seed"), std::string::npos);
  EXPECT_NE(msg(R"({"colour": 1})").find("config.colour"), std::string::npos);
  EXPECT_NE(msg(R"({"current": {"atoms": [{"weight": 1}]}})").find("current.atoms[0].profile"), std::string::npos);
  EXPECT_NE(msg(R"({"current": {"atoms": [{"profile": {"kind": "triangle", "width": -1}}]}})")
                .find("current.atoms[0].profile"),
            std::string::npos);
  EXPECT_NE(msg(R"({"current": {"atoms": [{"alpha": [2, 0], "profile": {"kind": "zero"}}]}})").find("current.atoms[0].alpha"),
            std::string::npos);
  EXPECT_NE(msg(R"({"regimes": {"c2": 8, "c3": 4}})").find("regimes"), std::string::npos);
  EXPECT_NE(msg(R"({"recurrence": {"horizon": 40}})").find("recurrence"), std::string::npos);
  EXPECT_NE(msg(R"({"outputs": {"format": "xml"}})").find("outputs.format"), std::string::npos);
  EXPECT_NE(msg("{\n\n  \"seed\" 3}").find("line 3, column 10"), std::string::npos);
}

TEST(Config, RadialMeasureAndHash) {
  const auto a = parse_config_text(R"({"current": {"radial": {"density": {"power": 1}, "profile": {"kind": "cauchy"}}}, "seed": 3})");
  ASSERT_TRUE(a.current.radial.has_value());
  EXPECT_NEAR(a.current.radial->density(0.5), 0.5, 1e-15);
  const auto b = parse_config_text(R"({"seed": 3, "current": {"radial": {"profile": {"kind": "cauchy"}, "density": {"power": 1}}}})");
  EXPECT_EQ(config_hash(a), config_hash(b));  // key order does not matter
  const auto c = parse_config_text(R"({"current": {"radial": {"density": {"power": 2}, "profile": {"kind": "cauchy"}}}, "seed": 3})");
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_EQ(parse_config(a.canonical()).canonical(), a.canonical());
}

TEST(Report, NumbersUseSeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(std::stod(format_number(std::numbers::pi)), std::numbers::pi);
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_cell(std::string("a,b")), "\"a,b\"");
  EXPECT_EQ(format_cell(std::int64_t{-4}), "-4");
}

TEST(Report, WarningsAppearOnce) {
  ReportBundle b;
  b.warn("x");
  b.warn_all({"y", "x", "y"});
  EXPECT_EQ(b.warnings, (std::vector<std::string>{"x", "y"}));
}

TEST(Report, RowWidthMustMatchHeaders) {
  Table t{"t", {"a", "b"}, {}};
  EXPECT_THROW(t.add({1.0}), std::logic_error);
  t.add({1.0, std::string("z")});
  EXPECT_EQ(to_csv(t), "a,b\n1,z\n");
}

TEST(Samples, ConfigsLoadAndSchemaCoversTheirKeys) {
  const fs::path root = LELONG_SOURCE_DIR;
  const auto schema = json::parse(slurp(root / "docs" / "config.schema.json"));
  const auto& props = schema.at("properties");
  int count = 0;
  for (const auto& entry : fs::directory_iterator(root / "samples" / "configs")) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    const auto doc = json::parse(slurp(entry.path()));
    for (const auto& [key, value] : doc.items()) {
      EXPECT_TRUE(props.contains(key)) << entry.path() << " " << key;
    }
    ++count;
  }
  EXPECT_GE(count, 3);
  // every top-level schema property is accepted by the parser
  for (const auto& [key, value] : props.items()) {
    try {
      parse_config(json{{key, json::object()}});
    } catch (const ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).find("unknown field"), std::string::npos) << key << ": " << e.what();
    }
  }
}
