#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "censornet/config.hpp"

using namespace censornet;

TEST(Config, MinimalFileGetsDefaults) {
  const ExperimentSpec s = parse_config("experiment = table1\n");
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.id, "table1");
  EXPECT_EQ(s.K, 5);
  EXPECT_DOUBLE_EQ(s.A, 1.0);
  EXPECT_DOUBLE_EQ(s.sigma_v2_dbm, -50.0);
  EXPECT_TRUE(s.sweep_rho.empty());
}

TEST(Config, FullFile) {
  const ExperimentSpec s = parse_config(R"(# a comment
experiment = custom
problem = S
seed = 3     # trailing comment
out = results/x

[network]
K = 4
snr_h_db = 7.5
rho = 0.25

[sweep]
alpha = 0.05, 0.1
beta = 0.01

[solver]
n_mc_pu = 5000
tau_grid = 51
)");
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.problem, ProblemKind::S);
  EXPECT_EQ(s.seed, 3u);
  EXPECT_EQ(s.out_dir, "results/x");
  EXPECT_EQ(s.K, 4);
  EXPECT_DOUBLE_EQ(*s.snr_h_db, 7.5);
  EXPECT_FALSE(s.snr_c_db.has_value());
  EXPECT_DOUBLE_EQ(*s.rho, 0.25);
  EXPECT_EQ(s.sweep_alpha, (std::vector<double>{0.05, 0.1}));
  EXPECT_EQ(s.n_mc_pu, 5000u);
  EXPECT_EQ(s.tau_grid, 51);
}

TEST(Config, CorrelationOutOfRangeNamesTheKey) {
  const ExperimentSpec s = parse_config("experiment = table1\n[network]\nrho = 1.2\n");
  try {
    s.validate();
    FAIL() << "rho = 1.2 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rho");
  }
  const ExperimentSpec t = parse_config("[sweep]\nrho = 0.1, 1.2\n");
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse_config("experiment = table1\n\n[network]\nsnr = 5\n");
    FAIL() << "unknown key accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("snr"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[plots]\n"), ParseError);
  EXPECT_THROW(parse_config("colour = red\n"), ParseError);
}

TEST(Config, MalformedValues) {
  auto line_of = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[network]\nK = five\n"), 2);
  EXPECT_EQ(line_of("[sweep]\np0 = 0.4,,0.6\n"), 2);
  EXPECT_EQ(line_of("seed = 7x\n"), 1);
  EXPECT_EQ(line_of("seed = -1\n"), 1);
  EXPECT_EQ(line_of("just text\n"), 1);
  EXPECT_EQ(line_of("[network\n"), 1);
  EXPECT_EQ(line_of("x =\n"), 1);
}

TEST(Config, UnknownExperimentRejected) {
  EXPECT_THROW(parse_config("experiment = table9\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("problem = Q\n"), ConfigError);
}

TEST(Config, RoundTrip) {
  ExperimentSpec s = parse_config("experiment = fig_pm_vs_beta\nseed = 11\n[network]\nrho = 0.3\n"
                                  "[sweep]\nbeta = 0.005, 0.02\n[solver]\nf_grid = 21\n");
  const ExperimentSpec back = parse_config(to_config_text(s));
  EXPECT_EQ(to_config_text(back), to_config_text(s));
  EXPECT_EQ(back.sweep_beta, s.sweep_beta);
  EXPECT_EQ(*back.rho, 0.3);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "censornet_config_test.ini";
  std::ofstream(path) << "experiment = table2\nseed = 3\n";
  const ExperimentSpec s = load_config(path.string());
  EXPECT_EQ(s.seed, 3u);
  EXPECT_EQ(s.id, "table2");
  std::filesystem::remove(path);
  EXPECT_THROW(load_config("/nonexistent/censornet.ini"), std::runtime_error);
}

#ifdef CENSORNET_CLI
namespace {
std::string run_cli(const std::string& args, int* status) {
  const std::string cmd = std::string(CENSORNET_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  char buf[256];
  while (p && fgets(buf, sizeof buf, p)) out += buf;
  *status = p ? pclose(p) : -1;
  return out;
}
}  // namespace

TEST(Cli, SeedFlagOverridesFile) {
  const auto path = std::filesystem::temp_directory_path() / "censornet_cli_seed.ini";
  std::ofstream(path) << "experiment = table1\nseed = 3\n";
  int st = 0;
  const std::string out = run_cli("run table1 --config " + path.string() + " --seed 7 --print-config", &st);
  EXPECT_EQ(st, 0) << out;
  EXPECT_NE(out.find("seed = 7\n"), std::string::npos) << out;
  const std::string plain = run_cli("run table1 --config " + path.string() + " --print-config", &st);
  EXPECT_NE(plain.find("seed = 3\n"), std::string::npos) << plain;
  std::filesystem::remove(path);
}

TEST(Cli, BadConfigExitsWithLineNumber) {
  const auto path = std::filesystem::temp_directory_path() / "censornet_cli_bad.ini";
  std::ofstream(path) << "experiment = table1\n[network]\nrho = 1.2\n";
  int st = 0;
  std::string out = run_cli("run table1 --config " + path.string() + " --print-config", &st);
  EXPECT_NE(st, 0);
  EXPECT_NE(out.find("rho"), std::string::npos) << out;
  std::ofstream(path) << "experiment = table1\nbogus = 1\n";
  out = run_cli("run table1 --config " + path.string(), &st);
  EXPECT_NE(st, 0);
  EXPECT_NE(out.find("line 2"), std::string::npos) << out;
  std::filesystem::remove(path);
}
#endif

TEST(Config, BudgetsValidated) {
  ExperimentSpec s;
  s.n_mc_pu = 10;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.sweep_p0 = {0.0};
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.K = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}
