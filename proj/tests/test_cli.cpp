#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ks/cli.hpp"

using namespace ks;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "# key = value" -> value
std::string header_value(const std::string& text, const std::string& key) {
  const std::string tag = "# " + key + " = ";
  const size_t pos = text.find(tag);
  if (pos == std::string::npos) return "";
  const size_t end = text.find('\n', pos);
  return text.substr(pos + tag.size(), end - pos - tag.size());
}

int data_row_count(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool seen_header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;  // column header
      continue;
    }
    ++rows;
  }
  return rows;
}

RunConfig small_experiment_config(const std::string& out) {
  RunConfig rc;
  rc.params = kstest::flagship(2);
  rc.N = 8;
  rc.dt = 1e-3;
  rc.delta = 1e-2;
  rc.theta_override = 0.1;
  rc.trials = 40;
  rc.probe_samples = 40;
  rc.out = out;
  return rc;
}

}  // namespace

TEST(ConfigFile, LoadAndOverride) {
  const std::string path = "/tmp/ks_cli_cfg.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "mu = 2.5\n";
    out << "U_bar=4\n";
    out << "N = 12\n";
    out << "w0 = random\n";
    out << "deltas = 1e-2, 1e-3\n";
  }
  RunConfig rc;
  load_config_file(rc, path);
  EXPECT_DOUBLE_EQ(rc.params.mu, 2.5);
  EXPECT_DOUBLE_EQ(rc.params.U_bar, 4.0);
  EXPECT_EQ(rc.N, 12);
  EXPECT_EQ(rc.w0, "random");
  ASSERT_EQ(rc.deltas.size(), 2u);
  EXPECT_DOUBLE_EQ(rc.deltas[1], 1e-3);

  apply_key(rc, "N", "6");
  EXPECT_EQ(rc.N, 6);
  EXPECT_THROW(apply_key(rc, "bogus", "1"), ConfigError);
  EXPECT_THROW(apply_key(rc, "dt", "fast"), ConfigError);
}

TEST(ConfigFile, MalformedLineNamesLocation) {
  const std::string path = "/tmp/ks_cli_bad.txt";
  {
    std::ofstream out(path);
    out << "mu 2.5\n";
  }
  RunConfig rc;
  EXPECT_THROW(load_config_file(rc, path), ConfigError);
  EXPECT_THROW(load_config_file(rc, "/tmp/does_not_exist_ks.txt"), ConfigError);
}

TEST(InitialShape, Variants) {
  RunConfig rc;
  rc.params = kstest::flagship(2);
  rc.N = 8;
  const SpectrumSummary spec = spectrum_summary(rc.params, rc.N);

  rc.w0 = "dominant";
  const SpectralField dom = make_initial_shape(rc, spec);
  EXPECT_GT(l2_norm(dom), 0.0);
  EXPECT_LE(l2_norm(dom - dominant_projection(dom, 0.0, spec)) / l2_norm(dom), 1e-13);

  rc.w0 = "random";
  const SpectralField rnd = make_initial_shape(rc, spec);
  EXPECT_NEAR(l2_norm(rnd), 1.0, 1e-12);

  rc.w0 = "coeffs:u@1,0=0.5;v@0,1=-2";
  const SpectralField cf = make_initial_shape(rc, spec);
  ModeIndex m10{{1, 0, 0}, 2}, m01{{0, 1, 0}, 2};
  EXPECT_DOUBLE_EQ(cf.u[cf.flat(m10)], 0.5);
  EXPECT_DOUBLE_EQ(cf.v[cf.flat(m01)], -2.0);

  rc.w0 = "coeffs:u@9,0=1";
  EXPECT_THROW(make_initial_shape(rc, spec), ConfigError);
  rc.w0 = "garbage";
  EXPECT_THROW(make_initial_shape(rc, spec), ConfigError);
}

TEST(CmdDispersion, FlagshipSummaryFile) {
  RunConfig rc;
  rc.params = kstest::flagship(2);
  rc.N = 8;
  rc.out = "/tmp/ks_cli_disp.csv";
  EXPECT_EQ(dispatch("dispersion", rc), 0);
  const std::string text = slurp(rc.out);

  const double lam = std::strtod(header_value(text, "lambda_max").c_str(), nullptr);
  EXPECT_NEAR(lam, 0.3027756377319946, 1e-12);
  EXPECT_EQ(header_value(text, "unstable_count"), "2");
  EXPECT_EQ(header_value(text, "omega_max_count"), "2");
  EXPECT_EQ(data_row_count(text), 81);  // (N+1)^2 modes

  // 17 significant digits: parsing the text recovers the double exactly
  const SpectrumSummary spec = spectrum_summary(rc.params, rc.N);
  EXPECT_EQ(lam, spec.lambda_max);
}

TEST(CmdDispersion, StableParams) {
  RunConfig rc;
  rc.params = kstest::stable_params(2);
  rc.N = 8;
  rc.out = "/tmp/ks_cli_disp_stable.csv";
  EXPECT_EQ(dispatch("dispersion", rc), 0);
  const std::string text = slurp(rc.out);
  EXPECT_EQ(header_value(text, "unstable_count"), "0");
  EXPECT_EQ(header_value(text, "q_c_squared"), "none");
}

TEST(CmdDispersion, InvalidParamsExitTwo) {
  RunConfig rc;
  rc.params = kstest::flagship(2);
  rc.params.mu = 0.0;
  rc.out = "/tmp/ks_cli_disp_bad.csv";
  EXPECT_EQ(dispatch("dispersion", rc), 2);
  EXPECT_EQ(dispatch("not-a-command", rc), 2);
}

TEST(CmdExperiment, FlagshipRunWritesFullReport) {
  const RunConfig rc = small_experiment_config("/tmp/ks_cli_exp.csv");
  EXPECT_EQ(dispatch("experiment", rc), 0);
  const std::string text = slurp(rc.out);
  EXPECT_EQ(data_row_count(text), 66);  // 64 interior + both endpoints
  EXPECT_EQ(header_value(text, "status"), "completed");
  const double theta = std::strtod(header_value(text, "theta").c_str(), nullptr);
  EXPECT_DOUBLE_EQ(theta, 0.1);
  EXPECT_GT(std::strtod(header_value(text, "fitted_C").c_str(), nullptr), 0.0);
}

TEST(CmdExperiment, DeltaAboveThetaExitTwo) {
  RunConfig rc = small_experiment_config("/tmp/ks_cli_exp2.csv");
  rc.delta = 0.2;  // >= theta
  EXPECT_EQ(dispatch("experiment", rc), 2);
}

TEST(CmdExperiment, BlowUpExitThreeWithPartialFile) {
  RunConfig rc = small_experiment_config("/tmp/ks_cli_exp3.csv");
  rc.theta_override = 1e9;
  rc.delta = 1e7;
  EXPECT_EQ(dispatch("experiment", rc), 3);
  const std::string text = slurp(rc.out);
  EXPECT_EQ(header_value(text, "status"), "blow-up");
  EXPECT_GE(data_row_count(text), 1);
  EXPECT_NE(text.find(",blow-up\n"), std::string::npos);
}

TEST(CmdExperiment, DeterministicOutput) {
  RunConfig rc = small_experiment_config("/tmp/ks_cli_det1.csv");
  rc.w0 = "random";
  EXPECT_EQ(dispatch("experiment", rc), 0);
  RunConfig rc2 = rc;
  rc2.out = "/tmp/ks_cli_det2.csv";
  EXPECT_EQ(dispatch("experiment", rc2), 0);
  EXPECT_EQ(slurp(rc.out), slurp(rc2.out));

  RunConfig rc3 = rc;
  rc3.out = "/tmp/ks_cli_det3.csv";
  rc3.seed = 999;  // different seed, different random shape
  EXPECT_EQ(dispatch("experiment", rc3), 0);
  EXPECT_NE(slurp(rc.out), slurp(rc3.out));
}

TEST(CmdSimulate, TrajectoryFile) {
  RunConfig rc;
  rc.params = kstest::flagship(2);
  rc.N = 8;
  rc.dt = 1e-3;
  rc.t_end = 0.5;
  rc.delta = 1e-3;
  rc.sample_every = 100;
  rc.out = "/tmp/ks_cli_sim.csv";
  EXPECT_EQ(dispatch("simulate", rc), 0);
  const std::string text = slurp(rc.out);
  EXPECT_EQ(header_value(text, "status"), "completed");
  EXPECT_EQ(data_row_count(text), 6);  // t=0 plus 5 samples

  rc.t_end = 0.0;
  EXPECT_EQ(dispatch("simulate", rc), 2);
}

TEST(CmdSweep, CombinedFileAndIsolation) {
  RunConfig rc = small_experiment_config("/tmp/ks_cli_sweep.csv");
  rc.theta_override = 1e9;
  rc.t_end = 0.5;                // budget so the small deltas finish quickly
  rc.samples = 8;
  rc.deltas = {1e-3, 1e7};       // the second blows up immediately
  EXPECT_EQ(dispatch("sweep", rc), 0);
  const std::string text = slurp(rc.out);
  EXPECT_NE(text.find("budget-exceeded"), std::string::npos);
  EXPECT_NE(text.find("blow-up"), std::string::npos);
  EXPECT_NE(text.find("# delta 0.001"), std::string::npos);

  rc.deltas.clear();
  EXPECT_EQ(dispatch("sweep", rc), 2);
}

TEST(Fmt17, RoundTripsExactly) {
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, 40.0 * (rng.uniform() - 0.5));
    const double back = std::strtod(fmt17(x).c_str(), nullptr);
    EXPECT_EQ(back, x);
  }
}
