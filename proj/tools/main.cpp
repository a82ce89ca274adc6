// ks: spectral laboratory for chemotaxis pattern onset.
//
// Usage:
//   ks dispersion  [--config FILE] [--out FILE] [--seed INT] [--key value ...]
//   ks simulate    ...
//   ks experiment  ...
//   ks sweep       --deltas 1e-2,1e-3,1e-4 ...
//
// Every config-file key is also available as a --key override.

#include <CLI11.hpp>

#include <map>
#include <string>
#include <vector>

#include "ks/cli.hpp"

namespace {

const std::vector<std::string> kKeys = {
    "mu", "chi", "D", "f", "k", "U_bar", "d",
    "N", "M", "dt", "t_end", "dealias", "integrator", "sample_every",
    "delta", "theta_override", "C0", "delta0", "w0", "samples",
    "trials", "probe_samples", "deltas", "out", "seed"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral laboratory for chemotaxis pattern onset"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const std::string& key : kKeys) {
      sub->add_option_function<std::string>(
             "--" + key,
             [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); })
          ->expected(1);
    }
  };

  CLI::App* disp = app.add_subcommand("dispersion", "per-mode eigenvalues and spectrum summary");
  CLI::App* sim = app.add_subcommand("simulate", "raw nonlinear trajectory");
  CLI::App* exp = app.add_subcommand("experiment", "escape-time experiment report");
  CLI::App* swp = app.add_subcommand("sweep", "experiment over a list of amplitudes");
  for (CLI::App* sub : {disp, sim, exp, swp}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // 0 for --help
    return code == 0 ? 0 : 2;
  }

  ks::RunConfig rc;
  try {
    if (!config_path.empty()) ks::load_config_file(rc, config_path);
    for (const auto& [key, value] : overrides) ks::apply_key(rc, key, value);
  } catch (const ks::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return ks::dispatch(command, rc);
}
