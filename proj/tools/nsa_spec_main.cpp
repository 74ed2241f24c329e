#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "nsa/config.hpp"
#include "nsa/errors.hpp"
#include "nsa/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectra, resolvent maps, and semigroup decay of non-selfadjoint "
               "magnetic Schrodinger operators"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::int64_t seed_override = -1;
  int jobs = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_override, "override the output directory");
    sub->add_option("--seed", seed_override, "override the master seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", jobs, "cap internal linear-algebra threads")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "execute the experiment named in the config");
  CLI::App* verify =
      app.add_subcommand("verify", "run the full release check suite (config supplies "
                                   "output settings only)");
  add_common(run);
  add_common(verify);
  CLI11_PARSE(app, argc, argv);

  if (jobs > 0) Eigen::setNbThreads(jobs);
  try {
    auto config = nsa::cli::load_config(config_path);
    if (verify->parsed()) config.experiment = "verify-all";
    if (!out_override.empty()) config.output_dir = out_override;
    if (seed_override >= 0) config.seed = std::uint64_t(seed_override);
    return nsa::cli::run_experiment(config);
  } catch (const nsa::ConfigError& err) {
    std::fprintf(stderr, "configuration error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
