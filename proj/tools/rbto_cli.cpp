#include "rbto/app.hpp"
#include "rbto/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> threads;
};

rbto::RunConfig load(const std::string& path, const Overrides& ov) {
  rbto::RunConfig cfg = rbto::load_config(path);
  if (ov.seed) cfg.opt.seed = *ov.seed;
  if (ov.iterations) {
    if (*ov.iterations < 1) throw rbto::ConfigError("--iterations must be at least 1");
    cfg.opt.iterations = *ov.iterations;
  }
  if (!ov.out.empty()) cfg.output = ov.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability-based topology optimization by stochastic gradient descent"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", ov.seed, "Root seed (overrides the config file)");
    sub->add_option("--threads", ov.threads, "Maximum worker threads");
  };

  CLI::App* run = app.add_subcommand("run", "Optimize a design and write history, design and summary files");
  add_common(run);
  run->add_option("--out", ov.out, "Output directory (overrides the config file)");
  run->add_option("--iterations", ov.iterations, "Iteration count (overrides the config file)");

  CLI::App* est = app.add_subcommand("estimate", "Estimate the failure probability of a fixed design");
  add_common(est);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ov.threads) rbto::set_max_threads(*ov.threads);
    const rbto::RunConfig cfg = load(config_path, ov);
    if (run->parsed()) {
      const auto outcome = rbto::app::cmd_run(cfg, cfg.output, &std::cerr);
      if (outcome.exit_code != rbto::app::kOk) {
        std::cerr << "error: " << outcome.error << " (partial history written to " << cfg.output << ")\n";
        return outcome.exit_code;
      }
      std::cout << outcome.summary.dump(2) << "\n";
    } else {
      rbto::app::cmd_estimate(cfg, std::cout);
    }
  } catch (const rbto::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return rbto::app::kConfigError;
  } catch (const rbto::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rbto::app::kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
