#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>

#include "CLI11.hpp"
#include "sib/cli/commands.hpp"

namespace sib::cli {

void configure_logging() {
  auto logger = spdlog::get("sib");
  if (!logger) logger = spdlog::stderr_color_mt("sib");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SIB_LOG");
  spdlog::set_level(env && *env ? spdlog::level::from_str(env) : spdlog::level::info);
}

namespace {

struct CommonArgs {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> labels;
  std::size_t parallel = 1;
  bool resume = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool many_configs) {
  auto* opt = cmd->add_option("-c,--config", args.configs, "JSON config file")->required()->check(CLI::ExistingFile);
  if (!many_configs) opt->expected(1);
  cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
  cmd->add_option("--out-dir", args.out_dir, "output directory (overrides the config)");
  cmd->add_option("--labels", args.labels, "target labels, e.g. 0-9 or 1,3,5");
  cmd->add_option("--parallel", args.parallel, "label jobs to run concurrently")->check(CLI::PositiveNumber);
}

std::vector<RunConfig> load_all(const CommonArgs& args) {
  Overrides o;
  o.seed = args.seed;
  if (args.labels) o.labels = parse_label_list(*args.labels);
  // With several configs an explicit --out-dir names where shared outputs go,
  // not where each config's runs live.
  if (args.out_dir && args.configs.size() == 1) o.out_dir = *args.out_dir;
  std::vector<RunConfig> out;
  for (const auto& path : args.configs) out.push_back(load_run_config(path, o));
  return out;
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"Benchmark for black-box model inversion against artificial and spiking classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonArgs train_args, attack_args, eval_args, recon_args;
  auto* train = app.add_subcommand("train-target", "train a target classifier and write its checkpoint");
  add_common(train, train_args, false);
  auto* atk = app.add_subcommand("attack", "run one attack per target label against a trained checkpoint");
  add_common(atk, attack_args, false);
  atk->add_flag("--resume", attack_args.resume, "skip jobs the previous manifest records as finished");
  auto* eval = app.add_subcommand("evaluate", "compute attack metrics and render the report table");
  add_common(eval, eval_args, true);
  auto* recon = app.add_subcommand("reconstruct", "export reconstruction grids as PGM images");
  add_common(recon, recon_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }

  configure_logging();
  try {
    if (*train) {
      const auto cfg = load_all(train_args).front();
      const auto r = train_target(cfg);
      std::printf("%s %s test_accuracy=%.4f (%.2f%%)\n", display_name(cfg.data.dataset).c_str(),
                  victim::to_string(cfg.victim.kind) == "ann" ? "ANN" : "SNN", r.test_accuracy,
                  100.0 * r.test_accuracy);
      std::printf("checkpoint %s\n", r.checkpoint.string().c_str());
    } else if (*atk) {
      const auto cfg = load_all(attack_args).front();
      const auto r = attack(cfg, {attack_args.parallel, attack_args.resume});
      for (const auto& j : r.jobs) {
        std::printf("label %zu seed %llu best_m_global=%.6g batches=%zu queries=%llu%s\n", j.label,
                    static_cast<unsigned long long>(j.seed), j.best_m_global, j.batches_run,
                    static_cast<unsigned long long>(j.queries_used), j.budget_exhausted ? " (budget exhausted)" : "");
      }
    } else if (*eval) {
      const auto cfgs = load_all(eval_args);
      const auto r = evaluate(cfgs, eval_args.out_dir.value_or(""), eval_args.parallel);
      std::fputs(r.rendered.text.c_str(), stdout);
    } else if (*recon) {
      const auto cfgs = load_all(recon_args);
      const auto r = reconstruct(cfgs, recon_args.out_dir.value_or(""));
      for (const auto& g : r.grids) std::printf("%s\n", g.string().c_str());
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  }
  return ok;
}

}  // namespace sib::cli
