#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "douglab/config.hpp"
#include "douglab/experiment.hpp"
#include "douglab/verify.hpp"

namespace {

using namespace douglab;

int dispatch(const std::string& cmd, const ExperimentConfig& cfg,
             const std::string& out_dir) {
  if (cmd == "simulate") return cmd_simulate(cfg, out_dir);
  if (cmd == "doug") return cmd_doug(cfg, out_dir);
  if (cmd == "w1") return cmd_w1(cfg, out_dir);
  if (cmd == "bounds") return cmd_bounds(cfg, out_dir);
  if (cmd == "rates") return cmd_rates(cfg, out_dir);
  if (cmd == "tails") return cmd_tails(cfg, out_dir);
  if (cmd == "clt") return cmd_clt(cfg, out_dir);
  std::fprintf(stderr, "unknown subcommand '%s'\n", cmd.c_str());
  return 2;
}

int run_verify_cmd(const std::string& selector) {
  const auto results = run_verify(selector);
  if (results.empty()) {
    std::fprintf(stderr, "verify: selector '%s' matched no properties\n",
                 selector.c_str());
    return 1;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %-40s (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL",
                r.id.c_str(), r.seconds, r.detail.empty() ? "" : " :: ",
                r.detail.c_str());
    all_pass &= r.pass;
  }
  std::printf("verify: %zu properties, %s\n", results.size(),
              all_pass ? "all passed" : "FAILURES present");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doug-lab: stochastic-approximation / discrete-OU laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string selector;
  long long seed_override = -1;
  int threads_override = 0;

  const char* names[] = {"simulate", "doug", "w1", "bounds",
                         "rates",    "tails", "clt"};
  for (const char* n : names) {
    CLI::App* sub = app.add_subcommand(n);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "master seed override");
    sub->add_option("--threads", threads_override,
                    "worker threads (0: DOUG_LAB_THREADS env or hardware)");
  }
  CLI::App* ver = app.add_subcommand("verify");
  ver->add_option("suite", selector, "suite selector, e.g. 'transport'");

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "verify") return run_verify_cmd(selector);

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (threads_override > 0) cfg.threads = threads_override;
    const std::string out_dir =
        out_override.empty() ? cfg.output_dir : out_override;
    return dispatch(cmd, cfg, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Diverged& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const TooManyDiverged& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
