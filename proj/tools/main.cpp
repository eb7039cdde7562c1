// Command-line front end: scenario files in, artifacts and exit codes out.
// Exit contract: 0 clean / verdict true, 2 certified property violated,
// 3 bad configuration or usage, 4 numerical guard tripped, 1 internal error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <tcs/runner.hpp>

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "scenario file; defaults apply when omitted")
        ->check(CLI::ExistingFile);
    out_opt = sub->add_option("--out", out_dir, "output directory override");
    seed_opt = sub->add_option("--seed", seed, "seed override for the control battery");
    threads_opt = sub->add_option("--threads", threads, "worker thread count override")
                      ->check(CLI::PositiveNumber);
  }

  tcs::Scenario load() const {
    tcs::Scenario s =
        config.empty()
            ? tcs::parse_scenario(tcs::Config::parse(tcs::default_config_text(), "<defaults>"))
            : tcs::scenario_from_file(config);
    if (out_opt && out_opt->count() > 0) s.output.directory = out_dir;
    if (seed_opt && seed_opt->count() > 0) s.output.seed = seed;
    if (threads_opt && threads_opt->count() > 0) s.output.threads = threads;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian packet transfer solver and small-time exclusion experiments"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults,
               "print the documented default scenario file and exit");

  CLI::App* prop = app.add_subcommand(
      "propagate", "integrate one driven scenario and compare the grid solution to the packet");
  CLI::App* obst = app.add_subcommand(
      "obstruct", "run a control battery against a target and certify the exclusion verdict");
  CLI::App* cons = app.add_subcommand(
      "constants", "print the normalization and remainder constants and the certified horizon");
  CLI::App* chk = app.add_subcommand("check", "re-derive the certified invariants for a scenario");

  CommonFlags prop_flags, obst_flags, cons_flags, chk_flags;
  prop_flags.attach(prop);
  obst_flags.attach(obst);
  cons_flags.attach(cons);
  chk_flags.attach(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  if (print_defaults) {
    std::cout << tcs::default_config_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 3;
  }

  try {
    if (prop->parsed()) return tcs::cmd_propagate(prop_flags.load(), std::cout);
    if (obst->parsed()) return tcs::cmd_obstruct(obst_flags.load(), std::cout);
    if (cons->parsed()) return tcs::cmd_constants(cons_flags.load(), std::cout);
    if (chk->parsed()) return tcs::cmd_check(chk_flags.load(), std::cout);
  } catch (const tcs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const tcs::NumericalError& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 4;
  } catch (const tcs::DegenerateTarget& e) {
    std::cerr << "degenerate target: " << e.what() << "\n";
    return 3;
  } catch (const tcs::NotNormalized& e) {
    std::cerr << "invalid target: " << e.what() << "\n";
    return 3;
  } catch (const tcs::EmptyControlSet& e) {
    std::cerr << "invalid battery: " << e.what() << "\n";
    return 3;
  } catch (const tcs::GridMismatch& e) {
    std::cerr << "grid mismatch: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
