#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "duallearn/error.hpp"

namespace {

namespace cli = duallearn::cli;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::size_t parallel_trials = 1;
};

json load_tree(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw cli::SchemaError(path + ": cannot open config file");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw cli::SchemaError(path + ": " + e.what());
  }
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "run directory (default: output.dir, then $DUALLEARN_OUT/<command>-<seed>)");
  cmd->add_option("--seed", opt.seed, "run seed");
  cmd->add_option("--set", opt.sets, "override a config value, e.g. dual.step=0.1")->take_all();
}

// Flag value forwarded as a --set override, so schema errors name the key.
template <class T>
void add_override(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help,
                  std::vector<std::string>& sets) {
  cmd->add_option_function<T>(
      flag, [key, &sets](const T& v) { sets.push_back(key + "=" + json(v).dump()); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"duallearn: constrained learning by empirical dual ascent"};
  app.require_subcommand(1);
  Options opt;
  std::vector<std::string> flag_sets;

  auto* train = app.add_subcommand("train", "run primal-dual training on the configured problem");
  add_common(train, opt);
  add_override<std::size_t>(train, "--iterations", "dual.iterations", "number of dual iterations", flag_sets);
  add_override<double>(train, "--dual-step", "dual.step", "dual step size", flag_sets);
  train->add_flag_callback("--alternating", [&] { flag_sets.push_back("dual.alternating=true"); },
                           "one primal epoch per dual step");

  auto* eval = app.add_subcommand("eval", "evaluate a saved model or a run's randomized solution");
  add_common(eval, opt);
  add_override<std::string>(eval, "--model", "model.path", "saved model file", flag_sets);
  add_override<std::string>(eval, "--trace", "model.trace", "train run directory", flag_sets);

  auto* example1 = app.add_subcommand("example1", "seeded trials of the enumerated pathological problem");
  add_common(example1, opt);
  add_override<std::size_t>(example1, "--trials", "problem.example1.trials", "number of trials", flag_sets);
  add_override<std::size_t>(example1, "--n", "problem.example1.n", "samples per trial", flag_sets);
  example1->add_option("--parallel-trials", opt.parallel_trials, "worker threads")->check(CLI::PositiveNumber);

  auto* bounds = app.add_subcommand("bounds", "generalization and duality-gap report");
  add_common(bounds, opt);

  CLI11_PARSE(app, argc, argv);
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();

  cli::RunConfig cfg;
  try {
    json tree = load_tree(opt.config_path);
    for (const auto& s : opt.sets) cli::apply_override(tree, s);
    for (const auto& s : flag_sets) cli::apply_override(tree, s);
    if (opt.seed) tree["seed"] = *opt.seed;
    cfg = cli::parse_config(tree);
    cli::resolve_seeds(cfg);
  } catch (const cli::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto dir = cli::resolve_run_dir(name, cfg, opt.out);
    cfg.output.dir = dir.string();
    if (name == "train") {
      cli::run_train(cfg, dir);
    } else if (name == "eval") {
      cli::run_eval(cfg, dir);
    } else if (name == "example1") {
      cli::run_example1(cfg, dir, opt.parallel_trials);
    } else {
      cli::run_bounds(cfg, dir);
    }
    std::cout << dir.string() << "\n";
  } catch (const duallearn::ConfigError& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const duallearn::Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error [cli]: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
