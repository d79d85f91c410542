// expgnn command-line driver.
//
//   expgnn gen --family csl --out data/csl
//   expgnn train --task csl --steps 20000 --out runs/csl
//   expgnn eval --task csl --checkpoint runs/csl/checkpoint.txt
//   expgnn gradcheck [--ops relu,layer] [--negative-control]
//   expgnn wlcheck
//   expgnn calibrate --set labeler=clique4 --set nodes=16

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "expgnn/errors.hpp"

namespace {

using namespace expgnn::cli;

struct Flags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::string> task, out, family, checkpoint, ops;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps, batch_size, resamples, threads;
  bool no_random_init = false;
  bool no_expanding = false;
  bool negative_control = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file; flags override it");
  cmd->add_option("--set", f.sets, "override one key, key=value")->take_all();
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--out", f.out, "output directory");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--task", f.task, "csl, cycle, clique4, path or degree7");
  cmd->add_option("--resamples", f.resamples, "identifier resamples per evaluation");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_flag("--no-random-init", f.no_random_init, "random_id_width = 0");
  cmd->add_flag("--no-expanding", f.no_expanding, "drop the expanding window heads");
}

Settings resolve(const Flags& f) {
  Settings s;
  if (f.config) s.load_file(*f.config);
  for (const std::string& pair : f.sets) s.set_pair(pair);
  const auto put = [&s](const char* key, const auto& value) {
    if (value) {
      if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>)
        s.set(key, *value);
      else
        s.set(key, std::to_string(*value));
    }
  };
  put("task", f.task);
  put("out", f.out);
  put("family", f.family);
  put("checkpoint", f.checkpoint);
  put("ops", f.ops);
  put("seed", f.seed);
  put("steps", f.steps);
  put("batch_size", f.batch_size);
  put("resamples", f.resamples);
  put("threads", f.threads);
  if (f.no_random_init) s.set("no_random_init", "true");
  if (f.no_expanding) s.set("no_expanding", "true");
  if (f.negative_control) s.set("negative_control", "true");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"expgnn: graph attention with expanding windows and random node identifiers"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset snapshot and manifest");
  add_common(gen, f);
  gen->add_option("family,--family", f.family, "uniform, tree, line, cycle, two_paths, csl or tud");

  auto* train = app.add_subcommand("train", "train on a task and evaluate on its evaluation sets");
  add_common(train, f);
  add_model_flags(train, f);
  train->add_option("--steps", f.steps, "optimizer steps");
  train->add_option("--batch-size", f.batch_size, "graphs per step");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, f);
  add_model_flags(eval, f);
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint file (default OUT/checkpoint.txt)");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every backward rule");
  add_common(gradcheck, f);
  gradcheck->add_option("--ops", f.ops, "comma-separated cases; empty runs none");
  gradcheck->add_flag("--negative-control", f.negative_control, "add a case with a broken backward rule");

  auto* wlcheck = app.add_subcommand("wlcheck", "1-WL verdicts on the fixture pairs");
  add_common(wlcheck, f);

  auto* calibrate = app.add_subcommand("calibrate", "find the edge probability with half positives");
  add_common(calibrate, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const Settings s = resolve(f);
    if (*gen) return cmd_gen(s);
    if (*train) return cmd_train(s);
    if (*eval) return cmd_eval(s);
    if (*gradcheck) return cmd_gradcheck(s);
    if (*wlcheck) return cmd_wlcheck(s);
    if (*calibrate) return cmd_calibrate(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const expgnn::ContractError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const expgnn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const expgnn::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const expgnn::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const expgnn::CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
