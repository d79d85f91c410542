#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "expgnn/datasets.hpp"
#include "expgnn/errors.hpp"
#include "expgnn/fixtures.hpp"
#include "expgnn/gradcheck.hpp"
#include "expgnn/model.hpp"
#include "expgnn/tasks.hpp"
#include "expgnn/training.hpp"
#include "json.hpp"

namespace expgnn::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Seed domains of the driver; the library uses its own below 20.
enum Domain : std::uint64_t { kEvalNoise = 31, kValidation = 40 };

using Resolved = std::vector<std::pair<std::string, std::string>>;

void echo(const std::string& command, const Resolved& resolved) {
  std::cout << "# expgnn " << command << '\n';
  for (const auto& [key, value] : resolved) std::cout << "config " << key << " = " << value << '\n';
  std::cout.flush();
}

json config_json(const Resolved& resolved) {
  json j = json::object();
  for (const auto& [key, value] : resolved) j[key] = value;
  return j;
}

fs::path output_dir(const Settings& s) {
  const fs::path dir = s.str("out", "expgnn-out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::size_t thread_count(const Settings& s) {
  return s.count("threads", std::max(1u, std::thread::hardware_concurrency()));
}

NodeRange parse_range(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const std::size_t n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, dash)), std::stoul(text.substr(dash + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad node range '" + text + "'");
  }
}

std::string range_text(NodeRange r) {
  return r.min == r.max ? std::to_string(r.min) : std::to_string(r.min) + "-" + std::to_string(r.max);
}

TaskOptions task_options(const Settings& s) {
  TaskOptions o;
  o.train_nodes = s.count("train_nodes", o.train_nodes);
  o.eval_count = s.count("eval_count", o.eval_count);
  o.calibration_samples = s.count("calibration_samples", o.calibration_samples);
  return o;
}

TaskSuite load_task(const Settings& s, std::uint64_t seed) {
  const auto name = s.get("task");
  if (!name) throw ConfigError("--task is required");
  const auto names = task_names();
  if (std::find(names.begin(), names.end(), *name) == names.end()) throw ConfigError("unknown task '" + *name + "'");
  return make_task(*name, seed, task_options(s));
}

ModelConfig model_config(const Settings& s, const TaskSuite& task) {
  ModelConfig cfg;
  configure_model(cfg, task);
  s.apply_model(cfg);
  if (s.flag("no_random_init")) cfg.random_id_width = 0;
  if (s.flag("no_expanding")) {
    cfg.windows.set(WindowKind::expanding, false);
    cfg.windows.set(WindowKind::reversed_expanding, false);
  }
  try {
    cfg.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void add_model(Resolved& r, const ModelConfig& cfg) {
  for (auto& [key, value] : config_entries(cfg)) r.emplace_back(key, value);
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

void write_results(const fs::path& dir, std::span<const EvalStats> rows) {
  write_results_table(std::cout, rows);
  auto txt = open_out(dir / "results.txt");
  write_results_table(txt, rows);
  auto csv = open_out(dir / "results.csv");
  write_results_csv(csv, rows);
  if (!txt || !csv) throw IoError("failed writing results in " + dir.string());
}

json results_json(std::span<const EvalStats> rows) {
  json j = json::array();
  for (const EvalStats& e : rows)
    j.push_back({{"name", e.name},
                 {"mean", e.mean},
                 {"std", e.std},
                 {"min", e.min},
                 {"max", e.max},
                 {"resamples", e.resamples},
                 {"instances", e.instances}});
  return j;
}

std::vector<EvalStats> evaluate_suite(const TaskSuite& task, const ModelParams& params, const ModelConfig& cfg,
                                      std::size_t resamples, std::uint64_t seed, std::size_t threads) {
  std::vector<EvalStats> rows;
  for (std::size_t i = 0; i < task.evals.size(); ++i) {
    const EvalSet& set = task.evals[i];
    rows.push_back(evaluate(params, cfg, set.graphs, resamples, derive_seed(seed, kEvalNoise, i), set.name, threads));
  }
  return rows;
}

Labeler implied_labeler(Family f) {
  switch (f) {
    case Family::csl:
      return Labeler::csl;
    case Family::two_paths:
      return Labeler::path;
    default:
      return Labeler::cycle;
  }
}

NodeRange default_nodes(Family f) {
  switch (f) {
    case Family::csl:
      return {41, 41};
    case Family::two_paths:
      return {5, 5};
    case Family::line:
    case Family::cycle:
      return {3, 64};
    default:
      return {16, 16};
  }
}

// Bulk fixtures are summarized as one line per family.
std::string fixture_group(const std::string& name) {
  if (name.starts_with("csl41 ")) return "csl41 pairs";
  if (name.starts_with("isomorphic ")) return "isomorphic pairs";
  return name;
}

}  // namespace

int cmd_gen(const Settings& s) {
  const std::string family_name = s.str("family", "");
  const auto family = parse_family(family_name);
  if (!family) throw ConfigError("unknown or missing family '" + family_name + "'");

  DatasetSpec spec;
  spec.family = *family;
  spec.seed = s.u64("seed", 0);
  spec.nodes = s.has("nodes") ? parse_range(*s.get("nodes")) : default_nodes(spec.family);
  if (const auto l = s.get("labeler")) {
    const auto labeler = parse_labeler(*l);
    if (!labeler) throw ConfigError("unknown labeler '" + *l + "'");
    spec.labeler = *labeler;
  } else {
    spec.labeler = implied_labeler(spec.family);
  }
  spec.source = s.str("source", "");
  std::size_t default_count = 1000;
  if (spec.family == Family::csl) default_count = csl_skips(spec.nodes.min).size();
  if (spec.family == Family::two_paths) default_count = 2 * (spec.nodes.max - spec.nodes.min + 1);
  spec.count = s.count("count", default_count);

  json calibration = nullptr;
  if (s.has("edge_prob")) {
    spec.edge_prob = s.real("edge_prob", 0.0);
  } else if (spec.family == Family::uniform) {
    if (spec.nodes.min != spec.nodes.max) throw ConfigError("uniform graphs of varying size need edge_prob");
    CalibrationOptions co;
    co.samples = s.count("samples", co.samples);
    co.seed = derive_seed(spec.seed, kValidation, 1);
    const CalibrationResult c = calibrate_p(spec.nodes.min, spec.labeler, co);
    spec.edge_prob = c.p;
    calibration = {{"samples", co.samples}, {"p", c.p}, {"positive_rate", c.positive_rate}};
  }
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }

  Resolved r{{"family", std::string(to_string(spec.family))},
             {"nodes", range_text(spec.nodes)},
             {"labeler", std::string(to_string(spec.labeler))},
             {"count", std::to_string(spec.count)},
             {"seed", std::to_string(spec.seed)}};
  if (spec.edge_prob) r.emplace_back("edge_prob", fixed(*spec.edge_prob, 8));
  if (!spec.source.empty()) r.emplace_back("source", spec.source);
  const fs::path dir = output_dir(s);
  r.emplace_back("out", dir.string());
  echo("gen", r);

  const std::vector<LabeledGraph> graphs = generate(spec);
  std::map<int, std::size_t> classes;
  for (const LabeledGraph& g : graphs) ++classes[g.class_id];
  {
    auto out = open_out(dir / "dataset.txt");
    write_snapshot(out, graphs);
    if (!out) throw IoError("failed writing dataset snapshot");
  }
  json hist = json::object();
  for (const auto& [c, n] : classes) hist[std::to_string(c)] = n;
  const double positive = graphs.empty() ? 0.0 : static_cast<double>(classes[1]) / static_cast<double>(graphs.size());
  write_json(dir / "manifest.json", {{"command", "gen"},
                                     {"config", config_json(r)},
                                     {"graphs", graphs.size()},
                                     {"classes", hist},
                                     {"positive_rate", class_count(spec.labeler) == 2 ? json(positive) : json(nullptr)},
                                     {"calibration", calibration},
                                     {"snapshot", "dataset.txt"}});
  std::cout << "wrote " << graphs.size() << " graphs to " << (dir / "dataset.txt").string() << '\n';
  if (class_count(spec.labeler) == 2) std::cout << "positive rate " << fixed(positive) << '\n';
  return kOk;
}

int cmd_train(const Settings& s) {
  const std::uint64_t seed = s.u64("seed", 0);
  const TaskSuite task = load_task(s, seed);
  const ModelConfig cfg = model_config(s, task);

  TrainOptions o;
  o.seed = seed;
  o.steps = s.count("steps", task.default_steps);
  o.batch_size = s.count("batch_size", task.default_batch);
  o.log_every = s.count("log_every", 100);
  o.threads = thread_count(s);
  o.adam.lr = s.real("lr", o.adam.lr);
  const std::size_t resamples = s.count("resamples", task.default_resamples);
  if (o.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (resamples == 0) throw ConfigError("resamples must be positive");
  const fs::path dir = output_dir(s);

  Resolved r{{"task", task.name},
             {"seed", std::to_string(seed)},
             {"steps", std::to_string(o.steps)},
             {"batch_size", std::to_string(o.batch_size)},
             {"lr", fixed(o.adam.lr, 6)},
             {"resamples", std::to_string(resamples)},
             {"threads", std::to_string(o.threads)},
             {"out", dir.string()}};
  const TaskOptions to = task_options(s);
  if (task.name != "csl") {
    r.emplace_back("train_nodes", std::to_string(to.train_nodes));
    r.emplace_back("eval_count", std::to_string(to.eval_count));
    r.emplace_back("calibration_samples", std::to_string(to.calibration_samples));
  }
  add_model(r, cfg);
  echo("train", r);
  for (const auto& [name, p] : task.calibrated) std::cout << "calibrated " << name << " p = " << fixed(p, 6) << '\n';

  o.on_log = [](const LogRecord& rec) {
    std::cout << "step " << rec.step << " loss " << fixed(rec.mean_loss) << " acc " << fixed(rec.train_accuracy)
              << " time " << fixed(rec.seconds, 1) << "s" << std::endl;
  };
  SpecSource source(task.train);
  TrainResult result = train(source, cfg, o);
  result.report.evaluations = evaluate_suite(task, result.params, cfg, resamples, seed, o.threads);

  save_checkpoint(dir / "checkpoint.txt", cfg, result.params);
  {
    auto out = open_out(dir / "report.txt");
    write_report(out, result.report);
    if (!out) throw IoError("failed writing report");
  }
  write_results(dir, result.report.evaluations);

  json calibrated = json::object();
  for (const auto& [name, p] : task.calibrated) calibrated[name] = p;
  write_json(dir / "manifest.json", {{"command", "train"},
                                     {"config", config_json(r)},
                                     {"calibrated_p", calibrated},
                                     {"seconds", result.report.seconds},
                                     {"results", results_json(result.report.evaluations)},
                                     {"checkpoint", "checkpoint.txt"}});
  return kOk;
}

int cmd_eval(const Settings& s) {
  const std::uint64_t seed = s.u64("seed", 0);
  const fs::path dir = output_dir(s);
  const fs::path ckpt_path = s.str("checkpoint", (dir / "checkpoint.txt").string());
  Checkpoint ckpt = load_checkpoint(ckpt_path);

  TaskSuite task;
  if (const auto src = s.get("source")) {
    std::ifstream in(*src);
    if (!in) throw IoError("cannot open " + *src);
    task.name = "snapshot";
    task.evals.push_back({fs::path(*src).filename().string(), read_snapshot(in, *src)});
  } else {
    task = load_task(s, seed);
  }
  const std::size_t resamples = s.count("resamples", task.default_resamples);
  if (resamples == 0) throw ConfigError("resamples must be positive");
  const std::size_t threads = thread_count(s);

  Resolved r{{"task", task.name},
             {"seed", std::to_string(seed)},
             {"checkpoint", ckpt_path.string()},
             {"resamples", std::to_string(resamples)},
             {"threads", std::to_string(threads)},
             {"out", dir.string()}};
  add_model(r, ckpt.config);
  echo("eval", r);

  const auto rows = evaluate_suite(task, ckpt.params, ckpt.config, resamples, seed, threads);
  write_results(dir, rows);
  write_json(dir / "eval_manifest.json", {{"command", "eval"}, {"config", config_json(r)}, {"results", results_json(rows)}});
  return kOk;
}

int cmd_gradcheck(const Settings& s) {
  GradcheckOptions o;
  o.seed = s.u64("seed", 0);
  o.probes = s.count("probes", o.probes);
  o.tolerance = s.real("tolerance", o.tolerance);
  o.h = s.real("h", o.h);

  std::vector<GradcheckCase> all = default_gradcheck_cases();
  std::vector<GradcheckCase> cases;
  if (const auto ops = s.get("ops")) {
    std::string_view rest = *ops;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view name = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (name.empty()) continue;
      const auto it = std::find_if(all.begin(), all.end(), [&](const GradcheckCase& c) { return c.name == name; });
      if (it == all.end()) throw ConfigError("unknown op '" + std::string(name) + "'");
      cases.push_back(*it);
    }
  } else {
    cases = all;
  }
  if (s.flag("negative_control")) cases.push_back(corrupted_gradcheck_case());

  Resolved r{{"seed", std::to_string(o.seed)},
             {"probes", std::to_string(o.probes)},
             {"tolerance", fixed(o.tolerance, 8)},
             {"h", fixed(o.h, 8)},
             {"ops", s.str("ops", "all")},
             {"negative_control", s.flag("negative_control") ? "true" : "false"}};
  echo("gradcheck", r);

  const GradcheckReport report = run_gradcheck(cases, o);
  if (report.vacuous) std::cerr << "warning: no ops selected, gradcheck passes vacuously\n";
  json rows = json::array();
  for (const GradcheckResult& g : report.results) {
    std::cout << (g.passed ? "PASS " : "FAIL ") << std::left << std::setw(18) << g.name << " probes " << g.probes
              << " rejected " << g.rejected << " max_rel_error " << std::scientific << std::setprecision(3)
              << g.max_rel_error << std::defaultfloat << '\n';
    rows.push_back({{"name", g.name},
                    {"probes", g.probes},
                    {"rejected", g.rejected},
                    {"max_rel_error", g.max_rel_error},
                    {"passed", g.passed}});
  }
  std::cout << (report.passed ? "gradcheck passed" : "gradcheck FAILED") << (report.vacuous ? " (vacuous)" : "")
            << '\n';
  if (s.has("out")) {
    write_json(output_dir(s) / "gradcheck.json", {{"command", "gradcheck"},
                                                  {"config", config_json(r)},
                                                  {"passed", report.passed},
                                                  {"vacuous", report.vacuous},
                                                  {"results", rows}});
  }
  return report.passed ? kOk : kCheckFailed;
}

int cmd_wlcheck(const Settings& s) {
  WlFixtureOptions o;
  o.seed = s.u64("seed", 0);
  o.random_isomorphic_pairs = s.count("random_pairs", o.random_isomorphic_pairs);
  Resolved r{{"seed", std::to_string(o.seed)}, {"random_pairs", std::to_string(o.random_isomorphic_pairs)}};
  echo("wlcheck", r);

  const auto verdicts = check_wl_fixtures(wl_fixtures(o));
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // ok, total
  std::vector<std::string> order;
  json rows = json::array();
  bool ok = true;
  for (const WlVerdict& v : verdicts) {
    const std::string group = fixture_group(v.name);
    if (!groups.contains(group)) order.push_back(group);
    auto& [good, total] = groups[group];
    good += v.ok();
    ++total;
    ok = ok && v.ok();
    if (!v.ok())
      std::cout << "MISMATCH " << v.name << ": expected " << (v.expected ? "distinguishable" : "indistinguishable")
                << ", refinement to a fixed point says " << (v.distinguishable ? "distinguishable" : "indistinguishable")
                << " (one round: " << (v.distinguishable_one_round ? "distinguishable" : "indistinguishable") << ")\n";
    rows.push_back({{"name", v.name},
                    {"expected_distinguishable", v.expected},
                    {"distinguishable", v.distinguishable},
                    {"distinguishable_one_round", v.distinguishable_one_round}});
  }
  for (const std::string& g : order) {
    const auto [good, total] = groups[g];
    std::cout << (good == total ? "ok   " : "FAIL ") << g << ": " << good << "/" << total << " as expected\n";
  }
  std::cout << (ok ? "wlcheck passed" : "wlcheck FAILED") << '\n';
  if (s.has("out"))
    write_json(output_dir(s) / "wlcheck.json",
               {{"command", "wlcheck"}, {"config", config_json(r)}, {"passed", ok}, {"pairs", rows}});
  return ok ? kOk : kCheckFailed;
}

int cmd_calibrate(const Settings& s) {
  const std::string labeler_name = s.str("labeler", "cycle");
  const auto labeler = parse_labeler(labeler_name);
  if (!labeler || *labeler == Labeler::csl) throw ConfigError("calibrate needs a binary labeler, got '" + labeler_name + "'");
  const NodeRange nodes = parse_range(s.str("nodes", "16"));
  if (nodes.min != nodes.max) throw ConfigError("calibrate takes a single node count");
  CalibrationOptions co;
  co.seed = s.u64("seed", 0);
  co.samples = s.count("samples", co.samples);
  const std::size_t validation = s.count("validation_samples", 10000);

  Resolved r{{"labeler", labeler_name},
             {"nodes", std::to_string(nodes.min)},
             {"seed", std::to_string(co.seed)},
             {"samples", std::to_string(co.samples)},
             {"validation_samples", std::to_string(validation)}};
  echo("calibrate", r);

  const CalibrationResult c = calibrate_p(nodes.min, *labeler, co);
  const double rate = positive_rate(nodes.min, *labeler, c.p, validation, derive_seed(co.seed, kValidation));
  const bool ok = rate >= 0.4 && rate <= 0.6;
  std::cout << "p " << fixed(c.p, 8) << '\n'
            << "calibration positive rate " << fixed(c.positive_rate) << '\n'
            << "validation positive rate " << fixed(rate) << " over " << validation << " fresh graphs"
            << (ok ? "" : " (outside [0.4, 0.6])") << '\n';
  if (s.has("out"))
    write_json(output_dir(s) / "calibration.json", {{"command", "calibrate"},
                                                   {"config", config_json(r)},
                                                   {"p", c.p},
                                                   {"calibration_positive_rate", c.positive_rate},
                                                   {"validation_positive_rate", rate}});
  return ok ? kOk : kCheckFailed;
}

}  // namespace expgnn::cli
