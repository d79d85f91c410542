#include "expgnn/tasks.hpp"

#include <numeric>

#include "expgnn/errors.hpp"

namespace expgnn {

namespace {

enum TaskDomain : std::uint64_t { kCalibrate = 10, kTrainData = 11, kEvalData = 12, kPermute = 13 };

struct Builder {
  std::uint64_t seed;
  const TaskOptions& options;
  TaskSuite& suite;
  Labeler labeler;

  double calibrated(std::size_t n) {
    CalibrationOptions co;
    co.samples = options.calibration_samples;
    co.seed = derive_seed(seed, kCalibrate, n, static_cast<std::uint64_t>(labeler));
    return calibrate_p(n, labeler, co).p;
  }

  void train_uniform(std::size_t n) {
    const double p = calibrated(n);
    suite.train.family = Family::uniform;
    suite.train.nodes = {n, n};
    suite.train.edge_prob = p;
    suite.train.labeler = labeler;
    suite.train.seed = derive_seed(seed, kTrainData);
    suite.calibrated.emplace_back("training", p);
  }

  void eval_uniform(std::size_t n) {
    const double p = n == suite.train.nodes.min && suite.train.edge_prob ? *suite.train.edge_prob : calibrated(n);
    std::string name = "uniform " + std::to_string(n);
    suite.calibrated.emplace_back(name, p);
    suite.evals.push_back(uniform_eval_set(std::move(name), n, p, labeler, options.eval_count, next_eval_seed()));
  }

  std::uint64_t next_eval_seed() { return derive_seed(seed, kEvalData, suite.evals.size()); }
};

}  // namespace

std::vector<std::string_view> task_names() { return {"csl", "cycle", "clique4", "path", "degree7"}; }

EvalSet uniform_eval_set(std::string name, std::size_t n, double p, Labeler labeler, std::size_t count,
                         std::uint64_t seed) {
  DatasetSpec spec;
  spec.family = Family::uniform;
  spec.nodes = {n, n};
  spec.edge_prob = p;
  spec.labeler = labeler;
  spec.count = count;
  spec.seed = seed;
  return {std::move(name), generate(spec)};
}

EvalSet tree_eval_set(std::string name, std::size_t n, std::size_t count, std::uint64_t seed) {
  EvalSet set{std::move(name), {}};
  for (std::uint64_t k = 0; k < count; ++k) {
    Rng rng(seed ^ k);
    const bool extra = bernoulli(rng, 0.5);
    set.graphs.push_back(gen_tree(n, extra, rng));
  }
  return set;
}

EvalSet lines_cycles_eval_set(std::string name, std::size_t count, std::uint64_t seed) {
  EvalSet set{std::move(name), {}};
  for (std::uint64_t k = 0; k < count; ++k) {
    Rng rng(seed ^ k);
    const std::size_t len = uniform_between(rng, 3, 64);
    set.graphs.push_back(gen_line_or_cycle(len, bernoulli(rng, 0.5)));
  }
  return set;
}

TaskSuite make_task(std::string_view name, std::uint64_t seed, const TaskOptions& options) {
  TaskSuite suite;
  suite.name = std::string(name);
  const std::size_t n = options.train_nodes;

  if (name == "csl") {
    suite.train.family = Family::csl;
    suite.train.nodes = {41, 41};
    suite.train.labeler = Labeler::csl;
    suite.train.count = std::size(kCslSkips);
    suite.train.seed = derive_seed(seed, kTrainData);
    suite.n_classes = std::size(kCslSkips);
    suite.head_drop_p = 0.0;
    suite.default_steps = 20000;
    suite.default_batch = 10;
    suite.default_resamples = 15;
    // The same ten graphs, each under a random node order.
    EvalSet set{"csl", {}};
    Rng rng(derive_seed(seed, kPermute));
    for (const LabeledGraph& lg : generate(suite.train)) {
      std::vector<NodeId> perm(lg.graph.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
      set.graphs.push_back({permute(lg.graph, perm), lg.class_id});
    }
    suite.evals.push_back(std::move(set));
    return suite;
  }

  Builder b{seed, options, suite, Labeler::cycle};
  if (name == "cycle") {
    b.labeler = Labeler::cycle;
    b.train_uniform(n);
    b.eval_uniform(n);
    b.eval_uniform(32);
    b.eval_uniform(64);
    suite.evals.push_back(tree_eval_set("trees 64", 64, options.eval_count, b.next_eval_seed()));
    suite.evals.push_back(tree_eval_set("trees 32", 32, options.eval_count, b.next_eval_seed()));
    suite.evals.push_back(lines_cycles_eval_set("lines + cycles", options.eval_count, b.next_eval_seed()));
  } else if (name == "clique4") {
    b.labeler = Labeler::clique4;
    b.train_uniform(n);
    b.eval_uniform(n);
    b.eval_uniform(32);
    b.eval_uniform(64);
  } else if (name == "path") {
    b.labeler = Labeler::path;
    suite.n_node_labels = 3;
    b.train_uniform(n);
    b.eval_uniform(n);
    b.eval_uniform(32);
    b.eval_uniform(64);
    DatasetSpec paths;
    paths.family = Family::two_paths;
    paths.nodes = {2, 16};
    paths.labeler = Labeler::path;
    paths.count = options.eval_count;
    paths.seed = b.next_eval_seed();
    suite.evals.push_back({"paths", generate(paths)});
  } else if (name == "degree7") {
    b.labeler = Labeler::degree7;
    b.train_uniform(n);
    b.eval_uniform(n);
    b.eval_uniform(32);
  } else {
    throw ContractError("unknown task '" + std::string(name) + "'");
  }
  return suite;
}

void configure_model(ModelConfig& cfg, const TaskSuite& task) {
  cfg.n_node_labels = task.n_node_labels;
  cfg.n_edge_labels = 1;
  cfg.n_classes = task.n_classes;
  cfg.head_drop_p = task.head_drop_p;
}

}  // namespace expgnn
