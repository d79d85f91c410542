#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expgnn/datasets.hpp"
#include "expgnn/model.hpp"

namespace expgnn {

struct EvalSet {
  std::string name;
  std::vector<LabeledGraph> graphs;
};

struct TaskOptions {
  /// Node count of the uniform training graphs.
  std::size_t train_nodes = 16;
  /// Graphs per generated evaluation set.
  std::size_t eval_count = 500;
  std::size_t calibration_samples = 2000;
};

/// A training stream with the evaluation sets of one results table.
struct TaskSuite {
  std::string name;
  DatasetSpec train;
  std::vector<EvalSet> evals;
  std::size_t n_node_labels = 1;
  std::size_t n_classes = 2;
  double head_drop_p = 0.1;
  std::size_t default_steps = 1000;
  std::size_t default_batch = 32;
  std::size_t default_resamples = 1;
  /// Edge probability found for each uniform set, by set name.
  std::vector<std::pair<std::string, double>> calibrated;
};

/// csl, cycle, clique4, path, degree7.
std::vector<std::string_view> task_names();

/// Builds the suite; every random choice derives from `seed`. Throws
/// ContractError for an unknown name.
TaskSuite make_task(std::string_view name, std::uint64_t seed, const TaskOptions& options = {});

/// Copies the task's label counts, class count and dropout into `cfg`.
void configure_model(ModelConfig& cfg, const TaskSuite& task);

/// Fixed-size evaluation set of uniform graphs under `labeler`.
EvalSet uniform_eval_set(std::string name, std::size_t n, double p, Labeler labeler, std::size_t count,
                         std::uint64_t seed);
/// Random trees, half of them with one extra edge.
EvalSet tree_eval_set(std::string name, std::size_t n, std::size_t count, std::uint64_t seed);
/// Lines and cycles of length 3..64, half each in expectation.
EvalSet lines_cycles_eval_set(std::string name, std::size_t count, std::uint64_t seed);

}  // namespace expgnn
