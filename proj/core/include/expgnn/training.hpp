#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expgnn/datasets.hpp"
#include "expgnn/model.hpp"
#include "expgnn/tensor.hpp"

namespace expgnn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

struct AdamState {
  AdamHyper hyper;
  std::uint64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  /// Zero moments shaped like `params`.
  static AdamState for_params(std::span<const Tensor* const> params, AdamHyper hyper = {});
};

/// One bias-corrected Adam update of every parameter. Throws ContractError
/// if the gradients do not match the parameters one to one in shape.
void adam_step(AdamState& state, std::span<const Tensor> grads, std::span<Tensor* const> params);

/// Training graphs by index. Infinite sources are streamed from a generator.
class GraphSource {
 public:
  virtual ~GraphSource() = default;
  virtual LabeledGraph get(std::uint64_t index) const = 0;
  /// Number of distinct graphs, or nullopt for a stream.
  virtual std::optional<std::size_t> size() const = 0;
};

/// sample(spec, k) for every k; finite for the csl family.
class SpecSource final : public GraphSource {
 public:
  explicit SpecSource(DatasetSpec spec);
  LabeledGraph get(std::uint64_t index) const override { return sample(spec_, index); }
  std::optional<std::size_t> size() const override;

 private:
  DatasetSpec spec_;
};

class FixedSource final : public GraphSource {
 public:
  explicit FixedSource(std::vector<LabeledGraph> graphs);
  LabeledGraph get(std::uint64_t index) const override { return graphs_.at(index); }
  std::optional<std::size_t> size() const override { return graphs_.size(); }

 private:
  std::vector<LabeledGraph> graphs_;
};

struct LogRecord {
  std::size_t step = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainOptions {
  std::size_t steps = 1000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Steps per log record; the last record may cover fewer.
  std::size_t log_every = 100;
  /// Worker threads for the per-graph passes of a batch. Results are
  /// reproducible for a fixed thread count.
  std::size_t threads = 1;
  AdamHyper adam;
  std::function<void(const LogRecord&)> on_log;
};

struct EvalStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // population std over resamples
  double min = 0.0;
  double max = 0.0;
  std::size_t resamples = 0;
  std::size_t instances = 0;
};

struct TrainReport {
  std::vector<LogRecord> log;
  std::size_t steps = 0;
  double seconds = 0.0;
  std::vector<EvalStats> evaluations;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Loss and gradients of one batch, averaged over its graphs.
struct BatchResult {
  double mean_loss = 0.0;
  std::size_t correct = 0;
  std::vector<Tensor> grads;  // ordered like ModelParams::tensors()
};

/// Forward and backward on each graph with the noise drawn from `noise_seeds`.
BatchResult batch_gradients(const ModelParams& params, const ModelConfig& cfg, std::span<const LabeledGraph> batch,
                            std::span<const std::uint64_t> noise_seeds, bool training, std::size_t threads = 1);

/// Streams batches from `source` and applies Adam after each one. Fresh
/// identifiers and a dropout sample are drawn per graph per pass. Throws
/// DivergenceError on a non-finite loss.
TrainResult train(const GraphSource& source, const ModelConfig& cfg, const TrainOptions& options);
TrainResult train(const DatasetSpec& spec, const ModelConfig& cfg, std::size_t steps, std::size_t batch_size,
                  std::uint64_t seed);

/// Index of the largest logit, the lowest index on ties.
std::size_t predict(const Tensor& logits);

/// Accuracy over `graphs` for `resamples` independent identifier draws,
/// eval mode (no head dropout).
EvalStats evaluate(const ModelParams& params, const ModelConfig& cfg, std::span<const LabeledGraph> graphs,
                   std::size_t resamples, std::uint64_t seed, std::string name = {}, std::size_t threads = 1);

/// Line records: "log step=... loss=... acc=... seconds=..." then one
/// "eval name=... mean=... std=... min=... max=..." per evaluation set.
void write_report(std::ostream& out, const TrainReport& report);
/// Delimited rows with the header name,mean,std,min,max,resamples,instances.
void write_results_csv(std::ostream& out, std::span<const EvalStats> rows);
/// Aligned text table of the same rows.
void write_results_table(std::ostream& out, std::span<const EvalStats> rows);

}  // namespace expgnn
