#include "expgnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "expgnn/errors.hpp"
#include "expgnn/ops.hpp"

namespace expgnn {

namespace {

enum SeedDomain : std::uint64_t { kInitDomain = 1, kOrderDomain = 2, kNoiseDomain = 3, kEvalDomain = 4 };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; worker w takes
// i = w, w + threads, ... so the assignment does not depend on timing.
template <typename Fn>
void for_each_strided(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(w, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

AdamState AdamState::for_params(std::span<const Tensor* const> params, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const Tensor* p : params) {
    s.m.push_back(zeros_like(*p));
    s.v.push_back(zeros_like(*p));
  }
  return s;
}

void adam_step(AdamState& state, std::span<const Tensor> grads, std::span<Tensor* const> params) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw ContractError("adam_step: " + std::to_string(grads.size()) + " gradients, " +
                        std::to_string(params.size()) + " parameters, " + std::to_string(state.m.size()) +
                        " moment slots");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i]->shape() || state.m[i].shape() != params[i]->shape())
      throw ContractError("adam_step: gradient " + std::to_string(i) + " has shape " + to_string(grads[i].shape()) +
                          ", parameter has " + to_string(params[i]->shape()));
  }
  const AdamHyper& h = state.hyper;
  ++state.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * g[k];
      v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * g[k] * g[k];
      p[k] -= h.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + h.eps);
    }
  }
}

SpecSource::SpecSource(DatasetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.family == Family::tud) throw ContractError("SpecSource cannot stream a tud corpus; use FixedSource");
}

std::optional<std::size_t> SpecSource::size() const {
  if (spec_.family == Family::csl) return spec_.count;
  return std::nullopt;
}

FixedSource::FixedSource(std::vector<LabeledGraph> graphs) : graphs_(std::move(graphs)) {
  if (graphs_.empty()) throw ContractError("FixedSource needs at least one graph");
}

BatchResult batch_gradients(const ModelParams& params, const ModelConfig& cfg, std::span<const LabeledGraph> batch,
                            std::span<const std::uint64_t> noise_seeds, bool training, std::size_t threads) {
  if (noise_seeds.size() != batch.size()) throw ContractError("batch_gradients: one noise seed per graph");
  const auto tensors = params.tensors();
  threads = std::max<std::size_t>(1, std::min(threads, batch.size()));

  struct Worker {
    std::vector<Tensor> grads;
    std::vector<double> losses;
    std::size_t correct = 0;
  };
  std::vector<Worker> workers(threads);
  for (auto& w : workers) {
    for (const Tensor* t : tensors) w.grads.push_back(zeros_like(*t));
  }
  std::vector<double> losses(batch.size(), 0.0);

  for_each_strided(batch.size(), threads, [&](std::size_t w, std::size_t i) {
    const LabeledGraph& item = batch[i];
    Rng rng(noise_seeds[i]);
    const ForwardNoise noise = sample_noise(item.graph, cfg, rng, training);
    Tape tape;
    const BoundParams bound = bind(tape, params, cfg);
    const Var logits = forward(tape, item.graph, bound, cfg, noise);
    const Var loss = cross_entropy(logits, static_cast<std::size_t>(item.class_id));
    losses[i] = loss.value().item();
    if (!std::isfinite(losses[i])) {
      throw DivergenceError("non-finite loss " + std::to_string(losses[i]) + " on batch item " + std::to_string(i));
    }
    if (predict(logits.value()) == static_cast<std::size_t>(item.class_id)) ++workers[w].correct;
    const Gradients grads = tape.backward(loss);
    const auto leaves = bound.leaves();
    for (std::size_t k = 0; k < leaves.size(); ++k) workers[w].grads[k] += grads.of(leaves[k]);
  });

  BatchResult result;
  result.grads = std::move(workers[0].grads);
  result.correct = workers[0].correct;
  for (std::size_t w = 1; w < threads; ++w) {
    for (std::size_t k = 0; k < result.grads.size(); ++k) result.grads[k] += workers[w].grads[k];
    result.correct += workers[w].correct;
  }
  const double inv = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  for (Tensor& g : result.grads) g *= inv;
  result.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) * inv;
  return result;
}

TrainResult train(const GraphSource& source, const ModelConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (options.batch_size == 0) throw ContractError("train: batch_size must be positive");
  const auto start = Clock::now();

  TrainResult result;
  Rng init_rng(derive_seed(options.seed, kInitDomain));
  result.params = ModelParams::initialize(cfg, init_rng);

  std::vector<Tensor*> params;
  for (const Tensor* t : result.params.tensors()) params.push_back(const_cast<Tensor*>(t));
  AdamState adam = AdamState::for_params(params, options.adam);

  // Finite sources are visited in a fresh shuffled order every epoch.
  const std::optional<std::size_t> finite = source.size();
  std::vector<std::size_t> order;
  std::uint64_t order_epoch = UINT64_MAX;
  const auto index_of = [&](std::uint64_t k) -> std::uint64_t {
    if (!finite) return k;
    const std::uint64_t epoch = k / *finite;
    if (epoch != order_epoch) {
      order.resize(*finite);
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(options.seed, kOrderDomain, epoch));
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
      order_epoch = epoch;
    }
    return order[k % *finite];
  };

  const bool training = true;
  double interval_loss = 0.0;
  std::size_t interval_correct = 0;
  std::size_t interval_seen = 0;
  std::size_t interval_steps = 0;
  std::vector<LabeledGraph> batch;
  std::vector<std::uint64_t> seeds;

  for (std::size_t step = 0; step < options.steps; ++step) {
    batch.clear();
    seeds.clear();
    for (std::size_t i = 0; i < options.batch_size; ++i) {
      const std::uint64_t k = static_cast<std::uint64_t>(step) * options.batch_size + i;
      batch.push_back(source.get(index_of(k)));
      seeds.push_back(derive_seed(options.seed, kNoiseDomain, step, i));
    }
    BatchResult br;
    try {
      br = batch_gradients(result.params, cfg, batch, seeds, training, options.threads);
    } catch (const DivergenceError& e) {
      throw DivergenceError("step " + std::to_string(step) + ": " + e.what());
    }
    adam_step(adam, br.grads, params);

    interval_loss += br.mean_loss;
    interval_correct += br.correct;
    interval_seen += batch.size();
    ++interval_steps;
    const bool last = step + 1 == options.steps;
    if ((options.log_every && (step + 1) % options.log_every == 0) || last) {
      LogRecord rec{step + 1, interval_loss / static_cast<double>(interval_steps),
                    static_cast<double>(interval_correct) / static_cast<double>(interval_seen),
                    seconds_since(start)};
      result.report.log.push_back(rec);
      if (options.on_log) options.on_log(rec);
      interval_loss = 0.0;
      interval_correct = interval_seen = interval_steps = 0;
    }
  }
  result.report.steps = options.steps;
  result.report.seconds = seconds_since(start);
  return result;
}

TrainResult train(const DatasetSpec& spec, const ModelConfig& cfg, std::size_t steps, std::size_t batch_size,
                  std::uint64_t seed) {
  TrainOptions options;
  options.steps = steps;
  options.batch_size = batch_size;
  options.seed = seed;
  return train(SpecSource(spec), cfg, options);
}

std::size_t predict(const Tensor& logits) {
  const auto values = logits.values();
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

EvalStats evaluate(const ModelParams& params, const ModelConfig& cfg, std::span<const LabeledGraph> graphs,
                   std::size_t resamples, std::uint64_t seed, std::string name, std::size_t threads) {
  if (resamples == 0) throw ContractError("evaluate: resamples must be at least 1");
  if (graphs.empty()) throw ContractError("evaluate: empty evaluation set");

  // Masks do not depend on the resample.
  std::vector<HeadMaskSet> masks(graphs.size());
  std::vector<std::vector<char>> hits(resamples, std::vector<char>(graphs.size(), 0));
  for_each_strided(graphs.size(), threads, [&](std::size_t, std::size_t i) {
    masks[i] = build_head_masks(graphs[i].graph, cfg);
    for (std::size_t r = 0; r < resamples; ++r) {
      Rng rng(derive_seed(seed, kEvalDomain, r, i));
      const ForwardNoise noise = sample_noise(graphs[i].graph, cfg, rng, false);
      Tape tape;
      const BoundParams bound = bind(tape, params, cfg);
      const Var logits = forward(tape, graphs[i].graph, masks[i], bound, cfg, noise);
      hits[r][i] = predict(logits.value()) == static_cast<std::size_t>(graphs[i].class_id);
    }
    masks[i] = HeadMaskSet();
  });

  std::vector<double> acc;
  for (const auto& row : hits)
    acc.push_back(static_cast<double>(std::count(row.begin(), row.end(), 1)) / static_cast<double>(graphs.size()));

  EvalStats s;
  s.name = std::move(name);
  s.resamples = resamples;
  s.instances = resamples * graphs.size();
  s.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
  double sq = 0.0;
  for (double a : acc) sq += (a - s.mean) * (a - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(acc.size()));
  s.min = *std::min_element(acc.begin(), acc.end());
  s.max = *std::max_element(acc.begin(), acc.end());
  return s;
}

void write_report(std::ostream& out, const TrainReport& report) {
  for (const LogRecord& r : report.log) {
    out << "log step=" << r.step << " loss=" << fixed(r.mean_loss, 6) << " acc=" << fixed(r.train_accuracy)
        << " seconds=" << fixed(r.seconds, 1) << '\n';
  }
  for (const EvalStats& e : report.evaluations) {
    out << "eval name=" << e.name << " mean=" << fixed(e.mean) << " std=" << fixed(e.std) << " min=" << fixed(e.min)
        << " max=" << fixed(e.max) << " resamples=" << e.resamples << " instances=" << e.instances << '\n';
  }
}

void write_results_csv(std::ostream& out, std::span<const EvalStats> rows) {
  out << "name,mean,std,min,max,resamples,instances\n";
  for (const EvalStats& e : rows) {
    out << e.name << ',' << fixed(e.mean) << ',' << fixed(e.std) << ',' << fixed(e.min) << ',' << fixed(e.max) << ','
        << e.resamples << ',' << e.instances << '\n';
  }
}

void write_results_table(std::ostream& out, std::span<const EvalStats> rows) {
  std::size_t width = 4;
  for (const EvalStats& e : rows) width = std::max(width, e.name.size());
  const auto col = [&](const std::string& s) { out << std::setw(8) << s; };
  out << std::left << std::setw(static_cast<int>(width)) << "set" << std::right;
  col("mean");
  col("std");
  col("max");
  col("min");
  out << '\n';
  for (const EvalStats& e : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << e.name << std::right;
    col(fixed(e.mean));
    col(fixed(e.std));
    col(fixed(e.max));
    col(fixed(e.min));
    out << '\n';
  }
}

}  // namespace expgnn
