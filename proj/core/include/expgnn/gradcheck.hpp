#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "expgnn/random.hpp"
#include "expgnn/tape.hpp"
#include "expgnn/tensor.hpp"

namespace expgnn {

/// One differentiable computation to check. `sample` draws the leaf values
/// for a probe; `build` records the computation on a tape from those leaves.
struct GradcheckCase {
  std::string name;
  std::function<std::vector<Tensor>(Rng&)> sample;
  std::function<Var(Tape&, std::span<const Var>)> build;
};

struct GradcheckOptions {
  double h = 1e-5;
  double tolerance = 1e-4;
  std::size_t probes = 100;
  /// Probes closer than this to a ReLU kink or max switch are redrawn.
  double kink_threshold = 1e-3;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  std::string name;
  std::size_t probes = 0;
  std::size_t rejected = 0;
  /// Largest over probes and leaves of |analytic - numeric|_2 / max(|analytic|_2, |numeric|_2).
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckResult> results;
  bool passed = true;
  /// No case was run; passed holds vacuously.
  bool vacuous = false;
};

/// The output of `build` is reduced to a scalar by a fixed random weighting
/// per probe, then compared to central differences on every leaf entry.
GradcheckResult run_gradcheck(const GradcheckCase& c, const GradcheckOptions& options = {});
GradcheckReport run_gradcheck(std::span<const GradcheckCase> cases, const GradcheckOptions& options = {});

/// Every differentiable operation, one layer of the model and one full
/// forward pass with the loss, on a 5-node graph.
std::vector<GradcheckCase> default_gradcheck_cases();

/// A ReLU whose backward rule is off by a factor; it must fail.
GradcheckCase corrupted_gradcheck_case();

}  // namespace expgnn
