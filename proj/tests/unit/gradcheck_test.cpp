#include <gtest/gtest.h>

#include "expgnn/gradcheck.hpp"
#include "expgnn/ops.hpp"

using namespace expgnn;

TEST(Gradcheck, EveryOperationPasses) {
  GradcheckOptions o;
  o.probes = 10;
  o.seed = 17;
  for (const GradcheckCase& c : default_gradcheck_cases()) {
    const GradcheckResult r = run_gradcheck(c, o);
    EXPECT_TRUE(r.passed) << c.name << " max_rel_error " << r.max_rel_error;
    EXPECT_EQ(r.probes, 10u);
  }
}

TEST(Gradcheck, CorruptedRuleFails) {
  GradcheckOptions o;
  o.probes = 5;
  const GradcheckResult r = run_gradcheck(corrupted_gradcheck_case(), o);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 1e-2);
}

TEST(Gradcheck, EmptySuiteIsVacuous) {
  const GradcheckReport r = run_gradcheck(std::span<const GradcheckCase>{});
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.vacuous);
}

TEST(Gradcheck, CoversTheOperationSet) {
  std::vector<std::string> names;
  for (const GradcheckCase& c : default_gradcheck_cases()) names.push_back(c.name);
  for (const char* op : {"matmul", "matmul_nt", "transpose", "add", "mul", "scale", "add_bias", "mul_gain", "relu",
                         "masked_softmax", "standardize_rows", "layer_norm", "concat_last", "reduce_max_rows",
                         "gather_rows", "sum", "slice_cols", "cross_entropy", "attention_head", "layer", "end_to_end"})
    EXPECT_NE(std::find(names.begin(), names.end(), op), names.end()) << op;
}

TEST(Gradcheck, KinkProbesAreRedrawn) {
  // Inputs on a coarse grid hit the ReLU kink at 0 often.
  GradcheckCase c{"relu_grid",
                  [](Rng& rng) {
                    Tensor t = Tensor::matrix(1, 4);
                    for (double& x : t.values()) x = static_cast<double>(uniform_index(rng, 3)) - 1.0;
                    return std::vector<Tensor>{t};
                  },
                  [](Tape&, std::span<const Var> xs) { return relu(xs[0]); }};
  GradcheckOptions o;
  o.probes = 3;
  const GradcheckResult r = run_gradcheck(c, o);
  EXPECT_GT(r.rejected, 0u);
}
