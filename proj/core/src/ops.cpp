#include "expgnn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "expgnn/errors.hpp"

namespace expgnn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMatrix>;
using View = Eigen::Map<RowMatrix>;

ConstView view(const Tensor& t) {
  return ConstView(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
View view(Tensor& t) {
  return View(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

Tape& tape_of(Var v) {
  if (!v.valid()) throw ContractError("operation on an unbound variable");
  return *v.tape();
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + to_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

void require_bias_row(const Tensor& x, const Tensor& row, const char* op) {
  require_matrix(x, op);
  require_matrix(row, op);
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw DimensionError(std::string(op) + ": cannot broadcast " + to_string(row.shape()) + " over " +
                         to_string(x.shape()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions differ for " + to_string(av.shape()) + " x " +
                         to_string(bv.shape()));
  }
  Tensor out = Tensor::matrix(av.rows(), bv.cols());
  view(out).noalias() = view(av) * view(bv);
  return tape_of(a).record(std::move(out), {a, b}, [](const BackwardArgs& args) {
    const auto g = view(args.grad_output);
    if (args.grads[0]) view(*args.grads[0]).noalias() += g * view(*args.inputs[1]).transpose();
    if (args.grads[1]) view(*args.grads[1]).noalias() += view(*args.inputs[0]).transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul_nt");
  require_matrix(bv, "matmul_nt");
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ for " + to_string(av.shape()) + " x " +
                         to_string(bv.shape()) + "^T");
  }
  Tensor out = Tensor::matrix(av.rows(), bv.rows());
  view(out).noalias() = view(av) * view(bv).transpose();
  return tape_of(a).record(std::move(out), {a, b}, [](const BackwardArgs& args) {
    const auto g = view(args.grad_output);
    if (args.grads[0]) view(*args.grads[0]).noalias() += g * view(*args.inputs[1]);
    if (args.grads[1]) view(*args.grads[1]).noalias() += g.transpose() * view(*args.inputs[0]);
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  require_matrix(av, "transpose");
  Tensor out = Tensor::matrix(av.cols(), av.rows());
  view(out) = view(av).transpose();
  return tape_of(a).record(std::move(out), {a}, [](const BackwardArgs& args) {
    if (args.grads[0]) view(*args.grads[0]) += view(args.grad_output).transpose();
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out += b.value();
  return tape_of(a).record(std::move(out), {a, b}, [](const BackwardArgs& args) {
    for (Tensor* g : args.grads)
      if (g) *g += args.grad_output;
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape(av, bv, "mul");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [](const BackwardArgs& args) {
    const Tensor& g = args.grad_output;
    if (Tensor* ga = args.grads[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * (*args.inputs[1])[i];
    if (Tensor* gb = args.grads[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * (*args.inputs[0])[i];
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  out *= factor;
  return tape_of(a).record(std::move(out), {a}, [factor](const BackwardArgs& args) {
    if (Tensor* ga = args.grads[0])
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += factor * args.grad_output[i];
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_bias_row(xv, bv, "add_bias");
  Tensor out = xv;
  view(out).rowwise() += view(bv).row(0);
  return tape_of(x).record(std::move(out), {x, bias}, [](const BackwardArgs& args) {
    if (args.grads[0]) *args.grads[0] += args.grad_output;
    if (args.grads[1]) view(*args.grads[1]).row(0) += view(args.grad_output).colwise().sum();
  });
}

Var mul_gain(Var x, Var gain) {
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  require_bias_row(xv, gv, "mul_gain");
  Tensor out = xv;
  view(out).array().rowwise() *= view(gv).row(0).array();
  return tape_of(x).record(std::move(out), {x, gain}, [](const BackwardArgs& args) {
    const auto g = view(args.grad_output).array();
    if (args.grads[0]) view(*args.grads[0]).array() += g.rowwise() * view(*args.inputs[1]).row(0).array();
    if (args.grads[1])
      view(*args.grads[1]).row(0).array() += (g * view(*args.inputs[0]).array()).colwise().sum();
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  double margin = std::numeric_limits<double>::infinity();
  for (double& v : out.values()) {
    margin = std::min(margin, std::abs(v));
    if (v < 0.0) v = 0.0;
  }
  Tape& tape = tape_of(x);
  tape.note_kink_margin(margin);
  return tape.record(std::move(out), {x}, [](const BackwardArgs& args) {
    Tensor* gx = args.grads[0];
    if (!gx) return;
    const Tensor& in = *args.inputs[0];
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in[i] > 0.0) (*gx)[i] += args.grad_output[i];
  });
}

Var masked_softmax(Var x, const BoolMatrix& mask) {
  const Tensor& xv = x.value();
  require_matrix(xv, "masked_softmax");
  if (mask.rows() != xv.rows() || mask.cols() != xv.cols()) {
    throw DimensionError("masked_softmax: mask is " + std::to_string(mask.rows()) + "x" +
                         std::to_string(mask.cols()) + ", scores are " + to_string(xv.shape()));
  }
  const std::size_t n = xv.rows();
  const std::size_t m = xv.cols();
  Tensor out = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto allowed = mask.row(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
      if (allowed[j]) top = std::max(top, xv(i, j));
    if (top == -std::numeric_limits<double>::infinity()) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!allowed[j]) continue;
      const double e = std::exp(xv(i, j) - top);
      out(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < m; ++j) out(i, j) /= total;
  }
  return tape_of(x).record(std::move(out), {x}, [](const BackwardArgs& args) {
    Tensor* gx = args.grads[0];
    if (!gx) return;
    const Tensor& y = args.output;
    const Tensor& g = args.grad_output;
    const std::size_t rows = y.rows();
    const std::size_t cols = y.cols();
    for (std::size_t i = 0; i < rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += y(i, j) * g(i, j);
      for (std::size_t j = 0; j < cols; ++j) (*gx)(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var standardize_rows(Var a, double eps) {
  const Tensor& av = a.value();
  require_matrix(av, "standardize_rows");
  const std::size_t n = av.rows();
  const std::size_t h = av.cols();
  Tensor out = Tensor::matrix(n, h);
  // Per-row divisor and whether the clamp was active.
  std::vector<double> divisor(n, eps);
  std::vector<bool> clamped(n, true);
  if (h > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < h; ++j) mean += av(i, j);
      mean /= static_cast<double>(h);
      double var = 0.0;
      for (std::size_t j = 0; j < h; ++j) var += (av(i, j) - mean) * (av(i, j) - mean);
      const double sigma = std::sqrt(var / static_cast<double>(h));
      if (sigma >= eps) {
        divisor[i] = sigma;
        clamped[i] = false;
      }
      for (std::size_t j = 0; j < h; ++j) out(i, j) = (av(i, j) - mean) / divisor[i];
    }
  }
  return tape_of(a).record(std::move(out), {a},
                           [divisor = std::move(divisor), clamped = std::move(clamped)](const BackwardArgs& args) {
                             Tensor* ga = args.grads[0];
                             if (!ga) return;
                             const Tensor& z = args.output;
                             const Tensor& g = args.grad_output;
                             const std::size_t rows = z.rows();
                             const std::size_t cols = z.cols();
                             if (cols == 0) return;
                             const double inv_h = 1.0 / static_cast<double>(cols);
                             for (std::size_t i = 0; i < rows; ++i) {
                               double g_mean = 0.0;
                               double gz_mean = 0.0;
                               for (std::size_t j = 0; j < cols; ++j) {
                                 g_mean += g(i, j);
                                 gz_mean += g(i, j) * z(i, j);
                               }
                               g_mean *= inv_h;
                               gz_mean *= inv_h;
                               if (clamped[i]) gz_mean = 0.0;
                               for (std::size_t j = 0; j < cols; ++j)
                                 (*ga)(i, j) += (g(i, j) - g_mean - z(i, j) * gz_mean) / divisor[i];
                             }
                           });
}

Var layer_norm(Var x, Var weight, Var gain, Var bias) {
  return add_bias(mul_gain(standardize_rows(matmul(x, weight)), gain), bias);
}

Var concat_last(std::span<const Var> xs) {
  if (xs.empty()) throw DimensionError("concat_last: no inputs");
  const std::size_t n = xs.front().value().rows();
  std::size_t width = 0;
  for (const Var& v : xs) {
    const Tensor& t = v.value();
    require_matrix(t, "concat_last");
    if (t.rows() != n) {
      throw DimensionError("concat_last: leading dimension " + std::to_string(t.rows()) + " differs from " +
                           std::to_string(n));
    }
    width += t.cols();
  }
  Tensor out = Tensor::matrix(n, width);
  std::size_t offset = 0;
  for (const Var& v : xs) {
    const Tensor& t = v.value();
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(t.data() + i * t.cols(), t.cols(), out.data() + i * width + offset);
    offset += t.cols();
  }
  return tape_of(xs.front()).record(std::move(out), xs, [](const BackwardArgs& args) {
    const Tensor& g = args.grad_output;
    const std::size_t rows = g.rows();
    std::size_t off = 0;
    for (std::size_t k = 0; k < args.inputs.size(); ++k) {
      const std::size_t w = args.inputs[k]->cols();
      if (Tensor* gk = args.grads[k]) {
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < w; ++j) (*gk)(i, j) += g(i, off + j);
      }
      off += w;
    }
  });
}

Var reduce_max_rows(Var x, const std::vector<bool>& valid) {
  const Tensor& xv = x.value();
  require_matrix(xv, "reduce_max_rows");
  if (valid.size() != xv.rows()) {
    throw DimensionError("reduce_max_rows: validity mask has " + std::to_string(valid.size()) +
                         " entries for " + std::to_string(xv.rows()) + " rows");
  }
  if (std::none_of(valid.begin(), valid.end(), [](bool b) { return b; }))
    throw EmptyGraphError("reduce_max_rows: no valid row");
  const std::size_t d = xv.cols();
  std::vector<std::size_t> argmax(d, 0);
  Tensor out = Tensor::matrix(1, d);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      if (!valid[i]) continue;
      const double v = xv(i, j);
      if (v > best) {
        second = best;
        best = v;
        argmax[j] = i;
      } else if (v > second) {
        second = v;
      }
    }
    out(0, j) = best;
    // Exact ties are typically ReLU-clamped zeros, which carry no gradient.
    if (best > second && std::isfinite(second)) margin = std::min(margin, best - second);
  }
  Tape& tape = tape_of(x);
  tape.note_kink_margin(margin);
  return tape.record(std::move(out), {x}, [argmax = std::move(argmax)](const BackwardArgs& args) {
    Tensor* gx = args.grads[0];
    if (!gx) return;
    for (std::size_t j = 0; j < argmax.size(); ++j) (*gx)(argmax[j], j) += args.grad_output(0, j);
  });
}

Var gather_rows(Var table, std::span<const std::size_t> indices) {
  const Tensor& tv = table.value();
  require_matrix(tv, "gather_rows");
  const std::size_t d = tv.cols();
  Tensor out = Tensor::matrix(indices.size(), d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= tv.rows()) {
      throw ContractError("gather_rows: index " + std::to_string(indices[i]) + " outside table of " +
                          std::to_string(tv.rows()) + " rows");
    }
    std::copy_n(tv.data() + indices[i] * d, d, out.data() + i * d);
  }
  std::vector<std::size_t> picked(indices.begin(), indices.end());
  return tape_of(table).record(std::move(out), {table}, [picked = std::move(picked)](const BackwardArgs& args) {
    Tensor* gt = args.grads[0];
    if (!gt) return;
    const std::size_t cols = gt->cols();
    for (std::size_t i = 0; i < picked.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) (*gt)(picked[i], j) += args.grad_output(i, j);
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape_of(x).record(Tensor::scalar(total), {x}, [](const BackwardArgs& args) {
    Tensor* gx = args.grads[0];
    if (!gx) return;
    const double g = args.grad_output.item();
    for (double& v : gx->values()) v += g;
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  require_matrix(xv, "slice_cols");
  if (begin + count > xv.cols()) {
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + to_string(xv.shape()));
  }
  Tensor out = Tensor::matrix(xv.rows(), count);
  view(out) = view(xv).middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
  return tape_of(x).record(std::move(out), {x}, [begin, count](const BackwardArgs& args) {
    if (Tensor* gx = args.grads[0])
      view(*gx).middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)) +=
          view(args.grad_output);
  });
}

Var cross_entropy(Var logits, std::size_t target) {
  const Tensor& z = logits.value();
  require_matrix(z, "cross_entropy");
  if (z.rows() != 1) throw DimensionError("cross_entropy: expected a row of logits, got " + to_string(z.shape()));
  if (target >= z.cols()) {
    throw ContractError("cross_entropy: target " + std::to_string(target) + " outside " +
                        std::to_string(z.cols()) + " classes");
  }
  const double top = *std::max_element(z.values().begin(), z.values().end());
  double total = 0.0;
  for (double v : z.values()) total += std::exp(v - top);
  const double log_norm = top + std::log(total);
  return tape_of(logits).record(Tensor::scalar(log_norm - z[target]), {logits},
                                [target, log_norm](const BackwardArgs& args) {
                                  Tensor* gz = args.grads[0];
                                  if (!gz) return;
                                  const double g = args.grad_output.item();
                                  const Tensor& zv = *args.inputs[0];
                                  for (std::size_t c = 0; c < zv.size(); ++c)
                                    (*gz)[c] += g * (std::exp(zv[c] - log_norm) - (c == target ? 1.0 : 0.0));
                                });
}

}  // namespace expgnn
