#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace expgnn {

using Shape = std::vector<std::size_t>;

/// Cache-line aligned storage. Vectorized reductions then split the same way
/// on every allocation, which keeps results bit-reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

std::string to_string(const Shape& shape);

/// Dense row-major array of doubles. Almost everything in the model is a
/// rank-2 matrix; scalars are 1x1 and graph-level vectors are 1xd rows.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::initializer_list<double> values);
  static Tensor scalar(double value) { return Tensor({1, 1}, value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const {
    if (shape_.size() != 2) throw_not_matrix();
    return shape_[0];
  }
  std::size_t cols() const {
    if (shape_.size() != 2) throw_not_matrix();
    return shape_[1];
  }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Value of a 1-element tensor.
  double item() const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double value);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double factor);

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  [[noreturn]] void throw_not_matrix() const;
  Shape shape_;
  std::vector<double, AlignedAllocator<double>> data_;
};

Tensor zeros_like(const Tensor& t);

/// Max |a - b| over entries; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Row-major boolean matrix; used for attention masks and adjacency.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(std::size_t rows, std::size_t cols, bool fill = false);

  static BoolMatrix square(std::size_t n, bool fill = false) { return BoolMatrix(n, n, fill); }
  static BoolMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool get(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool value = true) { bits_[r * cols_ + c] = value ? 1 : 0; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bits_.data() + r * cols_, cols_};
  }

  std::size_t count() const;
  bool any_in_row(std::size_t r) const;
  BoolMatrix transposed() const;
  BoolMatrix& operator|=(const BoolMatrix& other);

  friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace expgnn
