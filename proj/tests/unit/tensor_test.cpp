#include <gtest/gtest.h>

#include <cmath>

#include "expgnn/errors.hpp"
#include "expgnn/tensor.hpp"

using namespace expgnn;

TEST(Tensor, ShapeAndIndexing) {
  Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_EQ(t[4], 5.0);
  EXPECT_EQ(to_string(t.shape()), "[2x3]");
}

TEST(Tensor, ScalarItem) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_ANY_THROW(Tensor::row({1, 2}).item());
}

TEST(Tensor, RowsOfNonMatrixThrows) { EXPECT_ANY_THROW(Tensor({2, 2, 2}).rows()); }

TEST(Tensor, ValueCountMustMatchShape) { EXPECT_ANY_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3})); }

TEST(Tensor, Arithmetic) {
  Tensor a = Tensor::row({1, 2});
  a += Tensor::row({3, 4});
  a *= 0.5;
  EXPECT_EQ(a, Tensor::row({2, 3}));
  EXPECT_ANY_THROW(a += Tensor::row({1, 2, 3}));
}

TEST(Tensor, Finite) {
  Tensor a = Tensor::row({1, 2});
  EXPECT_TRUE(a.all_finite());
  a[1] = std::nan("");
  EXPECT_FALSE(a.all_finite());
}

TEST(Tensor, MaxAbsDiff) {
  EXPECT_DOUBLE_EQ(max_abs_diff(Tensor::row({1, 2}), Tensor::row({1.5, 0})), 2.0);
}

TEST(BoolMatrix, Basics) {
  BoolMatrix m = BoolMatrix::identity(3);
  EXPECT_EQ(m.count(), 3u);
  m.set(0, 2);
  EXPECT_TRUE(m.transposed().get(2, 0));
  EXPECT_FALSE(m.transposed().get(0, 2));
  BoolMatrix z = BoolMatrix::square(3);
  EXPECT_FALSE(z.any_in_row(1));
  z |= m;
  EXPECT_EQ(z, m);
}
