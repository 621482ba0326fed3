#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace taxelgraph {

// Dense row-major matrix of doubles. Vectors are 1 x n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix row_vector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double scale);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);
// a * b^T
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

// Adds the 1 x cols bias to every row of m.
void add_row_bias(Matrix& m, const Matrix& bias);
// Column sums as a 1 x cols matrix.
Matrix column_sums(const Matrix& m);

// Column-wise maxima of a matrix with the row that attained each one.
// Ties go to the lowest row index, and gradient flows only to that row.
struct RowMax {
  std::vector<double> values;
  std::vector<std::size_t> argmax;
};

RowMax max_reduce_rows(const Matrix& m);

// Routes a gradient w.r.t. the column maxima back onto a rows x cols matrix.
Matrix max_reduce_rows_backward(const RowMax& reduced, std::span<const double> grad,
                                std::size_t rows);

}  // namespace taxelgraph
