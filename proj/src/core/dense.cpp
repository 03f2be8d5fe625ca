// Copyright 2026 The FedMeZO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedmezo/core/dense.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidDimension: return "invalid-dimension";
    case ErrorCode::kInvalidRank: return "invalid-rank";
    case ErrorCode::kNumericalOverflow: return "numerical-overflow";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kInvalidRegime: return "invalid-regime";
    case ErrorCode::kUndefinedRank: return "undefined-rank";
    case ErrorCode::kDimensionTooLarge: return "dimension-too-large";
    case ErrorCode::kDegenerateRegression: return "degenerate-regression";
    case ErrorCode::kEmptyShard: return "empty-shard";
    case ErrorCode::kRoundFailed: return "round-failed";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::atomic<std::uint64_t> g_vector_allocations{0};

void note_allocation() { g_vector_allocations.fetch_add(1, std::memory_order_relaxed); }

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kInvalidDimension,
                "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

DenseVector::DenseVector(std::size_t n, double fill) {
  if (n == 0) throw Error(ErrorCode::kInvalidDimension, "vector length must be >= 1");
  note_allocation();
  values_.assign(n, fill);
}

DenseVector::DenseVector(std::initializer_list<double> values) {
  if (values.size() == 0) {
    throw Error(ErrorCode::kInvalidDimension, "vector length must be >= 1");
  }
  note_allocation();
  values_.assign(values.begin(), values.end());
}

DenseVector DenseVector::from(std::span<const double> values) {
  DenseVector out(values.size());
  std::copy(values.begin(), values.end(), out.values_.begin());
  return out;
}

DenseVector::DenseVector(const DenseVector& other) {
  if (!other.values_.empty()) note_allocation();
  values_ = other.values_;
}

DenseVector& DenseVector::operator=(const DenseVector& other) {
  if (this != &other) {
    if (values_.capacity() < other.values_.size()) note_allocation();
    values_ = other.values_;
  }
  return *this;
}

DenseVector& DenseVector::operator+=(std::span<const double> other) {
  require_same_size(size(), other.size());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

DenseVector& DenseVector::operator-=(std::span<const double> other) {
  require_same_size(size(), other.size());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

DenseVector& DenseVector::axpy(double a, std::span<const double> x) {
  require_same_size(size(), x.size());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x[i];
  return *this;
}

double DenseVector::squared_norm() const { return fedmezo::squared_norm(values_); }
double DenseVector::norm() const { return fedmezo::norm(values_); }
bool DenseVector::all_finite() const { return fedmezo::all_finite(values_); }

std::uint64_t DenseVector::allocation_count() noexcept {
  return g_vector_allocations.load(std::memory_order_relaxed);
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) {
  DenseVector out(a);
  out += b;
  return out;
}

DenseVector operator-(const DenseVector& a, const DenseVector& b) {
  DenseVector out(a);
  out -= b;
  return out;
}

DenseVector operator*(double s, const DenseVector& a) {
  DenseVector out(a);
  out *= s;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidDimension, "matrix dimensions must be >= 1");
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidDimension, "matrix dimensions must be >= 1");
  }
  if (values_.size() != rows * cols) {
    throw Error(ErrorCode::kInvalidDimension, "rows * cols must equal the value count");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.values_[i * n + i] = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
  DenseMatrix m(diag.size(), diag.size(), 0.0);
  for (std::size_t i = 0; i < diag.size(); ++i) m.values_[i * diag.size() + i] = diag[i];
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::kInvalidDimension, "ragged matrix rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(values));
}

DenseVector DenseMatrix::multiply(std::span<const double> x) const {
  DenseVector out(rows_);
  multiply_into(x, out.span());
  return out;
}

void DenseMatrix::multiply_into(std::span<const double> x, std::span<double> out) const {
  require_same_size(cols_, x.size());
  require_same_size(rows_, out.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row_ptr = values_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += row_ptr[c] * x[c];
    out[r] = acc;
  }
}

double DenseMatrix::quadratic_form(std::span<const double> x) const {
  require_same_size(cols_, x.size());
  require_same_size(rows_, x.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row_ptr = values_.data() + r * cols_;
    double row_acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) row_acc += row_ptr[c] * x[c];
    acc += x[r] * row_acc;
  }
  return acc;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.values_[c * rows_ + r] = values_[r * cols_ + c];
  }
  return t;
}

DenseMatrix DenseMatrix::scaled(double s) const {
  DenseMatrix out(*this);
  for (double& v : out.values_) v *= s;
  out.psd_verified_ = psd_verified_ && s >= 0.0;
  return out;
}

double DenseMatrix::trace() const {
  if (!square()) throw Error(ErrorCode::kInvalidDimension, "trace of a non-square matrix");
  double acc = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) acc += values_[i * cols_ + i];
  return acc;
}

double DenseMatrix::max_abs_diff(const DenseMatrix& other) const {
  require_same_size(rows_, other.rows_);
  require_same_size(cols_, other.cols_);
  double worst = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    worst = std::max(worst, std::abs(values_[i] - other.values_[i]));
  }
  return worst;
}

bool DenseMatrix::is_symmetric(double tol) const {
  if (!square()) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = r + 1; c < cols_; ++c) {
      if (std::abs(values_[r * cols_ + c] - values_[c * cols_ + r]) > tol) return false;
    }
  }
  return true;
}

bool DenseMatrix::verify_symmetric_psd(double tol) {
  psd_verified_ = false;
  double scale = 0.0;
  for (std::size_t i = 0; i < rows_ && i < cols_; ++i) {
    scale = std::max(scale, std::abs(values_[i * cols_ + i]));
  }
  if (!is_symmetric(tol * std::max(1.0, scale))) return false;
  // Cholesky of M + jitter*I; any negative pivot means an eigenvalue below -jitter.
  const std::size_t n = rows_;
  const double jitter = tol * std::max(1.0, scale);
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = values_[j * n + j] + jitter;
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = values_[i * n + j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = acc / ljj;
    }
  }
  psd_verified_ = true;
  return true;
}

}  // namespace fedmezo
