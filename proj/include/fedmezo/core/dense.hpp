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

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedmezo {

// Owning vector of doubles. Every heap allocation made on behalf of a
// DenseVector bumps a process-wide counter, which is how the in-place MeZO
// step proves it never materializes a parameter-sized temporary.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0);
  DenseVector(std::initializer_list<double> values);

  static DenseVector from(std::span<const double> values);

  DenseVector(const DenseVector& other);
  DenseVector& operator=(const DenseVector& other);
  DenseVector(DenseVector&&) noexcept = default;
  DenseVector& operator=(DenseVector&&) noexcept = default;

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }

  DenseVector& operator+=(std::span<const double> other);
  DenseVector& operator-=(std::span<const double> other);
  DenseVector& operator*=(double scale);

  // this += a * x
  DenseVector& axpy(double a, std::span<const double> x);

  double squared_norm() const;
  double norm() const;
  bool all_finite() const;

  bool operator==(const DenseVector& other) const { return values_ == other.values_; }

  // Number of heap allocations performed by DenseVector since process start.
  static std::uint64_t allocation_count() noexcept;

 private:
  std::vector<double> values_;
};

DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);
DenseVector operator*(double s, const DenseVector& a);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
bool all_finite(std::span<const double> a);

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  // Mutable access drops any previously verified PSD status.
  double& operator()(std::size_t r, std::size_t c) {
    psd_verified_ = false;
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
  }
  std::span<const double> values() const noexcept { return values_; }

  DenseVector multiply(std::span<const double> x) const;
  // out = M x without allocating.
  void multiply_into(std::span<const double> x, std::span<double> out) const;
  // x^T M x without allocating.
  double quadratic_form(std::span<const double> x) const;

  DenseMatrix transpose() const;
  DenseMatrix scaled(double s) const;
  double trace() const;
  double max_abs_diff(const DenseMatrix& other) const;
  bool is_symmetric(double tol = 0.0) const;

  // Checks symmetry and positive semi-definiteness (Cholesky with a relative
  // jitter of `tol`) and records the result. Only this call sets the flag.
  bool verify_symmetric_psd(double tol = 1e-10);
  bool psd_verified() const noexcept { return psd_verified_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  bool psd_verified_ = false;
};

}  // namespace fedmezo
