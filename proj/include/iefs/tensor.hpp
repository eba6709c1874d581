// Copyright 2026 The IEFS-GMB Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace iefs {

using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major tensor of doubles. The shape is fixed at construction;
/// only the values may change.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, Eigen::VectorXd values);
  Tensor(Shape shape, std::initializer_list<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  bool empty() const { return shape_.empty(); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  // Rank-3 accessor, the common (batch, channel, position) layout.
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return values_[static_cast<Eigen::Index>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[static_cast<Eigen::Index>((i * shape_[1] + j) * shape_[2] + k)];
  }

  /// Row-major matrix view with the given row count; columns = size / rows.
  MatrixMap matrix(std::size_t rows);
  ConstMatrixMap matrix(std::size_t rows) const;

  Tensor reshaped(Shape shape) const;

  /// Bit-level equality of shape and values.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  Eigen::VectorXd values_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace iefs
