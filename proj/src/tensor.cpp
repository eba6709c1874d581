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

#include "iefs/tensor.hpp"

#include <cstring>
#include <functional>
#include <numeric>

#include "iefs/errors.hpp"

namespace iefs {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(numel(shape_)));
}

Tensor::Tensor(Shape shape, Eigen::VectorXd values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_shape(shape_);
  if (numel(shape_) != static_cast<std::size_t>(values_.size())) {
    throw DimensionError("shape " + to_string(shape_) + " does not match " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape),
             Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                               static_cast<Eigen::Index>(values.size()))) {}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.values_.setConstant(value);
  return t;
}

MatrixMap Tensor::matrix(std::size_t rows) {
  if (rows == 0 || size() % rows != 0) {
    throw DimensionError("cannot view " + to_string(shape_) + " with " + std::to_string(rows) + " rows");
  }
  return MatrixMap(values_.data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(size() / rows));
}

ConstMatrixMap Tensor::matrix(std::size_t rows) const {
  if (rows == 0 || size() % rows != 0) {
    throw DimensionError("cannot view " + to_string(shape_) + " with " + std::to_string(rows) + " rows");
  }
  return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(size() / rows));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), values_);
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

}  // namespace iefs
