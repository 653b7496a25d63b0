/*
 Copyright 2026 The quadid Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace quadid {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;

inline constexpr int kStateDim = 12;
inline constexpr int kControlDim = 4;

/// Base of every error raised by the library. The category decides the CLI
/// exit code: numerical failures exit 1, input/config/I/O problems exit 2.
class Error : public std::runtime_error {
 public:
  enum class Category { kNumerical, kInput };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const { return category_; }

 private:
  Category category_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Category::kNumerical, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(Category::kInput, what) {}
};

/// Raised when |theta| reaches the Euler-rate singularity.
class DegeneratePitchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double condition)
      : NumericalError(what + " (condition estimate " + std::to_string(condition) + ")"),
        condition_(condition) {}

  double condition() const { return condition_; }

 private:
  double condition_;
};

}  // namespace quadid
