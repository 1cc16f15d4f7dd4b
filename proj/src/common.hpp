// Copyright 2026 The PI-GPS Authors.
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

#ifndef PIGPS_COMMON_HPP_
#define PIGPS_COMMON_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pigps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Smallest eigenvalue any stored action covariance may have.
inline constexpr double kCovarianceFloor = 1e-6;

enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
};

// All library failures are reported as pigps::Error; the C API maps the code
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void ThrowInvalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

[[noreturn]] inline void ThrowNumeric(const std::string& what) {
  throw Error(ErrorCode::kNumeric, what);
}

inline void CheckDim(Eigen::Index actual, Eigen::Index expected,
                     const char* what) {
  if (actual != expected) {
    ThrowInvalid(std::string(what) + ": expected dimension " +
                 std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

}  // namespace pigps

#endif  // PIGPS_COMMON_HPP_
