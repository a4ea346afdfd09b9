//
// Copyright 2026 The PCQR Authors
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
//

#ifndef PCQR_ERRORS_H_
#define PCQR_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcqr {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a family or marginal does not support the requested operation
// (e.g. enumeration or a closed-form disagreement).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when derived parameters leave a stage without data. `required_n`
// carries the smallest private sample size that would make the run feasible,
// or 0 when no such report applies.
class InfeasibleParameters : public std::runtime_error {
 public:
  InfeasibleParameters(const std::string& what, std::size_t required_n = 0)
      : std::runtime_error(what), required_n_(required_n) {}

  std::size_t required_n() const { return required_n_; }

 private:
  std::size_t required_n_;
};

}  // namespace pcqr

#endif  // PCQR_ERRORS_H_
