// Copyright 2026 The contispine Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contispine {

// Invalid input to a model function (out-of-range angle, zero arm, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Joint angle beyond the mechanical position limit in strict mode.
class LimitViolation : public DomainError {
 public:
  LimitViolation(std::size_t joint, const std::string& what)
      : DomainError(what), joint_(joint) {}
  std::size_t joint() const { return joint_; }

 private:
  std::size_t joint_;
};

// Bad configuration file, unknown key, or bad CLI usage. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation diverged (NaN or force beyond twice the saturation limit).
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t sample, const std::string& what)
      : std::runtime_error(what), sample_(sample) {}
  std::size_t sample() const { return sample_; }

 private:
  std::size_t sample_;
};

}  // namespace contispine
