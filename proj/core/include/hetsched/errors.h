// Copyright 2026 The hetsched Authors
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

#ifndef HETSCHED_ERRORS_H_
#define HETSCHED_ERRORS_H_

#include <stdexcept>
#include <string>

namespace hetsched {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, bad flags, or violated invariants of input data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A scheduling plan that does not match the graph or the catalog.
class PlanError : public Error {
 public:
  using Error::Error;
};

// No provisioning can satisfy the throughput limit within the quotas.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a domain violation in numeric code.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetsched

#endif  // HETSCHED_ERRORS_H_
