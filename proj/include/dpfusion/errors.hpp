//
// Copyright 2026 The dpfusion Authors
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

#ifndef DPFUSION_ERRORS_HPP
#define DPFUSION_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dpfusion {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad model data: dimensions, non-PSD covariances, sequence lengths.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Singular or ill-conditioned matrix inside the filter recursion. Carries the
// name of the offending matrix and its condition number in the message.
class FilterError : public Error {
 public:
  using Error::Error;
};

class PrivacyError : public Error {
 public:
  using Error::Error;
};

class SdpError : public Error {
 public:
  using Error::Error;
};

class FusionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpfusion

#endif  // DPFUSION_ERRORS_HPP
