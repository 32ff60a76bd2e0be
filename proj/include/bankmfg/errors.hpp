// Copyright 2026 The bankmfg Authors
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

#ifndef BANKMFG_ERRORS_HPP
#define BANKMFG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bankmfg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A measure carries a negative or non-finite weight, or does not sum to one.
class InvalidMeasureError : public Error {
 public:
  using Error::Error;
};

// An atom lies outside the compact support covered by the grid.
class OutOfSupportError : public Error {
 public:
  using Error::Error;
};

// A value is outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training loss exceeded the divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bankmfg

#endif  // BANKMFG_ERRORS_HPP
