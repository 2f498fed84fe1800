// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameter or configuration (fuzzifier <= 1, dim < 2, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input document or dataset.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A surface term or attribute could not be resolved against the graph.
class NotFound : public Error {
 public:
  using Error::Error;
};

// Reasoning produced no usable candidate.
class EmptyCandidates : public Error {
 public:
  using Error::Error;
};

// Shapes of two matrices disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current session state.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace elicit
