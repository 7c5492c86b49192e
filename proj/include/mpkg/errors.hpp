// Copyright 2026 The mpkg Authors.
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

#include <stdexcept>
#include <string>

namespace mpkg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or invalid input: bad arguments, unresolvable identifiers,
// shape mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

// A file exists but its contents do not parse.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// Non-finite loss or parameter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Checkpoint container is corrupt or from an incompatible version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpkg
