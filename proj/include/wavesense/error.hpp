/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace wavesense {

// All library errors derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its documented domain (non-positive time constant, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Malformed data handed to an operation (shape mismatch, NaN logits, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Checkpoint written for a different network configuration.
class IncompatibleCheckpoint : public FormatError {
 public:
  using FormatError::FormatError;
};

class SimulationDiverged : public Error {
 public:
  using Error::Error;
};

// API used out of order, e.g. backward() on an empty tape.
class UsageError : public Error {
 public:
  using Error::Error;
};

class DesignError : public Error {
 public:
  using Error::Error;
};

class MixingError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavesense
