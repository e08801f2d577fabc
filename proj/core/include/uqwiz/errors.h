// Copyright 2026 The uqwiz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UQWIZ_ERRORS_H_
#define UQWIZ_ERRORS_H_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace uqwiz {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input values violate a documented invariant (row sums, ranges, configs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Array shapes are inconsistent with each other or with a model.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A sampling-based quantifier received fewer samples than it needs.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class UnknownQuantifierError : public Error {
 public:
  using Error::Error;
};

// A quantifier was used where its family is not applicable, e.g. a
// point-predictor quantifier on an ensemble.
class UnsupportedQuantifierError : public Error {
 public:
  using Error::Error;
};

// Invalid layer stack passed to a model constructor.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Training diverged or was otherwise aborted.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Model file errors. Each corruption mode has its own type so callers can
// tell a damaged file from a file that was never a model.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnknownTagError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// CSV cell or structure could not be parsed. Rows and columns are 1-based
// file coordinates (the header is row 1).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row, std::size_t column)
      : Error(message), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Pool context and process-count combination is not allowed.
class ContextError : public Error {
 public:
  using Error::Error;
};

// Another pool run holds the ensemble directory.
class LockError : public Error {
 public:
  using Error::Error;
};

// An atomic model file required by the operation does not exist.
class MissingModelError : public Error {
 public:
  using Error::Error;
};

// Per-model outputs could not be stacked into one sample tensor.
class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& message, int model_id)
      : Error(message), model_id_(model_id) {}

  int model_id() const { return model_id_; }

 private:
  int model_id_;
};

// One or more ensemble tasks failed. Thrown only after every worker has
// drained; `failures` maps model id to the reported diagnostic.
class TaskFailure : public Error {
 public:
  explicit TaskFailure(std::map<int, std::string> failures);

  const std::map<int, std::string>& failures() const { return failures_; }
  std::vector<int> failed_ids() const;

 private:
  std::map<int, std::string> failures_;
};

}  // namespace uqwiz

#endif  // UQWIZ_ERRORS_H_
