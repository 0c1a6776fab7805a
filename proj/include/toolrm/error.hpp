#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toolrm {

/// Usage errors are the caller's fault (bad input, bad flags) and map to
/// exit code 2; operational errors (transport, divergence) map to 1.
enum class ErrorCategory { Usage, Operational };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

/// A JSONL line that does not satisfy its record schema.
class RecordError : public Error {
 public:
  RecordError(std::string path, std::size_t line, const std::string& reason)
      : Error(ErrorCategory::Usage, path + ":" + std::to_string(line) + ": " + reason),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class UnmappedName : public Error {
 public:
  explicit UnmappedName(const std::string& name)
      : Error(ErrorCategory::Usage, "name not covered by obfuscation map: " + name) {}
};

class GoldUnderspecified : public Error {
 public:
  explicit GoldUnderspecified(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class InsufficientData : public Error {
 public:
  InsufficientData(std::string slice, std::size_t requested, std::size_t available)
      : Error(ErrorCategory::Usage, "slice '" + slice + "' has " + std::to_string(available) +
                                        " items, " + std::to_string(requested) + " requested"),
        slice_(std::move(slice)) {}

  const std::string& slice() const noexcept { return slice_; }

 private:
  std::string slice_;
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(std::size_t step)
      : Error(ErrorCategory::Operational, "non-finite loss at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ScoreUnavailable : public Error {
 public:
  explicit ScoreUnavailable(const std::string& cause)
      : Error(ErrorCategory::Operational, "score unavailable: " + cause) {}
};

class UnknownQuery : public Error {
 public:
  explicit UnknownQuery(const std::string& what)
      : Error(ErrorCategory::Usage, "oracle has no gold for " + what) {}
};

class UnparseableVerdict : public Error {
 public:
  explicit UnparseableVerdict(const std::string& what)
      : Error(ErrorCategory::Operational, "unparseable judge verdict: " + what) {}
};

class ShortBatch : public Error {
 public:
  ShortBatch(std::size_t got, std::size_t wanted)
      : Error(ErrorCategory::Operational, "generator returned " + std::to_string(got) + " of " +
                                              std::to_string(wanted) + " completions") {}
};

class ShortCandidateSet : public Error {
 public:
  explicit ShortCandidateSet(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

}  // namespace toolrm
