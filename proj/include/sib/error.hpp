#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sib {

// Root of every exception thrown by the library. The CLI maps the concrete
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of tensors, layers or vectors disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value is outside its documented domain (probabilities, pixels, targets).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by the query ledger; the ledger is left untouched.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::uint64_t queries_used, std::uint64_t budget)
      : Error(what), queries_used_(queries_used), budget_(budget) {}

  std::uint64_t queries_used() const noexcept { return queries_used_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t queries_used_;
  std::uint64_t budget_;
};

// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t batch)
      : Error(what), epoch_(epoch), batch_(batch) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

// Failures reading or decoding data files (IDX, PGM, model archives).
class DataError : public Error {
 public:
  enum class Kind {
    io,
    bad_magic,
    count_mismatch,
    truncated,
    unsupported_format,
    bad_dimensions,
    missing_entry,
    version_mismatch,
    corrupt,
  };

  DataError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace sib
