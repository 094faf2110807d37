#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nid {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LoadError : public Error {
 public:
  LoadError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  /// 1-based line number of the offending record.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class EmptyAfterTokenize : public Error {
 public:
  EmptyAfterTokenize() : Error("no tokens survive tokenization") {}
};

class AugmentError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class BadInput : public Error {
 public:
  using Error::Error;
};

class EmptyPositiveRow : public Error {
 public:
  explicit EmptyPositiveRow(std::size_t row)
      : Error("adjacency row " + std::to_string(row) + " has no positives"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NoTargets : public Error {
 public:
  NoTargets() : Error("masked example has no targets") {}
};

class InvalidCall : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("label lists differ in length: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class IdMismatch : public Error {
 public:
  explicit IdMismatch(std::vector<std::size_t> ids);
  /// Symmetric difference of the two id sets, ascending.
  const std::vector<std::size_t>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::size_t> ids_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nid
