#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace myo {

/// Bad parameters or a configuration that violates a documented constraint.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between operands.
class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Non-finite inputs or a failed factorization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing, unreadable or unwritable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content. `row()` is the 0-based data row, or npos when the
/// problem is not tied to a row.
class ParseError : public IoError {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ParseError(const std::string& what, std::size_t row = npos);

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a process-wide warning sink and returns the previous one.
/// The default handler prints to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

/// RAII capture of warnings, restores the previous handler on destruction.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace myo
