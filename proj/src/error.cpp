#include "myo/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace myo {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

std::string with_row(const std::string& what, std::size_t row) {
  if (row == ParseError::npos) return what;
  return "row " + std::to_string(row) + ": " + what;
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t row)
    : IoError(with_row(what, row)), row_(row) {}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(current_handler(), std::move(handler));
}

void warn(std::string_view message) {
  WarningHandler handler;
  {
    std::lock_guard lock(handler_mutex());
    handler = current_handler();
  }
  if (handler) handler(message);
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_handler(
      [this](std::string_view msg) { messages_.emplace_back(msg); });
}

ScopedWarningCapture::~ScopedWarningCapture() {
  set_warning_handler(std::move(previous_));
}

}  // namespace myo
