#include "flowtopo/log.hpp"

#include <iostream>
#include <mutex>

namespace flowtopo {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view message) { std::clog << "warning: " << message << '\n'; };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler next) {
  std::lock_guard lock(handler_mutex());
  auto previous = std::move(handler());
  handler() = next ? std::move(next) : [](std::string_view) {};
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  handler()(message);
}

}  // namespace flowtopo
