#include "toklab/log.hpp"

#include <iostream>
#include <mutex>

namespace toklab::log {
namespace {

std::mutex sink_mutex;

Sink& current_sink() {
  static Sink sink = [](const std::string& msg) {
    std::cerr << "toklab: warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

Sink set_warning_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (current_sink()) current_sink()(message);
}

}  // namespace toklab::log
