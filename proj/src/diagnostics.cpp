#include "mus/diagnostics.hpp"
#include "mus/error.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>

namespace mus {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
  return sink;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return 2;
    case ErrorKind::external: return 3;
    case ErrorKind::degenerate: return 4;
    case ErrorKind::internal: break;
  }
  return 1;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(message);
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  auto previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

struct WarningCapture::State {
  std::vector<std::string> messages;
};

WarningCapture::WarningCapture() : state_(std::make_unique<State>()) {
  // The sink is invoked under sink_mutex, so appending needs no extra lock.
  previous_ = set_warning_sink([s = state_.get()](const std::string& m) { s->messages.push_back(m); });
}

WarningCapture::~WarningCapture() {
  set_warning_sink(std::move(previous_));
}

std::vector<std::string> WarningCapture::messages() const {
  std::lock_guard lock(sink_mutex());
  return state_->messages;
}

bool WarningCapture::contains(const std::string& needle) const {
  auto all = messages();
  return std::any_of(all.begin(), all.end(),
                     [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

}  // namespace mus
