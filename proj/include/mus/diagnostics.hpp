#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mus {

using WarningSink = std::function<void(const std::string&)>;

/// Emit a warning through the installed sink (stderr by default). Thread-safe.
void warn(const std::string& message);

/// Replace the process-wide sink; returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

/// Collects warnings for the lifetime of the object, restoring the previous
/// sink on destruction. Used by tests and by the CLI's --quiet mode.
class WarningCapture {
public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages() const;
  bool contains(const std::string& needle) const;

private:
  WarningSink previous_;
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace mus
