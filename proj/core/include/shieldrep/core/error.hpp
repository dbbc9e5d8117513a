#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shieldrep {

enum class Errc {
  InvalidConfig,
  Malformed,
  NoKey,
  NotOperational,
  Conflict,
  DuplicateEndpoint,
  LateRegistration,
  QueueFull,
  StoreFull,
  NotFound,
  IntegrityViolation,
  JoinDenied,
  MalformedTrace,
  WindowTooWide,
  TickBudgetExceeded,
  Io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace shieldrep
