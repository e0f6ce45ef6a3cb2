#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adaptsense {

// Every error raised by the library carries a stable machine-readable kind so
// the CLI can emit a structured error record.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept { return "error"; }
};

#define ADAPTSENSE_ERROR(Name, Kind)                                     \
  class Name : public Error {                                            \
   public:                                                               \
    using Error::Error;                                                  \
    std::string_view kind() const noexcept override { return Kind; }     \
  }

ADAPTSENSE_ERROR(ConfigError, "config_error");
ADAPTSENSE_ERROR(RangeError, "range_error");
ADAPTSENSE_ERROR(UnknownActionError, "unknown_action");
ADAPTSENSE_ERROR(UnknownConfigurationError, "unknown_configuration");
ADAPTSENSE_ERROR(DomainError, "domain_error");
ADAPTSENSE_ERROR(EpisodeFinished, "episode_finished");
ADAPTSENSE_ERROR(ClockError, "clock_error");
ADAPTSENSE_ERROR(ParseError, "parse_error");
ADAPTSENSE_ERROR(IoError, "io_error");

#undef ADAPTSENSE_ERROR

}  // namespace adaptsense
