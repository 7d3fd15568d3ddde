#pragma once

#include <stdexcept>
#include <string>

namespace scenediff {

inline constexpr const char* kVersion = "scenediff 0.1.0";

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void check(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace scenediff
