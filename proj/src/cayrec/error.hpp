#pragma once

#include <stdexcept>
#include <string>

namespace cayrec {

enum class ErrorCode {
  invalid_argument = 1,
  shape_mismatch,
  not_latin,
  not_a_group,
  invalid_isotopy,
  size_limit,
  diverged,
  io_error,
  probe_failed,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cayrec
