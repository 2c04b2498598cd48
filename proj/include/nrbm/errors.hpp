#ifndef NRBM_ERRORS_HPP
#define NRBM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nrbm {

// Process exit codes: 0 ok, 2 usage, 3 format, 4 numeric.
class Error : public std::runtime_error {
 public:
  Error(const std::string& msg, int exit_code)
      : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg, 2) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg, 3) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& msg) : Error(msg, 3) {}
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& msg) : Error(msg, 3) {}
};

class CorruptError : public Error {
 public:
  explicit CorruptError(const std::string& msg) : Error(msg, 3) {}
};

class DimError : public Error {
 public:
  explicit DimError(const std::string& msg) : Error(msg, 4) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg, 4) {}
};

class OracleSizeError : public Error {
 public:
  explicit OracleSizeError(const std::string& msg) : Error(msg, 4) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace nrbm

#endif  // NRBM_ERRORS_HPP
