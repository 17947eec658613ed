#pragma once

#include <stdexcept>
#include <string>

namespace kgq {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Usage = 2, Data = 3, Unsupported = 4, Internal = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFeature : public Error {
 public:
  explicit UnsupportedFeature(const std::string& keyword)
      : Error(ErrorKind::Unsupported, "unsupported feature: " + keyword), keyword_(keyword) {}
  const std::string& keyword() const noexcept { return keyword_; }

 private:
  std::string keyword_;
};

inline Error data_error(const std::string& what) { return Error(ErrorKind::Data, what); }
inline Error usage_error(const std::string& what) { return Error(ErrorKind::Usage, what); }
inline Error internal_error(const std::string& what) { return Error(ErrorKind::Internal, what); }

}  // namespace kgq
