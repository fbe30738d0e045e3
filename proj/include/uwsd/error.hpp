#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace uwsd {

// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind {
  io,        // file missing or unreadable
  parse,     // malformed line or document
  schema,    // well-formed input that violates a structural invariant
  coverage,  // a provider lacks an instance, sense or token
  usage,     // invalid argument or configuration
  numeric,   // solver failure or non-finite value
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::usage: return "usage";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Error tied to a location in an input file. Line numbers are 1-based.
inline Error file_error(ErrorKind kind, const std::filesystem::path& file,
                        std::size_t line, const std::string& msg) {
  std::string where = file.string();
  if (line > 0) where += ":" + std::to_string(line);
  return Error(kind, where + ": " + msg);
}

}  // namespace uwsd
