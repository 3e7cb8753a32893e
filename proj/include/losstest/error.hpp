#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace losstest {

enum class ErrorKind {
  invalid_subset,
  too_few_samples,
  shape,
  insufficient_neighbors,
  domain,
  task_mismatch,
  parse,
  label,
  schema,
  scenario,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_subset: return "invalid-subset";
    case ErrorKind::too_few_samples: return "too-few-samples";
    case ErrorKind::shape: return "shape";
    case ErrorKind::insufficient_neighbors: return "insufficient-neighbors";
    case ErrorKind::domain: return "domain";
    case ErrorKind::task_mismatch: return "task-mismatch";
    case ErrorKind::parse: return "parse";
    case ErrorKind::label: return "label";
    case ErrorKind::schema: return "schema";
    case ErrorKind::scenario: return "scenario";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure in the library surfaces as this exception; kind() lets
// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace losstest
