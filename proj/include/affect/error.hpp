#ifndef AFFECT_ERROR_HPP
#define AFFECT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace affect {

// Error categories surfaced by the library. The CLI reports the kind name in
// its machine-readable error output, so the names are part of the interface.
enum class ErrorKind {
  Range,
  DegenerateClass,
  Shape,
  Numeric,
  Label,
  Config,
  Space,
  Parse,
  Validation,
  Schedule,
  Argument,
  EmptyDataset,
  UnsupportedSpace,
  Dimension,
  Spec,
  Rank,
  Io,
};

constexpr std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Range: return "range";
    case ErrorKind::DegenerateClass: return "degenerate_class";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Label: return "label";
    case ErrorKind::Config: return "config";
    case ErrorKind::Space: return "space";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Schedule: return "schedule";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::EmptyDataset: return "empty_dataset";
    case ErrorKind::UnsupportedSpace: return "unsupported_space";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Rank: return "rank";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class AffectError : public std::runtime_error {
 public:
  AffectError(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw AffectError(kind, message);
}

}  // namespace affect

#endif  // AFFECT_ERROR_HPP
