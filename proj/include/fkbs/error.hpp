#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fkbs {

enum class ErrorKind {
  kConfig,
  kInputValidation,
  kSyntax,
  kSemantic,
  kEvaluation,
  kIo,
  kSchema,
  kRange,
  kStorage,
  kCorruptRecord,
  kUnknownLabel,
  kEmptyRow,
};

const char* to_string(ErrorKind kind);

/// A single positioned message. Line and column are 1-based; 0 means "not applicable".
struct Diagnostic {
  ErrorKind kind = ErrorKind::kConfig;
  int line = 0;
  int column = 0;
  std::string message;

  std::string to_string() const;
  bool operator==(const Diagnostic&) const = default;
};

/// Every failure raised by the engine. Carries one or more diagnostics so that
/// loaders can report all violations at once.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message);
  explicit Error(std::vector<Diagnostic> diagnostics);

  ErrorKind kind() const { return diagnostics_.front().kind; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace fkbs
