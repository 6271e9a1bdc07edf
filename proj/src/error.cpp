#include "fkbs/error.hpp"

#include <sstream>

namespace fkbs {

namespace {

std::string join(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  for (std::size_t i = 0; i < diagnostics.size(); ++i) {
    if (i != 0) out << '\n';
    out << diagnostics[i].to_string();
  }
  return out.str();
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kInputValidation: return "input validation error";
    case ErrorKind::kSyntax: return "syntax error";
    case ErrorKind::kSemantic: return "semantic error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kSchema: return "schema violation";
    case ErrorKind::kRange: return "range violation";
    case ErrorKind::kStorage: return "storage error";
    case ErrorKind::kCorruptRecord: return "corrupt record";
    case ErrorKind::kUnknownLabel: return "unknown label";
    case ErrorKind::kEmptyRow: return "empty row";
  }
  return "error";
}

std::string Diagnostic::to_string() const {
  std::ostringstream out;
  if (line > 0) {
    out << line;
    if (column > 0) out << ':' << column;
    out << ": ";
  }
  out << fkbs::to_string(kind) << ": " << message;
  return out.str();
}

Error::Error(ErrorKind kind, std::string message)
    : Error(std::vector<Diagnostic>{Diagnostic{kind, 0, 0, std::move(message)}}) {}

Error::Error(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {
  if (diagnostics_.empty()) {
    diagnostics_.push_back(Diagnostic{ErrorKind::kConfig, 0, 0, "unspecified error"});
  }
}

}  // namespace fkbs
