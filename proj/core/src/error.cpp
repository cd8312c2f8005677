#include "specfault/error.hpp"

namespace specfault {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownTest: return "UnknownTest";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::MalformedDA: return "MalformedDA";
    case ErrorCode::MissingTN: return "MissingTN";
    case ErrorCode::UnknownOutcome: return "UnknownOutcome";
    case ErrorCode::DuplicateTest: return "DuplicateTest";
    case ErrorCode::DiscoveryFailed: return "DiscoveryFailed";
    case ErrorCode::DuplicateTestName: return "DuplicateTestName";
    case ErrorCode::NoTestsFound: return "NoTestsFound";
    case ErrorCode::NoFailingTests: return "NoFailingTests";
    case ErrorCode::UnknownFormula: return "UnknownFormula";
    case ErrorCode::DuplicateFormulaName: return "DuplicateFormulaName";
    case ErrorCode::NoFramesFound: return "NoFramesFound";
    case ErrorCode::UnbalancedDelimiters: return "UnbalancedDelimiters";
    case ErrorCode::LineOutsideFile: return "LineOutsideFile";
    case ErrorCode::SinkWriteFailed: return "SinkWriteFailed";
    case ErrorCode::DuplicateExporterName: return "DuplicateExporterName";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& module,
                    const std::string& detail) {
  std::string out = "[" + module + "] ";
  out += to_string(code);
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string module, const std::string& detail)
    : std::runtime_error(compose(code, module, detail)),
      code_(code),
      module_(std::move(module)),
      detail_(detail) {}

}  // namespace specfault
