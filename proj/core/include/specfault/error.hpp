#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specfault {

enum class ErrorCode {
  InvalidArgument,
  IoError,
  // core-model
  UnknownTest,
  DuplicateRecord,
  // coverage-ingest
  MalformedLine,
  MissingField,
  MalformedDA,
  MissingTN,
  UnknownOutcome,
  DuplicateTest,
  // test-runner
  DiscoveryFailed,
  DuplicateTestName,
  NoTestsFound,
  // sbfl-engine
  NoFailingTests,
  UnknownFormula,
  DuplicateFormulaName,
  // exception-recovery / source-bridge
  NoFramesFound,
  UnbalancedDelimiters,
  LineOutsideFile,
  // report-export
  SinkWriteFailed,
  DuplicateExporterName,
  UnknownFormat,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `module()` names the component that
/// raised it so that the CLI can report provenance.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string detail_;
};

}  // namespace specfault
