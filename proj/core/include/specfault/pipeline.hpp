#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specfault/report.hpp"
#include "specfault/sbfl.hpp"

namespace specfault {

/// Everything one localization run needs. Exactly one of `adapter_file`
/// (run the tests) and `coverage_dir` (read existing per-test reports) is
/// set.
struct LocalizerConfig {
  std::filesystem::path project_path;
  std::string formula = "ochiai";
  double threshold = 0.0;
  std::int64_t test_timeout_ms = 60000;
  unsigned jobs = 1;
  std::string format = "console";
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> coverage_dir;
  std::optional<std::filesystem::path> adapter_file;
  std::optional<std::filesystem::path> outcomes_file;
  std::optional<std::filesystem::path> work_dir;
  std::string trace_grammar = "at";
  bool recover_exceptions = true;
  bool recover_whole_block = false;
  std::vector<std::string> comment_prefixes = {"//", "#"};
  std::vector<std::string> include_globs;
  std::vector<std::string> exclude_globs;
};

struct Localizer {
  FormulaRegistry formulas = FormulaRegistry::with_builtins();

  /// Collect (run or read) → parse traces → recover → spectrum → rank →
  /// annotate. Throws ConfigError for bad configs and propagates every
  /// module error.
  LocalizationReport run(const LocalizerConfig& config) const;
};

/// Throws ConfigError.
void validate(const LocalizerConfig& config, const FormulaRegistry& formulas);

/// True when `path` passes the include (empty = everything) and exclude
/// globs. '*' stays within one path segment, '**' crosses segments.
bool path_selected(const std::string& path, const std::vector<std::string>& include,
                   const std::vector<std::string>& exclude);

const char* tool_version() noexcept;

}  // namespace specfault
