#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specfault/model.hpp"

namespace specfault {

/// Everything collected for one executed test.
struct PerTestReport {
  TestRecord record;
  LocationSet covered;
  /// Unparsed trace text. Kept next to `record.exception` so that reports
  /// re-serialize faithfully; parsing needs a frame grammar and is deferred.
  std::optional<std::string> raw_trace;

  bool operator==(const PerTestReport&) const = default;
};

struct IngestOptions {
  /// Prefixes removed from file paths (typically the absolute project root).
  std::vector<std::string> strip_prefixes;
};

/// Parses newline-delimited canonical report objects. Blank lines are
/// skipped, unknown keys ignored.
std::vector<PerTestReport> parse_canonical(std::istream& in,
                                           const IngestOptions& options = {});

/// Writes one canonical object (single line, trailing '\n') per report.
void serialize_canonical(const std::vector<PerTestReport>& reports,
                         std::ostream& out);
std::string serialize_canonical_line(const PerTestReport& report);

/// One TN section of an LCOV tracefile: test name and lines with hits > 0.
struct LcovSection {
  std::string test_name;
  LocationSet covered;
};

/// Parses the TN/SF/DA/end_of_record subset. Sections sharing a TN value
/// are merged; order is first appearance.
std::vector<LcovSection> parse_lcov_sections(std::istream& in,
                                             const IngestOptions& options = {});

using OutcomeMap = std::map<std::string, Outcome>;

std::vector<PerTestReport> parse_lcov(std::istream& in,
                                      const OutcomeMap& outcomes,
                                      const IngestOptions& options = {});

/// Reads a JSON object mapping test names to outcome strings.
OutcomeMap parse_outcome_map(std::istream& in);

struct SuiteResult {
  CoverageMatrix matrix;
  std::vector<TestRecord> records;

  bool operator==(const SuiteResult&) const = default;
};

/// Combines per-test reports; a test named twice raises DuplicateTest.
SuiteResult merge(const std::vector<PerTestReport>& reports);

/// Loads every report in an offline coverage directory, files visited in
/// name order: `*.jsonl`/`*.json` are canonical, `*.info`/`*.lcov` are LCOV
/// whose outcomes come from `outcomes.json` in the same directory, or from
/// `outcomes` when given.
std::vector<PerTestReport> read_coverage_dir(
    const std::filesystem::path& dir, const IngestOptions& options = {},
    const std::optional<OutcomeMap>& outcomes = std::nullopt);

/// Splits a trace's first line on the first ": " into (type, message).
std::pair<std::string, std::string> split_trace_header(std::string_view trace);

}  // namespace specfault
