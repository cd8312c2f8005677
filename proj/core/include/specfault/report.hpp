#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "specfault/bridge.hpp"
#include "specfault/model.hpp"

namespace specfault {

struct RunTotals {
  std::uint32_t tests = 0;
  std::uint32_t passing = 0;
  std::uint32_t failing = 0;
  std::uint32_t timeout = 0;
  std::uint32_t crashed = 0;

  static RunTotals from_records(std::span<const TestRecord> records);
  bool operator==(const RunTotals&) const = default;
};

struct LocalizationReport {
  std::vector<SuspiciousLocation> ranked;
  std::string formula;
  RunTotals totals;
  std::uint64_t recovered_line_count = 0;
  std::string tool_version;
  /// Annotated span trees, one per file that has a ranked line.
  std::vector<SpanNode> spans;
};

/// Scores are written with 10 significant digits.
std::string format_score(double score);

/// Exporters return the number of bytes written and throw SinkWriteFailed
/// when the stream rejects the output.
std::size_t export_json(const LocalizationReport& report, std::ostream& sink);
/// Like export_json, plus the annotated span trees under "spans".
std::size_t export_json_tree(const LocalizationReport& report, std::ostream& sink);
std::size_t export_csv(const LocalizationReport& report, std::ostream& sink);
/// `<rank>. <file>:<line> <score>` per line.
std::size_t export_console(const LocalizationReport& report, std::ostream& sink);

using Exporter = std::function<std::size_t(const LocalizationReport&, std::ostream&)>;

class ExporterRegistry {
 public:
  /// "console", "json", "json-tree" and "csv".
  static ExporterRegistry with_builtins();

  /// Throws DuplicateExporterName.
  std::string register_exporter(std::string name, Exporter fn);
  /// Throws UnknownFormat.
  const Exporter& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Exporter> exporters_;
};

}  // namespace specfault
