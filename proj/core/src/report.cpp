#include "specfault/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>

#include <nlohmann/json.hpp>

#include "specfault/error.hpp"

namespace specfault {

namespace {

constexpr const char* kModule = "report-export";

using nlohmann::ordered_json;

std::size_t write_all(std::ostream& sink, const std::string& text) {
  if (!sink) throw Error(ErrorCode::SinkWriteFailed, kModule, "sink not writable");
  sink.write(text.data(), static_cast<std::streamsize>(text.size()));
  sink.flush();
  if (!sink) throw Error(ErrorCode::SinkWriteFailed, kModule, "write rejected");
  return text.size();
}

/// The score as a JSON number that prints with at most 10 significant
/// digits (the shortest round-trip form of the rounded value).
double rounded(double score) { return std::strtod(format_score(score).c_str(), nullptr); }

ordered_json report_object(const LocalizationReport& report) {
  ordered_json doc;
  doc["formula"] = report.formula;
  doc["totals"] = {{"tests", report.totals.tests},
                   {"passing", report.totals.passing},
                   {"failing", report.totals.failing},
                   {"timeout", report.totals.timeout},
                   {"crashed", report.totals.crashed}};
  doc["recovered_lines"] = report.recovered_line_count;
  doc["tool_version"] = report.tool_version;
  ordered_json suspicious = ordered_json::array();
  for (const auto& s : report.ranked) {
    suspicious.push_back({{"file", s.location.file},
                          {"line", s.location.line},
                          {"score", rounded(s.score)},
                          {"ef", s.counts.ef},
                          {"ep", s.counts.ep},
                          {"nf", s.counts.nf},
                          {"np", s.counts.np}});
  }
  doc["suspicious"] = std::move(suspicious);
  return doc;
}

ordered_json span_object(const SpanNode& node) {
  ordered_json obj;
  obj["file"] = node.file;
  obj["start"] = node.start;
  obj["end"] = node.end;
  obj["score"] = node.score ? ordered_json(rounded(*node.score)) : ordered_json(nullptr);
  ordered_json children = ordered_json::array();
  for (const auto& child : node.children) children.push_back(span_object(child));
  obj["children"] = std::move(children);
  return obj;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

RunTotals RunTotals::from_records(std::span<const TestRecord> records) {
  RunTotals totals;
  for (const auto& r : records) {
    ++totals.tests;
    switch (r.outcome) {
      case Outcome::Passed: ++totals.passing; break;
      case Outcome::Failed: ++totals.failing; break;
      case Outcome::Timeout: ++totals.timeout; break;
      case Outcome::Crashed: ++totals.crashed; break;
    }
  }
  return totals;
}

std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", score);
  return buf;
}

std::size_t export_json(const LocalizationReport& report, std::ostream& sink) {
  return write_all(sink, report_object(report).dump(2) + "\n");
}

std::size_t export_json_tree(const LocalizationReport& report, std::ostream& sink) {
  ordered_json doc = report_object(report);
  ordered_json spans = ordered_json::array();
  for (const auto& tree : report.spans) spans.push_back(span_object(tree));
  doc["spans"] = std::move(spans);
  return write_all(sink, doc.dump(2) + "\n");
}

std::size_t export_csv(const LocalizationReport& report, std::ostream& sink) {
  std::string out = "file,line,score,ef,ep,nf,np\n";
  for (const auto& s : report.ranked) {
    out += csv_field(s.location.file);
    out += ',' + std::to_string(s.location.line);
    out += ',' + format_score(s.score);
    out += ',' + std::to_string(s.counts.ef);
    out += ',' + std::to_string(s.counts.ep);
    out += ',' + std::to_string(s.counts.nf);
    out += ',' + std::to_string(s.counts.np);
    out += '\n';
  }
  return write_all(sink, out);
}

std::size_t export_console(const LocalizationReport& report, std::ostream& sink) {
  std::string out;
  std::size_t rank = 0;
  for (const auto& s : report.ranked) {
    out += std::to_string(++rank) + ". " + s.location.file + ":" +
           std::to_string(s.location.line) + " " + format_score(s.score) + "\n";
  }
  return write_all(sink, out);
}

ExporterRegistry ExporterRegistry::with_builtins() {
  ExporterRegistry registry;
  registry.register_exporter("console", export_console);
  registry.register_exporter("json", export_json);
  registry.register_exporter("json-tree", export_json_tree);
  registry.register_exporter("csv", export_csv);
  return registry;
}

std::string ExporterRegistry::register_exporter(std::string name, Exporter fn) {
  if (name.empty() || !fn) {
    throw Error(ErrorCode::InvalidArgument, kModule, "exporter needs a name and a function");
  }
  auto [it, fresh] = exporters_.emplace(name, std::move(fn));
  if (!fresh) throw Error(ErrorCode::DuplicateExporterName, kModule, name);
  return it->first;
}

const Exporter& ExporterRegistry::get(const std::string& name) const {
  auto it = exporters_.find(name);
  if (it == exporters_.end()) throw Error(ErrorCode::UnknownFormat, kModule, name);
  return it->second;
}

bool ExporterRegistry::contains(const std::string& name) const {
  return exporters_.contains(name);
}

std::vector<std::string> ExporterRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : exporters_) out.push_back(name);
  return out;
}

}  // namespace specfault
