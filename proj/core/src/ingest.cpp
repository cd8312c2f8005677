#include "specfault/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "specfault/error.hpp"

namespace specfault {

namespace {

constexpr const char* kModule = "coverage-ingest";

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void malformed(std::size_t line_no, const std::string& reason) {
  throw Error(ErrorCode::MalformedLine, kModule,
              "line " + std::to_string(line_no) + ": " + reason);
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

PerTestReport parse_canonical_object(const json& obj, std::size_t line_no,
                                     const IngestOptions& options) {
  if (!obj.is_object()) malformed(line_no, "not a JSON object");

  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) {
      throw Error(ErrorCode::MissingField, kModule,
                  std::string(key) + " (line " + std::to_string(line_no) + ")");
    }
    return *it;
  };

  PerTestReport report;
  const json& test = require("test");
  if (!test.is_string()) malformed(line_no, "\"test\" must be a string");
  try {
    report.record.test = TestIdentifier(test.get<std::string>());
  } catch (const Error& e) {
    malformed(line_no, e.detail());
  }

  const json& outcome = require("outcome");
  if (!outcome.is_string()) malformed(line_no, "\"outcome\" must be a string");
  auto parsed = parse_outcome(outcome.get<std::string>());
  if (!parsed) {
    malformed(line_no, "unknown outcome \"" + outcome.get<std::string>() + "\"");
  }
  report.record.outcome = *parsed;

  if (auto it = obj.find("wall_time_ms"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      malformed(line_no, "\"wall_time_ms\" must be a non-negative integer");
    }
    report.record.wall_time_ms = it->get<std::uint64_t>();
  }

  if (auto it = obj.find("exception"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) malformed(line_no, "\"exception\" must be an object");
    auto text_field = [&](const char* key) -> std::string {
      auto f = it->find(key);
      if (f == it->end() || f->is_null()) return {};
      if (!f->is_string()) {
        malformed(line_no, std::string("\"exception.") + key +
                               "\" must be a string");
      }
      return f->get<std::string>();
    };
    std::string trace = text_field("trace");
    if (trace.empty()) {
      std::string type = text_field("type");
      std::string message = text_field("message");
      trace = message.empty() ? type : type + ": " + message;
    }
    if (!trace.empty()) report.raw_trace = std::move(trace);
  }

  const json& files = require("files");
  if (!files.is_array()) malformed(line_no, "\"files\" must be an array");
  for (const auto& file : files) {
    if (!file.is_object()) malformed(line_no, "file entry must be an object");
    auto path = file.find("path");
    auto lines = file.find("lines");
    if (path == file.end()) {
      throw Error(ErrorCode::MissingField, kModule,
                  "files[].path (line " + std::to_string(line_no) + ")");
    }
    if (lines == file.end()) {
      throw Error(ErrorCode::MissingField, kModule,
                  "files[].lines (line " + std::to_string(line_no) + ")");
    }
    if (!path->is_string() || !lines->is_array()) {
      malformed(line_no, "file entry has wrong field types");
    }
    std::string norm;
    try {
      norm = normalize_path(path->get<std::string>(), options.strip_prefixes);
    } catch (const Error& e) {
      malformed(line_no, e.detail());
    }
    for (const auto& l : *lines) {
      if (!l.is_number_integer() || l.get<std::int64_t>() < 1 ||
          l.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
        malformed(line_no, "line numbers must be positive integers");
      }
      report.covered.insert({norm, l.get<std::uint32_t>()});
    }
  }
  return report;
}

std::string format_frames(const ExceptionRecord& ex) {
  std::string out = ex.message.empty() ? ex.type_name
                                       : ex.type_name + ": " + ex.message;
  for (const auto& f : ex.frames) {
    out += "\n  at " + f.scope + " (" + f.file + ":" +
           std::to_string(f.line) + ")";
  }
  return out;
}

}  // namespace

std::pair<std::string, std::string> split_trace_header(std::string_view trace) {
  std::string_view first = trace.substr(0, trace.find('\n'));
  std::string header = trim(first);
  auto sep = header.find(": ");
  if (sep == std::string::npos) return {header, {}};
  return {header.substr(0, sep), header.substr(sep + 2)};
}

std::vector<PerTestReport> parse_canonical(std::istream& in,
                                           const IngestOptions& options) {
  std::vector<PerTestReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(line_no, e.what());
    }
    reports.push_back(parse_canonical_object(obj, line_no, options));
  }
  return reports;
}

std::string serialize_canonical_line(const PerTestReport& report) {
  ordered_json obj;
  obj["test"] = report.record.test.str();
  obj["outcome"] = std::string(to_string(report.record.outcome));
  obj["wall_time_ms"] = report.record.wall_time_ms;

  if (report.raw_trace || report.record.exception) {
    ordered_json ex;
    std::string trace = report.raw_trace
                            ? *report.raw_trace
                            : format_frames(*report.record.exception);
    if (report.record.exception) {
      ex["type"] = report.record.exception->type_name;
      ex["message"] = report.record.exception->message;
    } else {
      auto [type, message] = split_trace_header(trace);
      ex["type"] = type;
      ex["message"] = message;
    }
    ex["trace"] = trace;
    obj["exception"] = std::move(ex);
  }

  ordered_json files = ordered_json::array();
  const std::string* current = nullptr;
  for (const auto& loc : report.covered) {
    if (!current || *current != loc.file) {
      files.push_back({{"path", loc.file}, {"lines", ordered_json::array()}});
      current = &loc.file;
    }
    files.back()["lines"].push_back(loc.line);
  }
  obj["files"] = std::move(files);
  return obj.dump() + "\n";
}

void serialize_canonical(const std::vector<PerTestReport>& reports,
                         std::ostream& out) {
  for (const auto& r : reports) out << serialize_canonical_line(r);
}

std::vector<LcovSection> parse_lcov_sections(std::istream& in,
                                             const IngestOptions& options) {
  std::vector<LcovSection> sections;
  std::map<std::string, std::size_t> index;
  std::optional<std::string> test_name;
  std::optional<std::string> source;
  LcovSection* target = nullptr;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto where = " (line " + std::to_string(line_no) + ")";

    if (line.starts_with("TN:")) {
      std::string name = trim(std::string_view(line).substr(3));
      test_name = name.empty() ? std::nullopt : std::optional(name);
      target = nullptr;
    } else if (line.starts_with("SF:")) {
      if (!test_name) {
        throw Error(ErrorCode::MissingTN, kModule, "record without TN" + where);
      }
      try {
        source = normalize_path(trim(std::string_view(line).substr(3)),
                                options.strip_prefixes);
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedLine, kModule, e.detail() + where);
      }
      auto [it, fresh] = index.emplace(*test_name, sections.size());
      if (fresh) sections.push_back({*test_name, {}});
      target = &sections[it->second];
    } else if (line.starts_with("DA:")) {
      if (!target || !source) {
        throw Error(ErrorCode::MalformedDA, kModule, "DA outside SF" + where);
      }
      std::string_view body = std::string_view(line).substr(3);
      auto comma = body.find(',');
      if (comma == std::string_view::npos) {
        throw Error(ErrorCode::MalformedDA, kModule, line + where);
      }
      std::string_view num = body.substr(0, comma);
      std::string_view rest = body.substr(comma + 1);
      std::string_view hits = rest.substr(0, rest.find(','));
      std::uint32_t line_number = 0;
      std::int64_t hit_count = 0;
      auto r1 = std::from_chars(num.data(), num.data() + num.size(), line_number);
      auto r2 = std::from_chars(hits.data(), hits.data() + hits.size(), hit_count);
      if (r1.ec != std::errc{} || r1.ptr != num.data() + num.size() ||
          r2.ec != std::errc{} || r2.ptr != hits.data() + hits.size() ||
          line_number == 0) {
        throw Error(ErrorCode::MalformedDA, kModule, line + where);
      }
      if (hit_count > 0) target->covered.insert({*source, line_number});
    } else if (line == "end_of_record") {
      source.reset();
      target = nullptr;
    }
    // FN, FNDA, BRDA, LF, LH, ... carry nothing the line spectrum needs.
  }
  return sections;
}

std::vector<PerTestReport> parse_lcov(std::istream& in,
                                      const OutcomeMap& outcomes,
                                      const IngestOptions& options) {
  std::vector<PerTestReport> reports;
  for (auto& section : parse_lcov_sections(in, options)) {
    auto it = outcomes.find(section.test_name);
    if (it == outcomes.end()) {
      throw Error(ErrorCode::UnknownOutcome, kModule, section.test_name);
    }
    PerTestReport report;
    report.record.test = TestIdentifier(section.test_name);
    report.record.outcome = it->second;
    report.covered = std::move(section.covered);
    reports.push_back(std::move(report));
  }
  return reports;
}

OutcomeMap parse_outcome_map(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, kModule,
                std::string("outcome map: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::MalformedLine, kModule,
                "outcome map must be a JSON object");
  }
  OutcomeMap map;
  for (const auto& [name, value] : doc.items()) {
    std::optional<Outcome> outcome;
    if (value.is_string()) outcome = parse_outcome(value.get<std::string>());
    if (!outcome) {
      throw Error(ErrorCode::MalformedLine, kModule,
                  "outcome map: bad outcome for \"" + name + "\"");
    }
    map.emplace(name, *outcome);
  }
  return map;
}

SuiteResult merge(const std::vector<PerTestReport>& reports) {
  SuiteResult result;
  result.records.reserve(reports.size());
  for (const auto& r : reports) {
    if (!result.matrix.emplace(r.record.test, r.covered).second) {
      throw Error(ErrorCode::DuplicateTest, kModule, r.record.test.str());
    }
    result.records.push_back(r.record);
  }
  return result;
}

std::vector<PerTestReport> read_coverage_dir(
    const std::filesystem::path& dir, const IngestOptions& options,
    const std::optional<OutcomeMap>& outcomes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, kModule,
                "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::IoError, kModule, "cannot read " + p.string());
    return in;
  };

  std::optional<OutcomeMap> lcov_outcomes = outcomes;
  std::vector<PerTestReport> reports;
  for (const auto& file : files) {
    auto ext = file.extension().string();
    if (file.filename() == "outcomes.json") continue;
    if (ext == ".jsonl" || ext == ".json") {
      auto in = open(file);
      auto parsed = parse_canonical(in, options);
      std::move(parsed.begin(), parsed.end(), std::back_inserter(reports));
    } else if (ext == ".info" || ext == ".lcov") {
      if (!lcov_outcomes) {
        auto sidecar = dir / "outcomes.json";
        if (!fs::exists(sidecar)) {
          throw Error(ErrorCode::UnknownOutcome, kModule,
                      "LCOV input without outcomes.json: " + file.string());
        }
        auto in = open(sidecar);
        lcov_outcomes = parse_outcome_map(in);
      }
      auto in = open(file);
      auto parsed = parse_lcov(in, *lcov_outcomes, options);
      std::move(parsed.begin(), parsed.end(), std::back_inserter(reports));
    }
  }
  return reports;
}

}  // namespace specfault
