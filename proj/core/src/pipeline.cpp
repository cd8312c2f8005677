#include "specfault/pipeline.hpp"

#include <fstream>
#include <set>

#include <boost/regex.hpp>
#include <spdlog/spdlog.h>

#include "specfault/error.hpp"
#include "specfault/ingest.hpp"
#include "specfault/recovery.hpp"
#include "specfault/runner.hpp"

#ifndef SPECFAULT_VERSION
#define SPECFAULT_VERSION "0.0.0"
#endif

namespace specfault {

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::ConfigError, kModule, detail);
}

std::string glob_to_regex(const std::string& glob) {
  std::string re;
  for (std::size_t i = 0; i < glob.size(); ++i) {
    char ch = glob[i];
    if (ch == '*') {
      if (i + 1 < glob.size() && glob[i + 1] == '*') {
        ++i;
        if (i + 1 < glob.size() && glob[i + 1] == '/') {
          ++i;
          re += "(?:.*/)?";
        } else {
          re += ".*";
        }
      } else {
        re += "[^/]*";
      }
    } else if (ch == '?') {
      re += "[^/]";
    } else if (ch == '[') {
      auto close = glob.find(']', i + 1);
      if (close == std::string::npos) {
        re += "\\[";
      } else {
        std::string body = glob.substr(i + 1, close - i - 1);
        if (!body.empty() && body[0] == '!') body[0] = '^';
        re += "[" + body + "]";
        i = close;
      }
    } else if (std::string_view(".^$|()+{}\\").find(ch) != std::string_view::npos) {
      re += '\\';
      re += ch;
    } else {
      re += ch;
    }
  }
  return re;
}

bool glob_match(const std::string& glob, const std::string& path) {
  return boost::regex_match(path, boost::regex(glob_to_regex(glob)));
}

}  // namespace

const char* tool_version() noexcept { return SPECFAULT_VERSION; }

bool path_selected(const std::string& path, const std::vector<std::string>& include,
                   const std::vector<std::string>& exclude) {
  auto any = [&](const std::vector<std::string>& globs) {
    return std::any_of(globs.begin(), globs.end(),
                       [&](const std::string& g) { return glob_match(g, path); });
  };
  if (!include.empty() && !any(include)) return false;
  return !any(exclude);
}

void validate(const LocalizerConfig& config, const FormulaRegistry& formulas) {
  if (config.project_path.empty()) config_error("--projectpath is required");
  if (!std::filesystem::is_directory(config.project_path)) {
    config_error("project path is not a directory: " + config.project_path.string());
  }
  if (config.adapter_file.has_value() == config.coverage_dir.has_value()) {
    config_error("exactly one of --adapter and --coverage-dir must be given");
  }
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    config_error("threshold must lie in [0, 1]");
  }
  if (config.test_timeout_ms <= 0) config_error("test timeout must be positive");
  if (config.jobs < 1) config_error("jobs must be at least 1");
  formulas.get(config.formula);  // UnknownFormula
}

LocalizationReport Localizer::run(const LocalizerConfig& config) const {
  validate(config, formulas);
  const auto project = std::filesystem::absolute(config.project_path).lexically_normal();
  const std::vector<std::string> strip{project.string()};

  FrameGrammar grammar = [&] {
    try {
      return FrameGrammar::from_name_or_pattern(config.trace_grammar);
    } catch (const Error& e) {
      config_error(e.detail());
    }
  }();
  grammar.set_strip_prefixes(strip);

  std::vector<PerTestReport> reports;
  if (config.coverage_dir) {
    std::optional<OutcomeMap> outcomes;
    if (config.outcomes_file) {
      std::ifstream in(*config.outcomes_file);
      if (!in) config_error("cannot read outcomes file " + config.outcomes_file->string());
      outcomes = parse_outcome_map(in);
    }
    reports = read_coverage_dir(*config.coverage_dir, {strip}, outcomes);
  } else {
    std::filesystem::path adapter_path = *config.adapter_file;
    if (!std::filesystem::exists(adapter_path) && adapter_path.is_relative() &&
        std::filesystem::exists(project / adapter_path)) {
      adapter_path = project / adapter_path;
    }
    RunConfig run_config{.adapter = load_adapter_file(adapter_path),
                         .timeout = std::chrono::milliseconds(config.test_timeout_ms),
                         .parallelism = config.jobs,
                         .project_path = project,
                         .work_dir = config.work_dir.value_or(std::filesystem::path{}),
                         .trace_grammar = grammar};
    validate(run_config);
    reports = execute_suite(run_config);
  }

  for (auto& report : reports) {
    auto outcome = report.record.outcome;
    bool may_carry = outcome == Outcome::Failed || outcome == Outcome::Crashed;
    if (!may_carry) {
      report.record.exception.reset();
      continue;
    }
    if (report.record.exception || !report.raw_trace) continue;
    try {
      report.record.exception = parse_stack_trace(*report.raw_trace, grammar);
    } catch (const Error& e) {
      spdlog::warn("{}: trace not parsed: {}", report.record.test.str(), e.what());
    }
  }

  SuiteResult suite = merge(reports);
  std::uint64_t recovered = 0;
  SourceCache sources(project);

  if (config.recover_exceptions) {
    // Recovery stays within files the coverage tool instruments; lines
    // elsewhere could only ever be reported for failing tests.
    std::set<std::string> instrumented;
    for (const auto& [test, lines] : suite.matrix) {
      for (const auto& loc : lines) instrumented.insert(loc.file);
    }
    RecoveryOptions options{config.comment_prefixes, config.recover_whole_block};
    for (const auto& record : suite.records) {
      bool eligible = record.outcome == Outcome::Failed || record.outcome == Outcome::Crashed;
      if (!eligible || !record.exception) continue;
      ExceptionRecord frames = *record.exception;
      std::erase_if(frames.frames, [&](const StackFrame& f) {
        return !instrumented.contains(f.file);
      });
      if (frames.frames.empty()) continue;
      auto& covered = suite.matrix[record.test];
      auto result = recover(frames, sources.provider(), covered, options);
      for (const auto& w : result.warnings) spdlog::warn("{}: {}", record.test.str(), w);
      recovered += result.added.size();
      covered.merge(result.added);
    }
  }

  if (!config.include_globs.empty() || !config.exclude_globs.empty()) {
    for (auto& [test, lines] : suite.matrix) {
      std::erase_if(lines, [&](const Location& loc) {
        return !path_selected(loc.file, config.include_globs, config.exclude_globs);
      });
    }
  }

  LocalizationReport report;
  report.ranked = localize(suite.matrix, suite.records, config.formula, config.threshold, formulas);
  report.formula = config.formula;
  report.totals = RunTotals::from_records(suite.records);
  report.recovered_line_count = recovered;
  report.tool_version = tool_version();

  std::map<std::string, SpanNode> trees;
  for (const auto& s : report.ranked) {
    if (trees.contains(s.location.file)) continue;
    auto text = sources.get(s.location.file);
    if (!text) continue;
    trees.emplace(s.location.file,
                  build_span_tree(*text, syntax_for_path(s.location.file, config.comment_prefixes),
                                  s.location.file)
                      .root);
  }
  for (const auto& w : annotate(trees, report.ranked)) spdlog::warn("{}", w);
  for (auto& [file, tree] : trees) report.spans.push_back(std::move(tree));
  return report;
}

}  // namespace specfault
