#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "specfault/error.hpp"

namespace specfault::cli {

namespace {

spdlog::level::level_enum log_level_from_env() {
  const char* value = std::getenv("SPECFAULT_LOG");
  std::string level = value ? value : "warn";
  if (level == "error") return spdlog::level::err;
  if (level == "info") return spdlog::level::info;
  if (level == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

class ScopedLogger {
 public:
  explicit ScopedLogger(std::ostream& err) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("specfault", sink);
    logger->set_pattern("specfault: %l: %v");
    logger->set_level(log_level_from_env());
    spdlog::set_default_logger(logger);
  }
  ~ScopedLogger() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

bool is_usage_error(ErrorCode code) {
  return code == ErrorCode::ConfigError || code == ErrorCode::UnknownFormula ||
         code == ErrorCode::UnknownFormat;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    if (comma > pos) out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return main(args, out, err, Localizer{}, ExporterRegistry::with_builtins());
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
         const Localizer& localizer, const ExporterRegistry& exporters) {
  ScopedLogger logging(err);

  LocalizerConfig config;
  std::string project, coverage_dir, adapter, output, outcomes, work_dir;
  std::string comment_prefixes;

  CLI::App app{"Spectrum-based fault localization over per-test line coverage", "specfault"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.add_option("--projectpath", project, "Project root; paths in reports are relative to it")
      ->required();
  app.add_option("--formula", config.formula, "Suspiciousness formula")
      ->capture_default_str();
  app.add_option("--threshold", config.threshold, "Report lines scoring strictly above this")
      ->capture_default_str();
  app.add_option("--test-timeout-ms", config.test_timeout_ms, "Per-test timeout")
      ->capture_default_str();
  app.add_option("--jobs", config.jobs, "Tests run concurrently")->capture_default_str();
  app.add_option("--format", config.format, "console, json, json-tree or csv")
      ->capture_default_str();
  app.add_option("--output", output, "Write the report here instead of stdout");
  app.add_option("--coverage-dir", coverage_dir, "Offline mode: directory of per-test reports");
  app.add_option("--outcomes", outcomes, "Test outcome map for LCOV input (JSON object)");
  app.add_option("--adapter", adapter, "Adapter file describing how to discover and run tests");
  app.add_option("--work-dir", work_dir, "Per-test artifacts and run journal (default <project>/.specfault)");
  app.add_option("--trace-grammar", config.trace_grammar,
                 "Stack frame syntax: at, colon, or a regex with (?<file>) and (?<line>)")
      ->capture_default_str();
  app.add_flag("--recover-exceptions,!--no-recover-exceptions", config.recover_exceptions,
               "Recover coverage lost at exception sites from stack traces")
      ->capture_default_str();
  app.add_flag("--recover-whole-block", config.recover_whole_block,
               "Recover the whole enclosing block, not just up to the frame line");
  app.add_option("--comment-prefixes", comment_prefixes,
                 "Comma-separated line-comment prefixes (default //,#)");
  app.add_option("--include", config.include_globs, "Only report files matching these globs");
  app.add_option("--exclude", config.exclude_globs, "Never report files matching these globs");

  std::vector<std::string> argv_storage{"specfault"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  config.project_path = project;
  if (!coverage_dir.empty()) config.coverage_dir = coverage_dir;
  if (!adapter.empty()) config.adapter_file = adapter;
  if (!output.empty()) config.output = output;
  if (!outcomes.empty()) config.outcomes_file = outcomes;
  if (!work_dir.empty()) config.work_dir = work_dir;
  if (!comment_prefixes.empty()) config.comment_prefixes = split_commas(comment_prefixes);

  try {
    const Exporter& exporter = exporters.get(config.format);
    LocalizationReport report = localizer.run(config);
    if (config.output) {
      std::ofstream file(*config.output, std::ios::binary | std::ios::trunc);
      exporter(report, file);
    } else {
      exporter(report, out);
    }
    return 0;
  } catch (const Error& e) {
    err << "specfault: error: " << e.what() << "\n";
    if (is_usage_error(e.code())) {
      err << "Run with --help for usage.\n";
      return 1;
    }
    return 2;
  } catch (const std::exception& e) {
    err << "specfault: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace specfault::cli
