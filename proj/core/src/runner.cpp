#include "specfault/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "process.hpp"
#include "specfault/error.hpp"

extern char** environ;

namespace specfault {

namespace {

constexpr const char* kModule = "test-runner";

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::ConfigError, kModule, detail);
}

std::filesystem::path absolute_project(const RunConfig& config) {
  return std::filesystem::absolute(config.project_path).lexically_normal();
}

std::filesystem::path effective_work_dir(const RunConfig& config) {
  if (!config.work_dir.empty()) return std::filesystem::absolute(config.work_dir);
  return absolute_project(config) / ".specfault";
}

std::map<std::string, std::string> placeholders(const RunConfig& config) {
  std::string project = absolute_project(config).string();
  while (project.size() > 1 && project.back() == '/') project.pop_back();
  return {{"project", project}, {"outdir", effective_work_dir(config).string()}};
}

std::filesystem::path resolve_working_dir(const RunConfig& config) {
  std::filesystem::path dir =
      detail::expand_placeholders(config.adapter.working_dir, placeholders(config));
  if (dir.empty()) return absolute_project(config);
  if (dir.is_relative()) dir = absolute_project(config) / dir;
  return dir.lexically_normal();
}

std::vector<std::string> child_environment(const RunConfig& config,
                                           const std::map<std::string, std::string>& values) {
  std::vector<std::string> env;
  std::set<std::string> keys;
  for (const auto& kv : config.adapter.env) {
    auto eq = kv.find('=');
    keys.insert(kv.substr(0, eq));
    env.push_back(detail::expand_placeholders(kv, values));
  }
  for (const auto& name : config.adapter.env_allowlist) {
    if (keys.contains(name)) continue;
    if (const char* value = std::getenv(name.c_str())) {
      env.push_back(name + "=" + value);
      keys.insert(name);
    }
  }
  std::sort(env.begin(), env.end());
  return env;
}

std::uint32_t fnv1a(std::string_view text) {
  std::uint32_t hash = 2166136261u;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 16777619u;
  }
  return hash;
}

struct ArtifactContent {
  LocationSet covered;
  std::optional<std::string> raw_trace;
};

std::optional<ArtifactContent> read_artifact(const std::filesystem::path& path,
                                             const RunConfig& config) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  IngestOptions options;
  options.strip_prefixes = {absolute_project(config).string(),
                            resolve_working_dir(config).string()};
  ArtifactContent content;
  try {
    if (config.adapter.format == ArtifactFormat::Canonical) {
      for (auto& report : parse_canonical(in, options)) {
        content.covered.merge(report.covered);
        if (!content.raw_trace) content.raw_trace = std::move(report.raw_trace);
      }
    } else {
      for (auto& section : parse_lcov_sections(in, options)) {
        content.covered.merge(section.covered);
      }
    }
  } catch (const Error& e) {
    spdlog::warn("unparseable coverage artifact {}: {}", path.string(), e.what());
    return std::nullopt;
  }
  return content;
}

/// Drops stderr noise above the first frame: the trace header is the line
/// just before it.
std::string trim_to_trace(const std::string& text, const FrameGrammar& grammar) {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n' && i + 1 < text.size()) starts.push_back(i + 1);
  }
  for (std::size_t k = 1; k < starts.size(); ++k) {
    std::size_t end = text.find('\n', starts[k]);
    std::string_view line(text.data() + starts[k],
                          (end == std::string::npos ? text.size() : end) - starts[k]);
    if (grammar.match(line)) return text.substr(starts[k - 1]);
  }
  return text;
}

}  // namespace

AdapterConfig parse_adapter(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("adapter document: ") + e.what());
  }
  if (!doc.is_object()) config_error("adapter document must be a JSON object");

  AdapterConfig adapter;
  auto text = [&](const char* key, std::string& target, bool required) {
    auto it = doc.find(key);
    if (it == doc.end()) {
      if (required) config_error(std::string("adapter lacks \"") + key + "\"");
      return;
    }
    if (!it->is_string()) config_error(std::string("adapter \"") + key + "\" must be a string");
    target = it->get<std::string>();
  };
  text("discover_command", adapter.discover_command, true);
  text("run_command", adapter.run_command, true);
  text("coverage_artifact", adapter.coverage_artifact, false);
  text("working_dir", adapter.working_dir, false);

  std::string format = "canonical";
  text("format", format, false);
  std::transform(format.begin(), format.end(), format.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (format == "canonical") {
    adapter.format = ArtifactFormat::Canonical;
  } else if (format == "lcov") {
    adapter.format = ArtifactFormat::Lcov;
  } else {
    config_error("adapter \"format\" must be canonical or lcov");
  }

  if (auto it = doc.find("env"); it != doc.end()) {
    if (it->is_array()) {
      for (const auto& kv : *it) {
        if (!kv.is_string() || kv.get<std::string>().find('=') == std::string::npos) {
          config_error("adapter \"env\" entries must be KEY=VALUE strings");
        }
        adapter.env.push_back(kv.get<std::string>());
      }
    } else if (it->is_object()) {
      for (const auto& [key, value] : it->items()) {
        if (!value.is_string()) config_error("adapter \"env\" values must be strings");
        adapter.env.push_back(key + "=" + value.get<std::string>());
      }
    } else {
      config_error("adapter \"env\" must be an array or object");
    }
  }
  if (auto it = doc.find("env_allowlist"); it != doc.end()) {
    if (!it->is_array()) config_error("adapter \"env_allowlist\" must be an array");
    adapter.env_allowlist.clear();
    for (const auto& name : *it) {
      if (!name.is_string()) config_error("adapter \"env_allowlist\" entries must be strings");
      adapter.env_allowlist.push_back(name.get<std::string>());
    }
  }
  return adapter;
}

AdapterConfig load_adapter_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read adapter file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_adapter(buf.str());
}

void validate(const RunConfig& config) {
  if (config.timeout.count() <= 0) config_error("timeout must be positive");
  if (config.parallelism < 1) config_error("parallelism must be at least 1");
  if (config.project_path.empty()) config_error("project path is empty");
  if (config.adapter.run_command.find("{test}") == std::string::npos) {
    config_error("run_command lacks the {test} placeholder");
  }
  const std::string& artifact = config.adapter.coverage_artifact;
  if (!artifact.starts_with("{outdir}/")) {
    config_error("coverage_artifact must start with {outdir}/");
  }
  auto rest = std::filesystem::path(artifact.substr(9)).lexically_normal();
  if (rest.empty() || rest.is_absolute() || *rest.begin() == "..") {
    config_error("coverage_artifact escapes {outdir}");
  }
}

std::filesystem::path test_outdir(const RunConfig& config, const TestIdentifier& test) {
  std::string name;
  for (char ch : test.str()) {
    bool plain = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ||
                 ch == '_' || ch == '-';
    name += plain ? ch : '_';
  }
  if (name.size() > 80) name.resize(80);
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "-%08x", fnv1a(test.str()));
  return effective_work_dir(config) / "tests" / (name + suffix);
}

std::filesystem::path journal_path(const RunConfig& config) {
  return effective_work_dir(config) / "coverage.jsonl";
}

std::vector<TestIdentifier> discover_tests(const RunConfig& config) {
  validate(config);
  auto values = placeholders(config);
  detail::ProcessSpec spec;
  spec.argv = detail::command_argv(config.adapter.discover_command, values);
  spec.working_dir = resolve_working_dir(config);
  spec.env = child_environment(config, values);
  spec.timeout = config.timeout;
  spec.kill_grace = config.kill_grace;
  spec.capture_stdout = true;
  spec.output_limit = std::size_t{64} << 20;

  auto result = detail::run_process(spec);
  if (result.spawn_failed || result.timed_out || result.exit_code != 0) {
    std::string why = result.timed_out        ? "timed out"
                      : result.term_signal    ? "killed by signal " + std::to_string(result.term_signal)
                      : "exit code " + std::to_string(result.exit_code);
    throw Error(ErrorCode::DiscoveryFailed, kModule, why + "; stderr: " + result.err);
  }

  std::vector<TestIdentifier> tests;
  std::set<std::string> seen;
  std::istringstream lines(result.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!seen.insert(line).second) throw Error(ErrorCode::DuplicateTestName, kModule, line);
    tests.emplace_back(line);
  }
  if (tests.empty()) spdlog::warn("test discovery returned no tests");
  return tests;
}

PerTestReport execute_test(const TestIdentifier& test, const RunConfig& config) {
  validate(config);
  auto outdir = test_outdir(config, test);
  std::error_code ec;
  std::filesystem::remove_all(outdir, ec);
  std::filesystem::create_directories(outdir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, kModule, "cannot create " + outdir.string() + ": " + ec.message());
  }

  auto values = placeholders(config);
  values["outdir"] = outdir.string();
  values["test"] = test.str();

  detail::ProcessSpec spec;
  spec.argv = detail::command_argv(config.adapter.run_command, values);
  spec.working_dir = resolve_working_dir(config);
  spec.env = child_environment(config, values);
  spec.timeout = config.timeout;
  spec.kill_grace = config.kill_grace;
  auto result = detail::run_process(spec);

  auto artifact_path = detail::expand_placeholders(config.adapter.coverage_artifact, values);
  auto artifact = read_artifact(artifact_path, config);

  PerTestReport report;
  report.record.test = test;
  report.record.wall_time_ms = static_cast<std::uint64_t>(result.wall.count());
  Outcome outcome;
  if (result.timed_out) {
    outcome = Outcome::Timeout;
  } else if (result.spawn_failed || result.term_signal != 0) {
    outcome = Outcome::Crashed;
  } else if (!artifact) {
    outcome = Outcome::Crashed;
  } else {
    outcome = result.exit_code == 0 ? Outcome::Passed : Outcome::Failed;
  }
  report.record.outcome = outcome;
  if (artifact) report.covered = std::move(artifact->covered);

  if (outcome == Outcome::Failed || outcome == Outcome::Crashed) {
    if (artifact && artifact->raw_trace) {
      report.raw_trace = artifact->raw_trace;
    } else if (result.err.find_first_not_of(" \t\r\n") != std::string::npos) {
      report.raw_trace = trim_to_trace(result.err, config.trace_grammar);
    }
    if (report.raw_trace) {
      try {
        report.record.exception = parse_stack_trace(*report.raw_trace, config.trace_grammar);
      } catch (const Error& e) {
        spdlog::debug("{}: no parseable trace ({})", test.str(), e.what());
      }
    }
  } else if (outcome == Outcome::Passed && artifact) {
    report.raw_trace = std::move(artifact->raw_trace);
  }
  spdlog::info("{} {} ({} ms)", test.str(), to_string(outcome), report.record.wall_time_ms);
  return report;
}

std::vector<PerTestReport> execute_suite(const RunConfig& config) {
  auto tests = discover_tests(config);
  if (tests.empty()) throw Error(ErrorCode::NoTestsFound, kModule, "discovery returned no tests");

  auto journal_file = journal_path(config);
  std::filesystem::create_directories(journal_file.parent_path());
  std::ofstream journal(journal_file, std::ios::trunc);
  if (!journal) throw Error(ErrorCode::IoError, kModule, "cannot write " + journal_file.string());

  std::vector<std::optional<PerTestReport>> slots(tests.size());
  std::atomic<std::size_t> next{0};
  std::mutex collector;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      std::size_t index = next.fetch_add(1);
      if (index >= tests.size()) return;
      try {
        PerTestReport report = execute_test(tests[index], config);
        std::lock_guard lock(collector);
        journal << serialize_canonical_line(report) << std::flush;
        slots[index] = std::move(report);
      } catch (...) {
        std::lock_guard lock(collector);
        if (!failure) failure = std::current_exception();
        next = tests.size();
      }
    }
  };

  {
    std::size_t workers = std::min<std::size_t>(config.parallelism, tests.size());
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PerTestReport> reports;
  reports.reserve(slots.size());
  for (auto& slot : slots) reports.push_back(std::move(*slot));
  return reports;
}

SuiteResult run_suite(const RunConfig& config) { return merge(execute_suite(config)); }

}  // namespace specfault
