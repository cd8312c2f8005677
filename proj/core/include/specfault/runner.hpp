#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "specfault/ingest.hpp"
#include "specfault/model.hpp"
#include "specfault/recovery.hpp"

namespace specfault {

enum class ArtifactFormat { Canonical, Lcov };

/// How to discover and run one project's tests. Command templates may use
/// {project}, {outdir} and (run_command only) {test}. A template without
/// shell syntax is split on whitespace and executed directly; otherwise it
/// runs under /bin/sh -c with placeholder values shell-quoted.
struct AdapterConfig {
  std::string discover_command;
  std::string run_command;
  /// Where the per-test report appears; must start with "{outdir}/".
  std::string coverage_artifact = "{outdir}/coverage.json";
  ArtifactFormat format = ArtifactFormat::Canonical;
  std::string working_dir = "{project}";
  /// KEY=VALUE pairs; values may use placeholders.
  std::vector<std::string> env;
  /// Parent variables passed through unless `env` sets them.
  std::vector<std::string> env_allowlist = {"PATH", "HOME", "TMPDIR"};
};

/// Reads an adapter document: a JSON object whose keys are the
/// AdapterConfig field names. `env` is an array of "KEY=VALUE" strings or
/// an object. Throws ConfigError.
AdapterConfig parse_adapter(const std::string& json_text);
AdapterConfig load_adapter_file(const std::filesystem::path& path);

struct RunConfig {
  AdapterConfig adapter;
  std::chrono::milliseconds timeout{60000};
  unsigned parallelism = 1;
  std::filesystem::path project_path;
  /// Per-test output directories and the run journal (`coverage.jsonl`)
  /// live here. Defaults to `<project>/.specfault`.
  std::filesystem::path work_dir;
  FrameGrammar trace_grammar = FrameGrammar::at_style();
  /// SIGTERM-to-SIGKILL delay when a test overruns its timeout.
  std::chrono::milliseconds kill_grace{2000};
};

/// Throws ConfigError when the config breaks its invariants.
void validate(const RunConfig& config);

/// Runs the discovery command under the test timeout. One identifier per
/// output line, blank lines dropped. Throws DiscoveryFailed or
/// DuplicateTestName.
std::vector<TestIdentifier> discover_tests(const RunConfig& config);

/// Runs one test in its own process group and classifies the result.
/// Never throws for test failures; everything is encoded in the outcome.
PerTestReport execute_test(const TestIdentifier& test, const RunConfig& config);

/// Per-test reports for every discovered test, in discovery order. Each
/// completed report is also appended to `<work_dir>/coverage.jsonl`.
/// Throws DiscoveryFailed or NoTestsFound.
std::vector<PerTestReport> execute_suite(const RunConfig& config);

/// merge(execute_suite(config)).
SuiteResult run_suite(const RunConfig& config);

/// The per-test output directory used for `test`.
std::filesystem::path test_outdir(const RunConfig& config, const TestIdentifier& test);

/// Path of the run journal.
std::filesystem::path journal_path(const RunConfig& config);

}  // namespace specfault
