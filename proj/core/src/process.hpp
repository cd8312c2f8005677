#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace specfault::detail {

struct ProcessSpec {
  std::vector<std::string> argv;
  std::filesystem::path working_dir;
  std::vector<std::string> env;  // complete child environment, KEY=VALUE
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds kill_grace{2000};
  bool capture_stdout = false;
  std::size_t output_limit = 1 << 20;  // per stream
};

struct ProcessResult {
  int exit_code = -1;
  int term_signal = 0;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string out;
  std::string err;
  std::chrono::milliseconds wall{0};
};

/// Runs argv in a new process group; on timeout the whole group gets
/// SIGTERM, then SIGKILL after the grace period.
ProcessResult run_process(const ProcessSpec& spec);

/// Expands {name} placeholders and turns a command template into argv.
std::vector<std::string> command_argv(const std::string& command_template,
                                      const std::map<std::string, std::string>& values);

std::string expand_placeholders(const std::string& text,
                                const std::map<std::string, std::string>& values,
                                bool shell_quote = false);

}  // namespace specfault::detail
