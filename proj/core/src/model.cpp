#include "specfault/model.hpp"

#include <algorithm>
#include <filesystem>

#include "specfault/error.hpp"

namespace specfault {

namespace {
constexpr const char* kModule = "core-model";
}

TestIdentifier::TestIdentifier(std::string id) : id_(std::move(id)) {
  if (id_.empty()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "empty test identifier");
  }
  if (id_.find_first_of("\r\n") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "test identifier contains a line break");
  }
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Passed: return "PASSED";
    case Outcome::Failed: return "FAILED";
    case Outcome::Timeout: return "TIMEOUT";
    case Outcome::Crashed: return "CRASHED";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view text) noexcept {
  if (text == "PASSED") return Outcome::Passed;
  if (text == "FAILED") return Outcome::Failed;
  if (text == "TIMEOUT") return Outcome::Timeout;
  if (text == "CRASHED") return Outcome::Crashed;
  return std::nullopt;
}

std::string normalize_path(std::string_view path,
                           std::span<const std::string> strip_prefixes) {
  std::string raw(path);
  std::replace(raw.begin(), raw.end(), '\\', '/');
  if (raw.empty()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "empty path");
  }
  std::string norm =
      std::filesystem::path(raw).lexically_normal().generic_string();

  for (const auto& prefix_raw : strip_prefixes) {
    if (prefix_raw.empty()) continue;
    std::string prefix = std::filesystem::path(prefix_raw)
                             .lexically_normal()
                             .generic_string();
    if (prefix.back() != '/') prefix += '/';
    if (norm.starts_with(prefix)) {
      norm.erase(0, prefix.size());
      break;
    }
  }

  while (norm.starts_with("./")) norm.erase(0, 2);
  if (norm.empty() || norm == "." || norm.back() == '/') {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "path does not name a file: " + std::string(path));
  }
  if (norm == ".." || norm.starts_with("../") || norm.starts_with("/../")) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "path escapes its root: " + std::string(path));
  }
  return norm;
}

Spectrum compute_spectrum(const CoverageMatrix& matrix,
                          std::span<const TestRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "spectrum needs at least one test record");
  }
  std::map<TestIdentifier, bool> failing_by_test;
  std::uint32_t total_failing = 0;
  std::uint32_t total_passing = 0;
  for (const auto& rec : records) {
    bool failing = is_failing(rec.outcome);
    if (!failing_by_test.emplace(rec.test, failing).second) {
      throw Error(ErrorCode::DuplicateRecord, kModule, rec.test.str());
    }
    (failing ? total_failing : total_passing)++;
  }

  Spectrum spectrum;
  for (const auto& [test, lines] : matrix) {
    auto it = failing_by_test.find(test);
    if (it == failing_by_test.end()) {
      throw Error(ErrorCode::UnknownTest, kModule, test.str());
    }
    for (const auto& loc : lines) {
      auto& counts = spectrum[loc];
      (it->second ? counts.ef : counts.ep)++;
    }
  }
  for (auto& [loc, counts] : spectrum) {
    counts.nf = total_failing - counts.ef;
    counts.np = total_passing - counts.ep;
  }
  return spectrum;
}

}  // namespace specfault
