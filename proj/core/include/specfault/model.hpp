#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specfault {

/// Name of one test, unique within a localization run. Never empty and never
/// contains a line break.
class TestIdentifier {
 public:
  TestIdentifier() = default;
  explicit TestIdentifier(std::string id);

  const std::string& str() const noexcept { return id_; }

  auto operator<=>(const TestIdentifier&) const = default;

 private:
  std::string id_;
};

enum class Outcome { Passed, Failed, Timeout, Crashed };

std::string_view to_string(Outcome outcome) noexcept;
/// Parses "PASSED" / "FAILED" / "TIMEOUT" / "CRASHED".
std::optional<Outcome> parse_outcome(std::string_view text) noexcept;

/// TIMEOUT and CRASHED are scored like FAILED.
constexpr bool is_failing(Outcome outcome) noexcept {
  return outcome != Outcome::Passed;
}

struct StackFrame {
  std::string file;
  std::string scope;
  std::uint32_t line = 1;

  bool operator==(const StackFrame&) const = default;
};

/// A parsed exception. Frames are innermost first.
struct ExceptionRecord {
  std::string type_name;
  std::string message;
  std::vector<StackFrame> frames;

  bool operator==(const ExceptionRecord&) const = default;
};

struct TestRecord {
  TestIdentifier test;
  Outcome outcome = Outcome::Passed;
  std::uint64_t wall_time_ms = 0;
  std::optional<ExceptionRecord> exception;

  bool operator==(const TestRecord&) const = default;
};

struct Location {
  std::string file;
  std::uint32_t line = 1;

  auto operator<=>(const Location&) const = default;
};

using LocationSet = std::set<Location>;

/// Per-test covered lines.
using CoverageMatrix = std::map<TestIdentifier, LocationSet>;

struct SpectrumCounts {
  std::uint32_t ef = 0;  // failing tests covering the line
  std::uint32_t ep = 0;  // passing tests covering the line
  std::uint32_t nf = 0;  // failing tests not covering the line
  std::uint32_t np = 0;  // passing tests not covering the line

  bool operator==(const SpectrumCounts&) const = default;
};

struct SuspiciousLocation {
  Location location;
  double score = 0.0;
  SpectrumCounts counts;

  bool operator==(const SuspiciousLocation&) const = default;
};

using Spectrum = std::map<Location, SpectrumCounts>;

/// Normalizes a path to '/'-separated lexical form, dropping a leading "./"
/// and the first matching prefix of `strip_prefixes`. Throws InvalidArgument
/// for empty paths and for paths that escape their root through "..".
std::string normalize_path(std::string_view path,
                           std::span<const std::string> strip_prefixes = {});

/// Builds the (ef, ep, nf, np) tallies for every line covered by at least
/// one test.
///
/// Throws UnknownTest when the matrix names a test without a record,
/// DuplicateRecord when two records share an identifier and InvalidArgument
/// when `records` is empty.
Spectrum compute_spectrum(const CoverageMatrix& matrix,
                          std::span<const TestRecord> records);

}  // namespace specfault
