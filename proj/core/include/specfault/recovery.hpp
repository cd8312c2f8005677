#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specfault/bridge.hpp"
#include "specfault/model.hpp"

namespace specfault {

/// Stack-frame line syntax: a regular expression with named captures
/// `file` and `line`, optionally `scope`.
class FrameGrammar {
 public:
  /// Compiles `pattern`. Throws InvalidArgument if it does not compile or
  /// lacks the `file` / `line` captures.
  explicit FrameGrammar(std::string pattern,
                        std::vector<std::string> strip_prefixes = {});

  /// `at SCOPE (FILE:LINE)`, as printed by JVM- and JS-style runtimes.
  static FrameGrammar at_style();
  /// `FILE:LINE: in SCOPE`, as printed by pytest's short tracebacks.
  static FrameGrammar colon_style();
  /// "at" and "colon" select the shipped grammars; anything else is taken
  /// as a pattern.
  static FrameGrammar from_name_or_pattern(const std::string& spec);

  const std::string& pattern() const noexcept { return pattern_; }
  const std::vector<std::string>& strip_prefixes() const noexcept {
    return strip_prefixes_;
  }
  void set_strip_prefixes(std::vector<std::string> prefixes) {
    strip_prefixes_ = std::move(prefixes);
  }

  /// Matches one trace line. The file path comes back normalized.
  std::optional<StackFrame> match(std::string_view line) const;

 private:
  struct Compiled;
  std::string pattern_;
  std::vector<std::string> strip_prefixes_;
  std::shared_ptr<const Compiled> compiled_;
};

/// First line gives type and message (split on the first ": "); every later
/// line the grammar matches becomes a frame, in order. Throws NoFramesFound
/// when nothing matches and InvalidArgument on empty text.
ExceptionRecord parse_stack_trace(std::string_view text,
                                  const FrameGrammar& grammar);

struct BlockSpan {
  std::string file;
  std::uint32_t start = 1;
  std::uint32_t end = 1;

  bool operator==(const BlockSpan&) const = default;
};

struct BlockLookup {
  BlockSpan span;
  bool balanced = true;  // false: best-effort span over unbalanced source
};

/// Innermost block containing `line`, or the whole file when no block does.
/// Throws LineOutsideFile; with `strict`, UnbalancedDelimiters.
BlockLookup enclosing_block(std::string_view source, std::uint32_t line,
                            const SourceSyntax& syntax, bool strict = false);

/// Returns file contents by normalized relative path; null when the file
/// cannot be read.
using SourceProvider =
    std::function<std::shared_ptr<const std::string>(const std::string&)>;

/// Reads files under a root directory once and shares the contents.
class SourceCache {
 public:
  explicit SourceCache(std::filesystem::path root);

  std::shared_ptr<const std::string> get(const std::string& path) const;
  SourceProvider provider() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const std::string>> files_;
};

struct RecoveryOptions {
  std::vector<std::string> comment_prefixes = {"//", "#"};
  /// Recover the frame's whole enclosing block instead of stopping at the
  /// frame line.
  bool whole_block = false;
};

struct RecoveryResult {
  LocationSet added;
  std::vector<std::string> warnings;
};

/// Lines an exception's frames show were executed although the coverage
/// tool did not record them. For each frame: the frame line itself, plus
/// every code line from the start of its enclosing block through the frame
/// line, except the bodies of blocks nested inside it. Lines already in
/// `covered` are never returned.
RecoveryResult recover(const ExceptionRecord& exception,
                       const SourceProvider& sources,
                       const LocationSet& covered,
                       const RecoveryOptions& options = {});

}  // namespace specfault
