#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specfault/model.hpp"

namespace specfault {

enum class BlockStyle {
  Braces,       // regions between matching '{' and '}'
  Indentation,  // a line followed by more deeply indented lines
};

/// How a source file is split into blocks and which lines are code.
struct SourceSyntax {
  BlockStyle style = BlockStyle::Braces;
  /// A line whose first non-blank characters are one of these is a comment.
  /// In brace style these also start trailing comments.
  std::vector<std::string> comment_prefixes = {"//", "#"};
};

/// Indentation for `.py` files, braces for everything else.
SourceSyntax syntax_for_path(std::string_view path,
                             std::vector<std::string> comment_prefixes = {
                                 "//", "#"});

struct SpanNode {
  enum class Kind { Root, Block, Statement };

  std::string file;
  std::uint32_t start = 1;
  std::uint32_t end = 1;
  Kind kind = Kind::Root;
  std::vector<SpanNode> children;
  std::optional<double> score;
  std::vector<std::pair<std::uint32_t, double>> contributing_lines;

  std::uint32_t amplitude() const noexcept { return end - start + 1; }
  bool contains(std::uint32_t line) const noexcept {
    return start <= line && line <= end;
  }
};

/// Line-level facts about a source file. Index 0 is unused.
struct SourceLines {
  std::uint32_t count = 0;  // at least 1, even for an empty file
  std::vector<bool> executable;
  bool balanced = true;
};

struct SpanTree {
  SpanNode root;
  SourceLines lines;
};

/// Builds the nested span tree of one file. Blocks become Block nodes;
/// every code line not claimed by a child block or by its parent's own
/// delimiter lines becomes a single-line Statement leaf.
///
/// With `strict`, unbalanced braces throw UnbalancedDelimiters; otherwise
/// stray closers are ignored, open blocks are closed at end of file and
/// `lines.balanced` is cleared.
SpanTree build_span_tree(std::string_view source, const SourceSyntax& syntax,
                         std::string file = {}, bool strict = false);

/// The node `line` maps to: the shallowest node spanning exactly that line,
/// else the smallest container, the deeper one on equal amplitude.
/// Throws LineOutsideFile.
const SpanNode& map_line_to_node(const SpanNode& root, std::uint32_t line);
SpanNode& map_line_to_node(SpanNode& root, std::uint32_t line);

/// Attaches each location's score to its mapped node (node score is the
/// max of its contributions). Locations whose file has no tree, or that
/// fall outside it, are skipped; one warning per skip is returned.
std::vector<std::string> annotate(std::map<std::string, SpanNode>& trees,
                                  std::span<const SuspiciousLocation> results);

}  // namespace specfault
