#include "specfault/bridge.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "specfault/error.hpp"

namespace specfault {

namespace {

constexpr const char* kModule = "source-bridge";

struct RawBlock {
  std::uint32_t start;
  std::uint32_t end;
  bool end_is_delimiter;
};

struct Scan {
  SourceLines lines;
  std::vector<RawBlock> blocks;
};

std::vector<std::string_view> split_lines(std::string_view source) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < source.size()) {
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view line = source.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

bool is_word_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}

bool starts_with_any(std::string_view text,
                     const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) {
                       return !p.empty() && text.starts_with(p);
                     });
}

std::string_view ltrim(std::string_view s) {
  auto i = s.find_first_not_of(" \t\f\v");
  return i == std::string_view::npos ? std::string_view{} : s.substr(i);
}

Scan scan_braces(const std::vector<std::string_view>& lines,
                 const SourceSyntax& syntax, bool strict) {
  Scan scan;
  const auto n = static_cast<std::uint32_t>(lines.size());
  scan.lines.executable.assign(n + 1, false);
  std::vector<std::uint32_t> open;
  bool in_block_comment = false;

  for (std::uint32_t ln = 1; ln <= n; ++ln) {
    std::string_view text = lines[ln - 1];
    bool code = false;
    char quote = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      char ch = text[i];
      if (in_block_comment) {
        if (text.substr(i).starts_with("*/")) {
          in_block_comment = false;
          ++i;
        }
        continue;
      }
      if (quote) {
        code = true;
        if (ch == '\\') {
          ++i;
        } else if (ch == quote) {
          quote = 0;
        }
        continue;
      }
      if (text.substr(i).starts_with("/*")) {
        in_block_comment = true;
        ++i;
        continue;
      }
      bool at_boundary = i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1]));
      if (at_boundary && starts_with_any(text.substr(i), syntax.comment_prefixes)) {
        break;
      }
      if (ch == '"') {
        quote = ch;
        code = true;
      } else if (ch == '\'') {
        // Character literal only when it closes right away ('x', '\n');
        // otherwise a lone apostrophe (lifetimes, digit separators).
        std::size_t close = (i + 1 < text.size() && text[i + 1] == '\\') ? i + 3 : i + 2;
        if (close < text.size() && text[close] == '\'') {
          i = close;
          code = true;
        }
      } else if (ch == '{') {
        open.push_back(ln);
      } else if (ch == '}') {
        if (open.empty()) {
          if (strict) {
            throw Error(ErrorCode::UnbalancedDelimiters, kModule,
                        "unmatched '}' on line " + std::to_string(ln));
          }
          scan.lines.balanced = false;
        } else {
          scan.blocks.push_back({open.back(), ln, true});
          open.pop_back();
        }
      } else if (is_word_char(ch)) {
        code = true;
      }
    }
    scan.lines.executable[ln] = code;
  }

  if (!open.empty()) {
    if (strict) {
      throw Error(ErrorCode::UnbalancedDelimiters, kModule,
                  "unclosed '{' opened on line " + std::to_string(open.back()));
    }
    scan.lines.balanced = false;
    while (!open.empty()) {
      scan.blocks.push_back({open.back(), std::max<std::uint32_t>(n, 1), false});
      open.pop_back();
    }
  }
  return scan;
}

std::uint32_t indent_width(std::string_view text) {
  std::uint32_t width = 0;
  for (char ch : text) {
    if (ch == ' ') {
      ++width;
    } else if (ch == '\t') {
      width = (width / 8 + 1) * 8;
    } else {
      break;
    }
  }
  return width;
}

Scan scan_indentation(const std::vector<std::string_view>& lines,
                      const SourceSyntax& syntax) {
  Scan scan;
  const auto n = static_cast<std::uint32_t>(lines.size());
  scan.lines.executable.assign(n + 1, false);

  struct Open {
    std::uint32_t start;
    std::uint32_t indent;
  };
  std::vector<Open> open;
  std::uint32_t prev_line = 0;
  std::uint32_t prev_indent = 0;

  for (std::uint32_t ln = 1; ln <= n; ++ln) {
    std::string_view text = lines[ln - 1];
    std::string_view body = ltrim(text);
    if (body.empty() || starts_with_any(body, syntax.comment_prefixes)) continue;
    scan.lines.executable[ln] =
        std::any_of(body.begin(), body.end(), [](char ch) {
          return is_word_char(ch) || ch == '"' || ch == '\'';
        });

    std::uint32_t indent = indent_width(text);
    if (prev_line != 0 && indent > prev_indent) {
      open.push_back({prev_line, prev_indent});
    } else {
      while (!open.empty() && indent <= open.back().indent) {
        scan.blocks.push_back({open.back().start, prev_line, false});
        open.pop_back();
      }
    }
    prev_line = ln;
    prev_indent = indent;
  }
  while (!open.empty()) {
    scan.blocks.push_back({open.back().start, prev_line, false});
    open.pop_back();
  }
  return scan;
}

/// `} else {` style lines close one block and open the next on the same
/// line. The closing block keeps the line; later blocks start below it.
void separate_shared_lines(std::vector<RawBlock>& blocks) {
  std::vector<std::uint32_t> closers;  // end lines of multi-line blocks
  for (const auto& b : blocks) {
    if (b.start < b.end) closers.push_back(b.end);
  }
  std::sort(closers.begin(), closers.end());
  std::vector<bool> trim(blocks.size(), false);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (!std::binary_search(closers.begin(), closers.end(), b.start)) continue;
    for (const auto& other : blocks) {
      if (other.end == b.start && other.start < b.start && other.end < b.end) {
        trim[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (trim[i]) ++blocks[i].start;
  }
  std::erase_if(blocks, [](const RawBlock& b) { return b.start > b.end; });
}

struct BuildNode {
  SpanNode node;
  bool end_is_delimiter = false;
  std::vector<BuildNode> blocks;
};

void add_leaves(BuildNode& build, const SourceLines& lines) {
  for (auto& child : build.blocks) add_leaves(child, lines);

  SpanNode& node = build.node;
  std::vector<SpanNode> children;
  std::size_t next_block = 0;
  for (std::uint32_t ln = node.start; ln <= node.end; ++ln) {
    if (next_block < build.blocks.size() &&
        build.blocks[next_block].node.start == ln) {
      ln = build.blocks[next_block].node.end;
      children.push_back(std::move(build.blocks[next_block].node));
      ++next_block;
      continue;
    }
    if (node.kind == SpanNode::Kind::Block) {
      if (ln == node.start) continue;
      if (ln == node.end && build.end_is_delimiter) continue;
    }
    if (!lines.executable[ln]) continue;
    if (node.start == ln && node.end == ln) continue;
    SpanNode leaf;
    leaf.file = node.file;
    leaf.start = leaf.end = ln;
    leaf.kind = SpanNode::Kind::Statement;
    children.push_back(std::move(leaf));
  }
  node.children = std::move(children);
}

}  // namespace

SourceSyntax syntax_for_path(std::string_view path,
                             std::vector<std::string> comment_prefixes) {
  SourceSyntax syntax;
  syntax.comment_prefixes = std::move(comment_prefixes);
  if (path.ends_with(".py") || path.ends_with(".pyw")) {
    syntax.style = BlockStyle::Indentation;
  }
  return syntax;
}

SpanTree build_span_tree(std::string_view source, const SourceSyntax& syntax,
                         std::string file, bool strict) {
  auto lines = split_lines(source);
  Scan scan = syntax.style == BlockStyle::Braces
                  ? scan_braces(lines, syntax, strict)
                  : scan_indentation(lines, syntax);
  scan.lines.count = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(lines.size()));
  scan.lines.executable.resize(scan.lines.count + 1, false);

  auto& blocks = scan.blocks;
  separate_shared_lines(blocks);
  std::sort(blocks.begin(), blocks.end(), [](const RawBlock& a, const RawBlock& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end > b.end;
  });
  blocks.erase(std::unique(blocks.begin(), blocks.end(),
                           [](const RawBlock& a, const RawBlock& b) {
                             return a.start == b.start && a.end == b.end;
                           }),
               blocks.end());

  BuildNode root;
  root.node.file = file;
  root.node.start = 1;
  root.node.end = scan.lines.count;
  root.node.kind = SpanNode::Kind::Root;

  // Nest by containment; stack holds the chain of currently open nodes.
  std::vector<BuildNode*> stack{&root};
  for (const auto& b : blocks) {
    while (stack.size() > 1 && stack.back()->node.end < b.start) stack.pop_back();
    BuildNode* parent = stack.back();
    if (b.end > parent->node.end) continue;  // partial overlap left after separation
    if (b.start == parent->node.start && b.end == parent->node.end) continue;
    BuildNode child;
    child.node.file = file;
    child.node.start = b.start;
    child.node.end = b.end;
    child.node.kind = SpanNode::Kind::Block;
    child.end_is_delimiter = b.end_is_delimiter;
    parent->blocks.push_back(std::move(child));
    stack.push_back(&parent->blocks.back());
  }

  add_leaves(root, scan.lines);
  return {std::move(root.node), std::move(scan.lines)};
}

namespace {

template <typename Node>
Node& map_line_impl(Node& root, std::uint32_t line) {
  if (line < root.start || line > root.end) {
    throw Error(ErrorCode::LineOutsideFile, kModule,
                "line " + std::to_string(line) + " outside " +
                    std::to_string(root.start) + ".." + std::to_string(root.end));
  }
  Node* exact = nullptr;
  std::size_t exact_depth = 0;
  Node* best = nullptr;
  std::size_t best_depth = 0;

  std::function<void(Node&, std::size_t)> visit = [&](Node& node, std::size_t depth) {
    if (!node.contains(line)) return;
    if (node.start == line && node.end == line &&
        (!exact || depth < exact_depth)) {
      exact = &node;
      exact_depth = depth;
    }
    if (!best || node.amplitude() < best->amplitude() ||
        (node.amplitude() == best->amplitude() && depth > best_depth)) {
      best = &node;
      best_depth = depth;
    }
    for (auto& child : node.children) visit(child, depth + 1);
  };
  visit(root, 0);
  return exact ? *exact : *best;
}

}  // namespace

const SpanNode& map_line_to_node(const SpanNode& root, std::uint32_t line) {
  return map_line_impl(root, line);
}

SpanNode& map_line_to_node(SpanNode& root, std::uint32_t line) {
  return map_line_impl(root, line);
}

std::vector<std::string> annotate(std::map<std::string, SpanNode>& trees,
                                  std::span<const SuspiciousLocation> results) {
  std::vector<std::string> warnings;
  for (const auto& r : results) {
    auto it = trees.find(r.location.file);
    if (it == trees.end()) {
      warnings.push_back("no span tree for " + r.location.file + ", line " +
                         std::to_string(r.location.line) + " skipped");
      continue;
    }
    if (!it->second.contains(r.location.line)) {
      warnings.push_back(r.location.file + ":" + std::to_string(r.location.line) +
                         " is outside the file, skipped");
      continue;
    }
    SpanNode& node = map_line_to_node(it->second, r.location.line);
    node.contributing_lines.emplace_back(r.location.line, r.score);
    node.score = node.score ? std::max(*node.score, r.score) : r.score;
  }
  return warnings;
}

}  // namespace specfault
