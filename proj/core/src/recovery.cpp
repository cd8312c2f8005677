#include "specfault/recovery.hpp"

#include <fstream>
#include <limits>
#include <tuple>
#include <sstream>

#include <boost/regex.hpp>

#include "specfault/error.hpp"
#include "specfault/ingest.hpp"

namespace specfault {

namespace {

constexpr const char* kModule = "exception-recovery";

constexpr const char* kAtPattern =
    R"(^\s*at\s+(?<scope>[^()]*?)\s*\((?<file>[^()]+?):(?<line>\d+)(?::\d+)?\)\s*$)";
constexpr const char* kColonPattern =
    R"(^\s*(?<file>[^\s:]+):(?<line>\d+):\s+in\s+(?<scope>.*?)\s*$)";

bool has_group(const std::string& pattern, const std::string& name) {
  return pattern.find("(?<" + name + ">") != std::string::npos ||
         pattern.find("(?P<" + name + ">") != std::string::npos ||
         pattern.find("(?'" + name + "'") != std::string::npos;
}

const SpanNode& innermost_block(const SpanNode& node, std::uint32_t line) {
  for (const auto& child : node.children) {
    if (child.kind == SpanNode::Kind::Block && child.contains(line)) {
      return innermost_block(child, line);
    }
  }
  return node;
}

void mark_nested_bodies(const SpanNode& node, std::vector<bool>& in_body) {
  for (const auto& child : node.children) {
    if (child.kind != SpanNode::Kind::Block) continue;
    for (std::uint32_t l = child.start + 1; l <= child.end; ++l) in_body[l] = true;
  }
}

}  // namespace

struct FrameGrammar::Compiled {
  boost::regex re;
  bool has_scope = false;
};

FrameGrammar::FrameGrammar(std::string pattern,
                           std::vector<std::string> strip_prefixes)
    : pattern_(std::move(pattern)), strip_prefixes_(std::move(strip_prefixes)) {
  if (!has_group(pattern_, "file") || !has_group(pattern_, "line")) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "frame grammar needs named captures 'file' and 'line': " + pattern_);
  }
  auto compiled = std::make_shared<Compiled>();
  try {
    compiled->re = boost::regex(pattern_, boost::regex::perl);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "frame grammar does not compile: " + std::string(e.what()));
  }
  compiled->has_scope = has_group(pattern_, "scope");
  compiled_ = std::move(compiled);
}

FrameGrammar FrameGrammar::at_style() { return FrameGrammar(kAtPattern); }

FrameGrammar FrameGrammar::colon_style() { return FrameGrammar(kColonPattern); }

FrameGrammar FrameGrammar::from_name_or_pattern(const std::string& spec) {
  if (spec.empty() || spec == "at") return at_style();
  if (spec == "colon") return colon_style();
  return FrameGrammar(spec);
}

std::optional<StackFrame> FrameGrammar::match(std::string_view line) const {
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_match(line.begin(), line.end(), m, compiled_->re)) {
    return std::nullopt;
  }
  StackFrame frame;
  std::string line_text = m["line"].str();
  try {
    unsigned long value = std::stoul(line_text);
    if (value == 0 || value > std::numeric_limits<std::uint32_t>::max()) {
      return std::nullopt;
    }
    frame.line = static_cast<std::uint32_t>(value);
    frame.file = normalize_path(m["file"].str(), strip_prefixes_);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (compiled_->has_scope && m["scope"].matched) frame.scope = m["scope"].str();
  return frame;
}

ExceptionRecord parse_stack_trace(std::string_view text,
                                  const FrameGrammar& grammar) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, kModule, "empty stack trace");
  }
  ExceptionRecord record;
  std::tie(record.type_name, record.message) = split_trace_header(text);

  std::size_t pos = text.find('\n');
  while (pos != std::string_view::npos && pos < text.size()) {
    std::size_t begin = pos + 1;
    std::size_t end = text.find('\n', begin);
    std::string_view line = text.substr(
        begin, end == std::string_view::npos ? std::string_view::npos : end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto frame = grammar.match(line)) record.frames.push_back(std::move(*frame));
    pos = end;
  }
  if (record.frames.empty()) {
    throw Error(ErrorCode::NoFramesFound, kModule,
                "no line matches the frame grammar after \"" + record.type_name + "\"");
  }
  return record;
}

BlockLookup enclosing_block(std::string_view source, std::uint32_t line,
                            const SourceSyntax& syntax, bool strict) {
  SpanTree tree = build_span_tree(source, syntax, {}, strict);
  if (line < 1 || line > tree.lines.count) {
    throw Error(ErrorCode::LineOutsideFile, kModule,
                "line " + std::to_string(line) + " of " +
                    std::to_string(tree.lines.count));
  }
  const SpanNode& block = innermost_block(tree.root, line);
  return {{{}, block.start, block.end}, tree.lines.balanced};
}

SourceCache::SourceCache(std::filesystem::path root) : root_(std::move(root)) {}

std::shared_ptr<const std::string> SourceCache::get(const std::string& path) const {
  std::lock_guard lock(mutex_);
  if (auto it = files_.find(path); it != files_.end()) return it->second;
  std::shared_ptr<const std::string> content;
  std::ifstream in(root_ / path, std::ios::binary);
  if (in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    content = std::make_shared<const std::string>(buf.str());
  }
  files_.emplace(path, content);
  return content;
}

SourceProvider SourceCache::provider() const {
  return [this](const std::string& path) { return get(path); };
}

RecoveryResult recover(const ExceptionRecord& exception,
                       const SourceProvider& sources,
                       const LocationSet& covered,
                       const RecoveryOptions& options) {
  RecoveryResult result;
  std::map<std::string, std::optional<SpanTree>> trees;

  for (const auto& frame : exception.frames) {
    auto [it, fresh] = trees.try_emplace(frame.file);
    if (fresh) {
      auto text = sources ? sources(frame.file) : nullptr;
      if (!text) {
        result.warnings.push_back("source not readable: " + frame.file);
      } else {
        it->second = build_span_tree(
            *text, syntax_for_path(frame.file, options.comment_prefixes), frame.file);
        if (!it->second->lines.balanced) {
          result.warnings.push_back("unbalanced delimiters in " + frame.file +
                                    ", block spans are best-effort");
        }
      }
    }
    if (!it->second) continue;
    const SpanTree& tree = *it->second;
    if (frame.line > tree.lines.count) {
      result.warnings.push_back(frame.file + ":" + std::to_string(frame.line) +
                                " is past the end of the file");
      continue;
    }

    const SpanNode& block = innermost_block(tree.root, frame.line);
    std::vector<bool> in_body(tree.lines.count + 2, false);
    // Bodies of blocks nested anywhere below `block`.
    std::function<void(const SpanNode&)> walk = [&](const SpanNode& node) {
      mark_nested_bodies(node, in_body);
      for (const auto& child : node.children) walk(child);
    };
    walk(block);

    auto add = [&](std::uint32_t line) {
      Location loc{frame.file, line};
      if (!covered.contains(loc)) result.added.insert(std::move(loc));
    };
    add(frame.line);
    std::uint32_t bound = options.whole_block ? block.end : frame.line;
    for (std::uint32_t l = block.start; l <= bound; ++l) {
      if (tree.lines.executable[l] && !in_body[l]) add(l);
    }
  }
  return result;
}

}  // namespace specfault
