#include <random>

#include <gtest/gtest.h>

#include "specfault/error.hpp"
#include "specfault/recovery.hpp"
#include "support/fixtures.hpp"

using namespace specfault;
using testing_support::fixture;
using testing_support::read_file;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no specfault::Error thrown";
  return ErrorCode::InvalidArgument;
}

SourceProvider fixture_sources() {
  return [](const std::string& path) -> std::shared_ptr<const std::string> {
    auto p = fixture("sources/" + path);
    if (!std::filesystem::exists(p)) return nullptr;
    return std::make_shared<const std::string>(read_file(p));
  };
}

ExceptionRecord thrown_at(const std::string& file, std::uint32_t line) {
  return {"E", "m", {{file, "f", line}}};
}

}  // namespace

TEST(ParseStackTraceTest, AtStyle) {
  auto rec = parse_stack_trace(
      "DivByZero: denominator is 0\n  at compute (src/f.x:12)\n  at main (src/m.x:3)",
      FrameGrammar::at_style());
  EXPECT_EQ(rec.type_name, "DivByZero");
  EXPECT_EQ(rec.message, "denominator is 0");
  ASSERT_EQ(rec.frames.size(), 2u);
  EXPECT_EQ(rec.frames[0], (StackFrame{"src/f.x", "compute", 12}));
  EXPECT_EQ(rec.frames[1], (StackFrame{"src/m.x", "main", 3}));
}

TEST(ParseStackTraceTest, ColumnsNoiseAndPrefixes) {
  FrameGrammar grammar = FrameGrammar::at_style();
  grammar.set_strip_prefixes({"/work/proj"});
  auto rec = parse_stack_trace(
      "Error: a: b\nsome noise\n    at Object.<anonymous> (/work/proj/lib/x.js:7:15)\n", grammar);
  EXPECT_EQ(rec.message, "a: b");
  ASSERT_EQ(rec.frames.size(), 1u);
  EXPECT_EQ(rec.frames[0].file, "lib/x.js");
  EXPECT_EQ(rec.frames[0].line, 7u);
}

TEST(ParseStackTraceTest, ColonStyleAndCustomPattern) {
  auto rec = parse_stack_trace("ValueError: bad\nsrc/p.py:4: in parse\n",
                               FrameGrammar::from_name_or_pattern("colon"));
  ASSERT_EQ(rec.frames.size(), 1u);
  EXPECT_EQ(rec.frames[0], (StackFrame{"src/p.py", "parse", 4}));

  auto custom = FrameGrammar::from_name_or_pattern(R"(^#\d+ (?<file>\S+) line (?<line>\d+)$)");
  auto rec2 = parse_stack_trace("Oops\n#0 src/q.x line 9", custom);
  EXPECT_EQ(rec2.frames[0].file, "src/q.x");
  EXPECT_EQ(rec2.frames[0].scope, "");
  EXPECT_EQ(rec2.type_name, "Oops");
  EXPECT_EQ(rec2.message, "");
}

TEST(ParseStackTraceTest, Errors) {
  EXPECT_EQ(code_of([] { parse_stack_trace("Boom: no frames here", FrameGrammar::at_style()); }),
            ErrorCode::NoFramesFound);
  EXPECT_EQ(code_of([] { parse_stack_trace("", FrameGrammar::at_style()); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { FrameGrammar("(?<file>x)"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { FrameGrammar("(unclosed"); }), ErrorCode::InvalidArgument);
}

TEST(EnclosingBlockTest, Fixtures) {
  SourceSyntax braces;
  auto nested = read_file(fixture("sources/nested.x"));
  EXPECT_EQ(enclosing_block(nested, 6, braces).span.start, 5u);
  EXPECT_EQ(enclosing_block(nested, 6, braces).span.end, 7u);
  EXPECT_EQ(enclosing_block(nested, 4, braces).span.start, 3u);
  EXPECT_EQ(enclosing_block(nested, 8, braces).span.end, 9u);

  auto one = read_file(fixture("sources/one_block.x"));
  auto whole = enclosing_block(one, 1, braces);
  EXPECT_EQ(whole.span.start, 1u);
  EXPECT_EQ(whole.span.end, 4u);

  auto flat = read_file(fixture("sources/flat.txt"));
  EXPECT_EQ(enclosing_block(flat, 2, braces).span.end, 4u);
  EXPECT_EQ(code_of([&] { enclosing_block(flat, 9, braces); }), ErrorCode::LineOutsideFile);

  auto lookup = enclosing_block("void f() {\n  g();\n", 2, braces);
  EXPECT_FALSE(lookup.balanced);
  EXPECT_EQ(code_of([] { enclosing_block("void f() {\n", 1, SourceSyntax{}, true); }),
            ErrorCode::UnbalancedDelimiters);
}

TEST(RecoverTest, MidBlockThrow) {
  LocationSet covered{{"mid_block_throw.x", 3}, {"mid_block_throw.x", 4}};
  auto result = recover(thrown_at("mid_block_throw.x", 7), fixture_sources(), covered);
  EXPECT_EQ(result.added, (LocationSet{{"mid_block_throw.x", 5}, {"mid_block_throw.x", 7}}));
  EXPECT_TRUE(result.warnings.empty());

  RecoveryOptions whole;
  whole.whole_block = true;
  auto block = recover(thrown_at("mid_block_throw.x", 7), fixture_sources(), covered, whole);
  EXPECT_TRUE(block.added.contains({"mid_block_throw.x", 8}));
}

TEST(RecoverTest, SkipsNestedBodies) {
  auto result = recover(thrown_at("nested.x", 8), fixture_sources(), {});
  EXPECT_EQ(result.added, (LocationSet{{"nested.x", 3}, {"nested.x", 4}, {"nested.x", 5}, {"nested.x", 8}}));
}

TEST(RecoverTest, AlreadyCoveredAndUnreadable) {
  LocationSet covered{{"one_block.x", 2}, {"one_block.x", 3}};
  auto none = recover(thrown_at("one_block.x", 3), fixture_sources(), covered);
  EXPECT_TRUE(none.added.empty());

  auto missing = recover(thrown_at("gone.x", 3), fixture_sources(), {});
  EXPECT_TRUE(missing.added.empty());
  EXPECT_EQ(missing.warnings.size(), 1u);

  auto past = recover(thrown_at("one_block.x", 30), fixture_sources(), {});
  EXPECT_TRUE(past.added.empty());
  EXPECT_EQ(past.warnings.size(), 1u);
}

// Recovered lines are disjoint from coverage, contain the frame lines, stay
// inside the frame's enclosing block, and recovery is idempotent.
TEST(RecoverTest, Properties) {
  std::mt19937 rng(17);
  const std::vector<std::string> files{"nested.x", "mid_block_throw.x", "if_else.x", "strings.x"};
  auto sources = fixture_sources();
  for (int round = 0; round < 300; ++round) {
    const auto& file = files[std::uniform_int_distribution<std::size_t>(0, files.size() - 1)(rng)];
    auto text = sources(file);
    auto count = static_cast<std::uint32_t>(std::count(text->begin(), text->end(), '\n'));
    std::uint32_t line = std::uniform_int_distribution<std::uint32_t>(1, count)(rng);
    LocationSet covered;
    for (std::uint32_t l = 1; l <= count; ++l)
      if (std::bernoulli_distribution(0.3)(rng)) covered.insert({file, l});

    auto result = recover(thrown_at(file, line), sources, covered);
    for (const auto& loc : result.added) EXPECT_FALSE(covered.contains(loc));
    LocationSet all = covered;
    all.insert(result.added.begin(), result.added.end());
    EXPECT_TRUE(all.contains({file, line}));

    auto block = enclosing_block(*text, line, SourceSyntax{}).span;
    for (const auto& loc : result.added) {
      EXPECT_GE(loc.line, block.start);
      EXPECT_LE(loc.line, line);
    }
    EXPECT_TRUE(recover(thrown_at(file, line), sources, all).added.empty());
  }
}
