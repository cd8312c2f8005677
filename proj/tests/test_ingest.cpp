#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "specfault/error.hpp"
#include "specfault/ingest.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace specfault;
using testing_support::fixture;

namespace {

std::vector<PerTestReport> canonical(const std::string& text, const IngestOptions& opts = {}) {
  std::istringstream in(text);
  return parse_canonical(in, opts);
}

std::vector<PerTestReport> lcov(const std::string& text, const OutcomeMap& outcomes) {
  std::istringstream in(text);
  return parse_lcov(in, outcomes);
}

template <typename Fn>
Error error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no specfault::Error thrown";
  return Error(ErrorCode::InvalidArgument, "test", "none");
}

}  // namespace

TEST(ParseCanonicalTest, SchemaExample) {
  auto reports = canonical(
      R"({"test":"t1","outcome":"FAILED","files":[{"path":"src/a.x","lines":[5,7]}]})");
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].record.test.str(), "t1");
  EXPECT_EQ(reports[0].record.outcome, Outcome::Failed);
  EXPECT_EQ(reports[0].record.wall_time_ms, 0u);
  EXPECT_EQ(reports[0].covered, (LocationSet{{"src/a.x", 5}, {"src/a.x", 7}}));
  EXPECT_FALSE(reports[0].raw_trace.has_value());
}

TEST(ParseCanonicalTest, EmptyStreamAndBlankLines) {
  EXPECT_TRUE(canonical("").empty());
  EXPECT_TRUE(canonical("\n   \n\n").empty());
}

TEST(ParseCanonicalTest, OptionalFieldsAndUnknownKeys) {
  auto reports = canonical(
      R"J({"test":"t","outcome":"CRASHED","wall_time_ms":42,"extra":{"x":1},)J"
      R"J("exception":{"type":"E","message":"m","trace":"E: m\n  at f (./src/a.x:3)"},"files":[]})J");
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].record.wall_time_ms, 42u);
  EXPECT_EQ(reports[0].raw_trace, "E: m\n  at f (./src/a.x:3)");
  EXPECT_FALSE(reports[0].record.exception.has_value());
  EXPECT_TRUE(reports[0].covered.empty());

  auto no_trace = canonical(
      R"({"test":"t","outcome":"FAILED","exception":{"type":"E","message":"m"},"files":[]})");
  EXPECT_EQ(no_trace[0].raw_trace, "E: m");
}

TEST(ParseCanonicalTest, PathsAreNormalized) {
  auto reports = canonical(
      R"({"test":"t","outcome":"PASSED","files":[{"path":"/p/src\\a.x","lines":[1]}]})",
      IngestOptions{{"/p"}});
  EXPECT_EQ(reports[0].covered, (LocationSet{{"src/a.x", 1}}));
}

TEST(ParseCanonicalTest, Errors) {
  auto missing = error_of([] { canonical(R"({"test":"t1","files":[]})"); });
  EXPECT_EQ(missing.code(), ErrorCode::MissingField);
  EXPECT_NE(missing.detail().find("outcome"), std::string::npos);

  EXPECT_EQ(error_of([] { canonical(R"({"outcome":"PASSED","files":[]})"); }).code(),
            ErrorCode::MissingField);
  EXPECT_EQ(error_of([] { canonical(R"({"test":"t","outcome":"PASSED"})"); }).code(),
            ErrorCode::MissingField);

  auto bad = error_of([] { canonical("\n{\"test\":\"t\",\"outcome\":\"PASSED\",\"files\":[]}\n{oops"); });
  EXPECT_EQ(bad.code(), ErrorCode::MalformedLine);
  EXPECT_NE(bad.detail().find("line 3"), std::string::npos);

  EXPECT_EQ(error_of([] { canonical(R"({"test":"t","outcome":"MAYBE","files":[]})"); }).code(),
            ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] {
              canonical(R"({"test":"t","outcome":"PASSED","files":[{"path":"a","lines":[0]}]})");
            }).code(),
            ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] {
              canonical(R"({"test":"t","outcome":"PASSED","files":[{"path":"../a","lines":[1]}]})");
            }).code(),
            ErrorCode::MalformedLine);
}

TEST(SerializeCanonicalTest, RoundTripProperty) {
  std::mt19937 rng(7);
  for (int round = 0; round < 100; ++round) {
    auto reports = testing_support::random_reports(rng);
    std::ostringstream out;
    serialize_canonical(reports, out);
    EXPECT_EQ(canonical(out.str()), reports) << out.str();
  }
}

TEST(SerializeCanonicalTest, ParsedExceptionIsWrittenWithTypeAndMessage) {
  PerTestReport r;
  r.record.test = TestIdentifier("t");
  r.record.outcome = Outcome::Failed;
  r.record.exception = ExceptionRecord{"DivByZero", "denominator is 0", {{"src/f.x", "f", 3}}};
  std::string line = serialize_canonical_line(r);
  EXPECT_NE(line.find(R"("type":"DivByZero")"), std::string::npos);
  auto back = canonical(line);
  EXPECT_EQ(back[0].raw_trace, "DivByZero: denominator is 0\n  at f (src/f.x:3)");
}

TEST(ParseLcovTest, DocumentedExample) {
  auto reports = lcov("TN:tA\nSF:src/a.x\nDA:5,1\nDA:6,0\nend_of_record", {{"tA", Outcome::Passed}});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].record.test.str(), "tA");
  EXPECT_EQ(reports[0].record.outcome, Outcome::Passed);
  EXPECT_EQ(reports[0].covered, (LocationSet{{"src/a.x", 5}}));
}

TEST(ParseLcovTest, Errors) {
  EXPECT_EQ(error_of([] { lcov("SF:src/a.x\nDA:1,1\nend_of_record\n", {}); }).code(),
            ErrorCode::MissingTN);
  EXPECT_EQ(error_of([] { lcov("TN:t\nSF:a\nDA:abc,1\n", {{"t", Outcome::Passed}}); }).code(),
            ErrorCode::MalformedDA);
  EXPECT_EQ(error_of([] { lcov("TN:t\nSF:a\nDA:3\n", {{"t", Outcome::Passed}}); }).code(),
            ErrorCode::MalformedDA);
  EXPECT_EQ(error_of([] { lcov("TN:t\nDA:3,1\n", {{"t", Outcome::Passed}}); }).code(),
            ErrorCode::MalformedDA);
  EXPECT_EQ(error_of([] { lcov("TN:t\nSF:a\nDA:3,1\nend_of_record\n", {}); }).code(),
            ErrorCode::UnknownOutcome);
}

TEST(ParseLcovTest, FixtureFile) {
  std::ifstream in(fixture("lcov_basic/coverage.info"));
  std::ifstream outcomes_in(fixture("lcov_basic/outcomes.json"));
  auto reports = parse_lcov(in, parse_outcome_map(outcomes_in));
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].record.test.str(), "suite::first");
  EXPECT_EQ(reports[0].record.outcome, Outcome::Failed);
  EXPECT_EQ(reports[0].covered, (LocationSet{{"src/a.x", 5}}));
  EXPECT_EQ(reports[1].covered, (LocationSet{{"src/a.x", 5}, {"src/a.x", 6}, {"src/b.x", 1}}));
  EXPECT_EQ(reports[2].covered, (LocationSet{{"src/b.x", 2}}));
}

// Lines with zero hits never surface, whatever the mix.
TEST(ParseLcovTest, PropertyZeroHitLinesDropped) {
  std::mt19937 rng(99);
  for (int round = 0; round < 50; ++round) {
    std::string text = "TN:t\nSF:src/a.x\n";
    std::set<std::uint32_t> hit, zero;
    for (std::uint32_t l = 1; l <= 40; ++l) {
      int hits = std::uniform_int_distribution<int>(0, 3)(rng);
      text += "DA:" + std::to_string(l) + "," + std::to_string(hits) + "\n";
      (hits > 0 ? hit : zero).insert(l);
    }
    text += "end_of_record\n";
    auto reports = lcov(text, {{"t", Outcome::Passed}});
    for (const auto& loc : reports[0].covered) EXPECT_FALSE(zero.contains(loc.line));
    EXPECT_EQ(reports[0].covered.size(), hit.size());
  }
}

TEST(MergeTest, Examples) {
  auto reports = canonical(
      "{\"test\":\"t1\",\"outcome\":\"FAILED\",\"files\":[]}\n"
      "{\"test\":\"t2\",\"outcome\":\"PASSED\",\"files\":[{\"path\":\"a\",\"lines\":[1]}]}\n");
  auto merged = merge(reports);
  EXPECT_EQ(merged.matrix.size(), 2u);
  EXPECT_EQ(merged.records.size(), 2u);

  auto empty = merge({});
  EXPECT_TRUE(empty.matrix.empty());
  EXPECT_TRUE(empty.records.empty());

  std::vector<PerTestReport> dup{reports[0], reports[0]};
  EXPECT_EQ(error_of([&] { merge(dup); }).code(), ErrorCode::DuplicateTest);
}

TEST(MergeTest, PropertyPermutationInvariant) {
  std::mt19937 rng(3);
  for (int round = 0; round < 50; ++round) {
    auto reports = testing_support::random_reports(rng);
    auto base = merge(reports);
    std::shuffle(reports.begin(), reports.end(), rng);
    auto shuffled = merge(reports);
    EXPECT_EQ(shuffled.matrix, base.matrix);
    auto by_name = [](const TestRecord& a, const TestRecord& b) { return a.test < b.test; };
    std::sort(base.records.begin(), base.records.end(), by_name);
    std::sort(shuffled.records.begin(), shuffled.records.end(), by_name);
    EXPECT_EQ(shuffled.records, base.records);
  }
}

TEST(ReadCoverageDirTest, CanonicalAndLcov) {
  auto two = read_coverage_dir(fixture("offline_two_tests"));
  EXPECT_EQ(two.size(), 2u);
  auto lcov_reports = read_coverage_dir(fixture("lcov_basic"));
  EXPECT_EQ(lcov_reports.size(), 3u);
  EXPECT_EQ(error_of([] { read_coverage_dir(fixture("does_not_exist")); }).code(),
            ErrorCode::IoError);
}
