#include <gtest/gtest.h>

#include "specfault/error.hpp"
#include "specfault/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace specfault;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

LocalizerConfig online(const std::string& project, const TempDir& work) {
  LocalizerConfig config;
  config.project_path = fixture(project);
  config.adapter_file = fixture(project + "/adapter.json");
  config.work_dir = work.path();
  config.test_timeout_ms = 20000;
  return config;
}

const SuspiciousLocation* find(const LocalizationReport& report, const Location& loc) {
  for (const auto& s : report.ranked)
    if (s.location == loc) return &s;
  return nullptr;
}

}  // namespace

TEST(LocalizerTest, OfflineTwoTests) {
  LocalizerConfig config;
  config.project_path = fixture("offline_two_tests");
  config.coverage_dir = fixture("offline_two_tests");
  auto report = Localizer{}.run(config);
  ASSERT_EQ(report.ranked.size(), 1u);
  EXPECT_EQ(report.ranked[0].location, (Location{"src/a.x", 5}));
  EXPECT_EQ(report.totals, (RunTotals{2, 1, 1, 0, 0}));
  EXPECT_EQ(report.tool_version, "0.1.0");
  ASSERT_EQ(report.spans.size(), 1u);
  EXPECT_EQ(report.spans[0].file, "src/a.x");
}

TEST(LocalizerTest, ConfigErrors) {
  auto code = [](const LocalizerConfig& c) {
    try {
      validate(c, FormulaRegistry::with_builtins());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  LocalizerConfig config;
  config.project_path = fixture("offline_two_tests");
  EXPECT_EQ(code(config), ErrorCode::ConfigError);
  config.coverage_dir = fixture("offline_two_tests");
  config.adapter_file = fixture("toy_calc/adapter.json");
  EXPECT_EQ(code(config), ErrorCode::ConfigError);
  config.adapter_file.reset();
  config.jobs = 0;
  EXPECT_EQ(code(config), ErrorCode::ConfigError);
  config.jobs = 1;
  config.formula = "nope";
  EXPECT_EQ(code(config), ErrorCode::UnknownFormula);
}

TEST(LocalizerTest, OfflineLcovWithOutcomes) {
  LocalizerConfig config;
  config.project_path = fixture("lcov_basic");
  config.coverage_dir = fixture("lcov_basic");
  auto report = Localizer{}.run(config);
  ASSERT_FALSE(report.ranked.empty());
  EXPECT_EQ(report.ranked[0].location, (Location{"src/a.x", 5}));
}

TEST(PathSelectedTest, Globs) {
  EXPECT_TRUE(path_selected("src/a.x", {}, {}));
  EXPECT_TRUE(path_selected("src/a.x", {"src/*"}, {}));
  EXPECT_FALSE(path_selected("src/deep/a.x", {"src/*"}, {}));
  EXPECT_TRUE(path_selected("src/deep/a.x", {"src/**"}, {}));
  EXPECT_TRUE(path_selected("src/deep/a.x", {"**/*.x"}, {}));
  EXPECT_FALSE(path_selected("src/gen/a.x", {}, {"src/gen/**"}));
  EXPECT_FALSE(path_selected("src/a.y", {"*.x", "src/*.x"}, {}));
}

TEST(LocalizerTest, SeededBugRankedFirst) {
  TempDir work;
  auto report = Localizer{}.run(online("toy_calc", work));
  ASSERT_FALSE(report.ranked.empty());
  EXPECT_EQ(report.ranked[0].location, (Location{"src/calc.py", 23}));
  EXPECT_EQ(report.ranked[0].counts, (SpectrumCounts{2, 1, 0, 7}));
  EXPECT_NEAR(report.ranked[0].score, 0.816496580927726, 1e-12);
  EXPECT_EQ(report.totals, (RunTotals{10, 8, 2, 0, 0}));
}

TEST(LocalizerTest, ExceptionRecoveryRestoresFaultyLine) {
  TempDir work;
  auto config = online("toy_parse", work);
  auto with = Localizer{}.run(config);
  const auto* line6 = find(with, {"src/config.py", 6});
  ASSERT_NE(line6, nullptr);
  EXPECT_NEAR(line6->score, 0.5773502691896258, 1e-12);
  EXPECT_EQ(line6->counts, (SpectrumCounts{1, 2, 0, 1}));
  EXPECT_EQ(with.recovered_line_count, 3u);

  config.recover_exceptions = false;
  auto without = Localizer{}.run(config);
  EXPECT_EQ(find(without, {"src/config.py", 6}), nullptr);
  EXPECT_EQ(without.recovered_line_count, 0u);
}

TEST(LocalizerTest, IncludeExcludeFilter) {
  LocalizerConfig config;
  config.project_path = fixture("lcov_basic");
  config.coverage_dir = fixture("lcov_basic");
  config.exclude_globs = {"src/a.*"};
  auto report = Localizer{}.run(config);
  for (const auto& s : report.ranked) EXPECT_NE(s.location.file, "src/a.x");
}
