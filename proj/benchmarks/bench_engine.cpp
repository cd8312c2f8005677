#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "specfault/bridge.hpp"
#include "specfault/ingest.hpp"
#include "specfault/sbfl.hpp"

using namespace specfault;

namespace {

SuiteResult random_suite(int tests, int lines, unsigned seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution covers(0.3), fails(0.1);
  SuiteResult suite;
  for (int t = 0; t < tests; ++t) {
    TestIdentifier id("suite::t" + std::to_string(t));
    LocationSet covered;
    for (int l = 1; l <= lines; ++l)
      if (covers(rng)) covered.insert({"src/f" + std::to_string(l % 50) + ".c", static_cast<std::uint32_t>(l)});
    suite.matrix.emplace(id, std::move(covered));
    suite.records.push_back({id, t == 0 || fails(rng) ? Outcome::Failed : Outcome::Passed, 0, {}});
  }
  return suite;
}

void BM_Localize(benchmark::State& state) {
  auto suite = random_suite(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  auto registry = FormulaRegistry::with_builtins();
  for (auto _ : state) {
    benchmark::DoNotOptimize(localize(suite.matrix, suite.records, "ochiai", 0.0, registry));
  }
}
BENCHMARK(BM_Localize)->Args({100, 1000})->Args({1000, 5000})->Unit(benchmark::kMillisecond);

void BM_ParseCanonical(benchmark::State& state) {
  auto suite = random_suite(static_cast<int>(state.range(0)), 2000, 2);
  std::vector<PerTestReport> reports;
  for (const auto& r : suite.records) reports.push_back({r, suite.matrix.at(r.test), std::nullopt});
  std::ostringstream out;
  serialize_canonical(reports, out);
  const std::string text = out.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_canonical(in));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseCanonical)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BuildSpanTree(benchmark::State& state) {
  std::string source;
  for (int f = 0; f < state.range(0); ++f) {
    source += "int fn" + std::to_string(f) + "(int x) {\n";
    source += "  if (x > 0) {\n    x -= 1;\n  } else {\n    x += 1;\n  }\n";
    source += "  // step\n  return x;\n}\n\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(build_span_tree(source, SourceSyntax{}, "b.c"));
}
BENCHMARK(BM_BuildSpanTree)->Arg(100)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
