#include "specfault/sbfl.hpp"

#include <algorithm>
#include <cmath>

#include "specfault/error.hpp"

namespace specfault {

namespace {
constexpr const char* kModule = "sbfl-engine";

bool is_token(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' ||
           ch == '-';
  });
}
}  // namespace

double ochiai(const SpectrumCounts& c) noexcept {
  if (c.ef == 0) return 0.0;
  double denom = std::sqrt(static_cast<double>(c.ef + c.nf) *
                           static_cast<double>(c.ef + c.ep));
  if (denom == 0.0) return 0.0;
  return std::min(1.0, c.ef / denom);
}

double tarantula(const SpectrumCounts& c) noexcept {
  std::uint32_t failing = c.ef + c.nf;
  std::uint32_t passing = c.ep + c.np;
  if (failing == 0 || c.ef == 0) return 0.0;
  if (c.ep == 0) return 1.0;
  double fail_ratio = static_cast<double>(c.ef) / failing;
  double pass_ratio = static_cast<double>(c.ep) / passing;
  return fail_ratio / (fail_ratio + pass_ratio);
}

FormulaRegistry FormulaRegistry::with_builtins() {
  FormulaRegistry registry;
  registry.register_formula("ochiai", ochiai);
  registry.register_formula("tarantula", tarantula);
  return registry;
}

std::string FormulaRegistry::register_formula(std::string name, Formula fn) {
  if (!is_token(name)) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "formula names are lowercase tokens: \"" + name + "\"");
  }
  if (!fn) {
    throw Error(ErrorCode::InvalidArgument, kModule, "empty formula: " + name);
  }
  auto [it, fresh] = formulas_.emplace(name, std::move(fn));
  if (!fresh) throw Error(ErrorCode::DuplicateFormulaName, kModule, name);
  return it->first;
}

const Formula& FormulaRegistry::get(const std::string& name) const {
  auto it = formulas_.find(name);
  if (it == formulas_.end()) throw Error(ErrorCode::UnknownFormula, kModule, name);
  return it->second;
}

bool FormulaRegistry::contains(const std::string& name) const {
  return formulas_.contains(name);
}

std::vector<std::string> FormulaRegistry::list_formulas() const {
  std::vector<std::string> names;
  for (const auto& [name, fn] : formulas_) names.push_back(name);
  return names;
}

bool ranks_before(const SuspiciousLocation& a,
                  const SuspiciousLocation& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.location < b.location;
}

std::vector<SuspiciousLocation> rank_spectrum(const Spectrum& spectrum,
                                              const Formula& formula,
                                              double threshold) {
  std::vector<SuspiciousLocation> ranked;
  for (const auto& [loc, counts] : spectrum) {
    double score = formula(counts);
    if (score > threshold) ranked.push_back({loc, score, counts});
  }
  std::stable_sort(ranked.begin(), ranked.end(), ranks_before);
  return ranked;
}

std::vector<SuspiciousLocation> localize(const CoverageMatrix& matrix,
                                         std::span<const TestRecord> records,
                                         const std::string& formula,
                                         double threshold,
                                         const FormulaRegistry& registry) {
  const Formula& fn = registry.get(formula);
  bool any_failing = std::any_of(records.begin(), records.end(),
                                 [](const TestRecord& r) {
                                   return is_failing(r.outcome);
                                 });
  if (!any_failing) {
    throw Error(ErrorCode::NoFailingTests, kModule,
                "every test passed; the spectrum carries no signal");
  }
  return rank_spectrum(compute_spectrum(matrix, records), fn, threshold);
}

}  // namespace specfault
