#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "specfault/model.hpp"

namespace specfault {

/// Suspiciousness formula over one line's spectrum.
using Formula = std::function<double(const SpectrumCounts&)>;

/// ef / sqrt((ef + nf) * (ef + ep)); 0 when ef = 0 or the denominator is 0.
double ochiai(const SpectrumCounts& c) noexcept;

/// (ef/F) / (ef/F + ep/P) with F = ef + nf and P = ep + np; 0 when F = 0 or
/// ef = 0, 1 when ep = 0.
double tarantula(const SpectrumCounts& c) noexcept;

/// Name → formula table. Populate before localizing; read-only afterwards.
class FormulaRegistry {
 public:
  /// Registry holding "ochiai" and "tarantula".
  static FormulaRegistry with_builtins();

  /// Returns the registered name. Throws DuplicateFormulaName, or
  /// InvalidArgument for names that are not lowercase tokens.
  std::string register_formula(std::string name, Formula fn);

  /// Throws UnknownFormula.
  const Formula& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> list_formulas() const;

 private:
  std::map<std::string, Formula> formulas_;
};

/// Scores every covered line, keeps those with score > `threshold` and
/// ranks them by score descending, then file ascending, then line ascending.
///
/// Throws NoFailingTests when no record is failing and UnknownFormula when
/// `formula` is not registered.
std::vector<SuspiciousLocation> localize(const CoverageMatrix& matrix,
                                         std::span<const TestRecord> records,
                                         const std::string& formula,
                                         double threshold,
                                         const FormulaRegistry& registry);

/// Same ranking applied to a precomputed spectrum.
std::vector<SuspiciousLocation> rank_spectrum(const Spectrum& spectrum,
                                              const Formula& formula,
                                              double threshold);

/// The ranking order used by `localize`.
bool ranks_before(const SuspiciousLocation& a,
                  const SuspiciousLocation& b) noexcept;

}  // namespace specfault
