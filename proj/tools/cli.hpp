#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "specfault/pipeline.hpp"
#include "specfault/report.hpp"

namespace specfault::cli {

/// Exit codes: 0 success, 1 usage or configuration error, 2 execution
/// failure. Results go to `out` (or --output), diagnostics to `err`.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Same, with caller-supplied formulas and exporters.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
         const Localizer& localizer, const ExporterRegistry& exporters);

}  // namespace specfault::cli
