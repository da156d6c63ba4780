#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reserve_lasso/pipeline.hpp"

namespace reserve_lasso {

// Writes every table of the run into `dir` (created if needed) and returns the
// file names written, manifest.json last.
std::vector<std::string> write_outputs(const AnalysisResult& analysis, const std::filesystem::path& dir);

// manifest.json content. Timings live under "timings"; everything else is a
// pure function of the config and the build.
std::string manifest_json(const AnalysisResult& analysis);

// simulate stage: triangle.csv, spec.json, true_means.csv.
std::vector<std::string> write_simulation(const SimulationSpec& spec, const SimulatedTriangle& sim,
                                          const std::filesystem::path& dir);

// Aligned text rendering of the summary tables found in `dir`.
void print_report(std::ostream& out, const std::filesystem::path& dir);

std::string software_version();

}  // namespace reserve_lasso
