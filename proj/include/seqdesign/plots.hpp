#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "seqdesign/csv.hpp"

namespace seqdesign {

// Parses the "key=value,key=value" provenance comment of a result table.
std::map<std::string, std::string> table_provenance(const CsvTable& table);

// Static SVG for a result table, chosen by its provenance "kind":
//   prd_curve                               precision over recall, one path per curve
//   refsize_sweep, inpaint_sweep, order_study  MAPE columns against the first column
//   noise_designs, refsets_designs          histograms of the first two parameters
// Returns an empty string for kinds without a figure.
std::string render_svg(const CsvTable& table);

// Renders each CSV next to `out_dir` as <stem>.svg; returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& csv_files,
                                              const std::filesystem::path& out_dir);

}  // namespace seqdesign
