#pragma once

#include <map>
#include <string>

namespace metastab::cli {

/// SVG line charts for a sweep CSV (`figure,m,n,error_mean,error_se`).
/// Returns file name -> document, two charts per figure: error vs n with one
/// line per m, and error vs m with one line per n. Pure in the CSV text.
std::map<std::string, std::string> sweep_charts(const std::string& csv);

}  // namespace metastab::cli
