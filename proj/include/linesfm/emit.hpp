#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "linesfm/config.hpp"
#include "linesfm/sim.hpp"

namespace linesfm {

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_double(double value);

/// Time-series columns:
///   t,
///   per line i: line{i}_h_{x,y,z}, line{i}_hhat_{x,y,z}, line{i}_chi_{a,b},
///     line{i}_chihat_{a,b}, line{i}_err_h_{x,y,z}, line{i}_err_chi_{x,y,z},
///   nu_{x,y,z}, om_{x,y,z},
///   per line i: line{i}_sigma1_sq, line{i}_sigma2_sq.
/// chi_a, chi_b are the free components left after eliminating the line's
/// axis (ascending coordinate order); err_chi is the full 3-vector error.
std::vector<std::string> timeseries_columns(std::size_t n_lines);

void write_timeseries_csv(const RunRecord& record, std::ostream& out);

nlohmann::json summary_json(const RunRecord& record, const RunConfig& config);

nlohmann::json montecarlo_json(const MonteCarloSummary& summary, const RunConfig& config);

/// Writes timeseries.csv and summary.json into `dir`, plus plots/*.csv
/// (state, error, velocity, eigenvalues) when config.plots is set. Throws
/// Error(Io) when the directory or a file cannot be written.
void emit(const RunRecord& record, const RunConfig& config, const std::filesystem::path& dir);

void emit_montecarlo(const MonteCarloSummary& summary, const RunConfig& config,
                     const std::filesystem::path& dir);

}  // namespace linesfm
