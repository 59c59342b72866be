#pragma once

// Result tables as CSV (RFC 4180, '.' decimals) or markdown. Rendering is a
// pure function of its inputs; runtimes are part of the input.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "branchpde/analysis.hpp"
#include "branchpde/config.hpp"
#include "branchpde/estimator.hpp"

namespace branchpde {

struct ReportRow {
  /// Domain half-width, for tables that vary r.
  std::optional<double> r;
  std::vector<double> x;
  EstimatorResult result;
  /// Exact value at x, when the problem names one.
  std::optional<double> exact;

  /// |estimate - exact| / |exact|; NaN when unknown or exact is 0.
  [[nodiscard]] double rel_error() const noexcept;
};

struct ReportTable {
  std::string title;
  std::vector<ReportRow> rows;
};

/// Columns: [r,] x, estimate, ci_lo, ci_hi, std_over_mean, [rel_error,] runtime_s, n, seed, version.
/// r appears when any row sets it, rel_error when every row has an exact value.
/// Multi-dimensional x is written as space-separated coordinates.
std::string render_csv(const ReportTable& table);
std::string render_markdown(const ReportTable& table);
std::string render(const ReportTable& table, ReportFormat format);

/// Threshold analysis as key/value pairs; `radius` is the admissible radius when searched.
std::string render_threshold(const analysis::ThresholdReport& report, std::optional<double> radius,
                             ReportFormat format);

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view text);
/// Splits CSV text into records of unquoted fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Writes text to path (creating parent directories); throws std::runtime_error on failure.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace branchpde
