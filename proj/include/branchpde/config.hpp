#pragma once

// Run configuration files (TOML). Sections:
//   [problem]        beta, exact (optional registry reference)
//   [domain]         r + dim (centred cube) or sides = [[lo, hi], ...]
//   [[nonlinearity]] l = [...], c = number or registry reference, p
//   [boundary]       h
//   [gradient]       b = [...]  (one-dimensional marks)
//   [budget]         max_particles, max_generations
//   [run]            x, n, seed, threads, block_size
//   [analysis]       q, delta_method, mc_samples, radius_range, tol
//   [output]         path, format
// Unknown sections and keys are rejected with their line number.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "branchpde/analysis.hpp"
#include "branchpde/problem.hpp"

namespace branchpde {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainConfig {
  /// Centred cube (-r, r)^dim when set; otherwise `sides`.
  std::optional<double> r;
  std::size_t dim = 1;
  std::vector<std::pair<double, double>> sides;
  bool operator==(const DomainConfig&) const = default;
};

struct TermConfig {
  MultiIndex l;
  std::string c;
  double p = 0.0;
  bool operator==(const TermConfig&) const = default;
};

struct ProblemConfig {
  double beta = 1.0;
  DomainConfig domain;
  std::vector<TermConfig> terms;
  std::vector<std::string> b;
  std::string h;
  std::optional<std::string> exact;
  std::uint64_t max_particles = ParticleBudget{}.max_particles;
  std::uint64_t max_generations = ParticleBudget{}.max_generations;
  bool operator==(const ProblemConfig&) const = default;
};

struct RunSettings {
  std::vector<std::vector<double>> x;
  std::uint64_t n = 100000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::uint64_t block_size = 4096;
  bool operator==(const RunSettings&) const = default;
};

struct AnalysisSettings {
  int q = 1;
  analysis::DeltaMethod delta_method = analysis::DeltaMethod::automatic;
  std::uint64_t mc_samples = 1'000'000;
  /// Search range for the admissible radius (centred cubes only).
  std::optional<std::pair<double, double>> radius_range;
  double tol = 1e-5;
  bool operator==(const AnalysisSettings&) const = default;
};

enum class ReportFormat { csv, markdown };

struct OutputSettings {
  std::string path;
  std::optional<ReportFormat> format;
  bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
  ProblemConfig problem;
  RunSettings run;
  AnalysisSettings analysis;
  OutputSettings output;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates (registry names, problem invariants, evaluation points).
RunConfig parse_config(std::string_view text, std::string_view source_name = "config");
RunConfig load_config(const std::filesystem::path& path);
/// TOML text that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Builds the problem; `r_override` replaces the half-width of a centred-cube domain.
ProblemSpec build_problem(const ProblemConfig& config, std::optional<double> r_override = std::nullopt);

std::optional<ReportFormat> parse_format(std::string_view name);
std::string_view to_string(ReportFormat format) noexcept;

}  // namespace branchpde
