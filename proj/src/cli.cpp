#include "branchpde/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "branchpde/analysis.hpp"
#include "branchpde/branching.hpp"
#include "branchpde/config.hpp"
#include "branchpde/estimator.hpp"
#include "branchpde/kernel_suite.hpp"
#include "branchpde/registry.hpp"
#include "branchpde/report.hpp"
#include "branchpde/scenarios.hpp"
#include "branchpde/version.hpp"

namespace branchpde::cli {
namespace {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> samples;
  std::optional<int> q;
  std::string table;
};

struct TableDef {
  std::string name;
  std::string title;
  std::function<ProblemSpec(double)> family;
  std::vector<double> radii;
  std::vector<std::vector<double>> points;
  std::uint64_t n;
};

std::vector<TableDef> tables() {
  using namespace scenarios;
  const auto cubic_tan = [](std::size_t d) { return [d](double r) { return cubic_tan_sum(d, r); }; };
  return {
      {"example1", "u''/2 + (u^3 + u)/2 - u = 0, h = sqrt(2)/cosh, r = 0.3", cubic_sech, {0.3}, {{0.0}, {-0.2}}, 1'000'000},
      {"example1r", "u''/2 + (u^3 + u)/2 - u = 0, h = sqrt(2)/cosh, x = 0", cubic_sech, {0.4, 0.5}, {{0.0}}, 1'000'000},
      {"example09", "u''/2 + (u^3 + u)/2 - u = 0, h = sqrt(2)/cosh, r = 0.9", cubic_sech, {0.9}, {{0.0}, {-0.2}}, 1'000'000},
      {"example2", "u''/2 + 1/2 - 3u^2/2 - u = 0, h = 1 + 2tan^2, r = 0.14", quadratic_tan, {0.14}, {{0.0}, {-0.1}}, 1'000'000},
      {"example2_1", "u''/2 + 1/2 - 3u^2/2 - u = 0, h = 1 + 2tan^2, r = 0.3", quadratic_tan, {0.3}, {{0.0}, {-0.1}}, 1'000'000},
      {"example2D", "Lap(u)/2 - 2(u^3 + u) = 0 in d = 2, h = tan(x1 + x2), r = 0.48", cubic_tan(2), {0.48},
       {{0.0, 0.0}, {0.1, 0.0}, {0.2, 0.1}, {0.2, 0.2}}, 500'000},
      {"example4D", "Lap(u)/2 - 4(u^3 + u) = 0 in d = 4, h = tan(x1 + ... + x4), r = 0.24", cubic_tan(4), {0.24},
       {{0.0, 0.0, 0.0, 0.0}, {0.1, 0.0, 0.0, 0.0}, {0.1, 0.1, 0.0, 0.0}, {0.1, 0.1, 0.1, 0.0}}, 500'000},
  };
}

std::uint64_t parse_seed(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ValidationError(std::string(what) + " must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  return v;
}

/// CLI flag, then config, then BRANCHPDE_SEED, then a fresh random seed.
std::uint64_t resolve_seed(const Flags& f, const std::optional<RunConfig>& cfg) {
  if (f.seed) return *f.seed;
  if (cfg && cfg->run.seed) return *cfg->run.seed;
  if (const char* env = std::getenv("BRANCHPDE_SEED"); env != nullptr && *env != '\0')
    return parse_seed(env, "BRANCHPDE_SEED");
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

ReportFormat resolve_format(const Flags& f, const std::optional<RunConfig>& cfg, const std::string& path) {
  if (!f.format.empty()) {
    auto fmt = parse_format(f.format);
    if (!fmt) throw ValidationError("--format must be csv or md");
    return *fmt;
  }
  if (cfg && cfg->output.format) return *cfg->output.format;
  if (path.ends_with(".md")) return ReportFormat::markdown;
  return ReportFormat::csv;
}

class Session {
 public:
  Session(const Flags& flags, std::ostream& out, std::ostream& err) : f_(flags), out_(out), err_(err) {
    if (!f_.config.empty()) cfg_ = load_config(f_.config);
    if (f_.samples && *f_.samples < 2) throw ValidationError("--samples must be at least 2");
    if (f_.q && (*f_.q < 1 || *f_.q > 16)) throw ValidationError("--q must lie in [1, 16]");
  }

  const RunConfig& config() const {
    if (!cfg_) throw ValidationError("this command needs --config FILE");
    return *cfg_;
  }

  std::uint64_t seed() const { return resolve_seed(f_, cfg_); }

  EstimatorOptions estimator_options() const {
    EstimatorOptions o;
    if (cfg_) {
      o.threads = cfg_->run.threads;
      o.block_size = cfg_->run.block_size;
    }
    if (f_.threads) o.threads = *f_.threads;
    return o;
  }

  std::uint64_t samples(std::uint64_t fallback) const { return f_.samples.value_or(fallback); }

  void emit(const std::string& text_for_csv, const std::string& text_for_md) const {
    const std::string path = !f_.out.empty() ? f_.out : (cfg_ ? cfg_->output.path : std::string());
    const std::string& text = resolve_format(f_, cfg_, path) == ReportFormat::csv ? text_for_csv : text_for_md;
    if (path.empty()) {
      out_ << text;
    } else {
      write_file(path, text);
      err_ << "wrote " << path << "\n";
    }
  }

  void emit(const ReportTable& table) const { emit(render_csv(table), render_markdown(table)); }

  int solve(bool gradient) const {
    const RunConfig& cfg = config();
    const ProblemSpec spec = build_problem(cfg.problem);
    if (cfg.run.x.empty()) throw ValidationError("[run] x lists no evaluation points");
    if (gradient && spec.rect.dim() != 1) throw ValidationError("gradient needs a one-dimensional domain");
    const std::uint64_t seed = this->seed();
    const std::uint64_t n = samples(cfg.run.n);
    ReportTable table;
    table.title = gradient ? "gradient estimates" : "value estimates";
    for (const auto& x : cfg.run.x) {
      ReportRow row;
      row.x = x;
      if (gradient) {
        row.result = estimate_gradient_1d(spec, x[0], n, seed, estimator_options());
        if (spec.exact && spec.exact->d1) row.exact = spec.exact->d1(x[0]);
      } else {
        row.result = estimate_value(spec, x, n, seed, estimator_options());
        if (spec.exact) row.exact = (*spec.exact)(std::span<const double>(x));
      }
      table.rows.push_back(std::move(row));
    }
    emit(table);
    return ok;
  }

  int analyze() const {
    const RunConfig& cfg = config();
    const int q = f_.q.value_or(cfg.analysis.q);
    analysis::DeltaOptions opts;
    opts.method = cfg.analysis.delta_method;
    opts.mc_samples = cfg.analysis.mc_samples;
    opts.seed = seed();
    const auto report = analysis::analyze(build_problem(cfg.problem), q, opts);
    std::optional<double> radius;
    if (cfg.analysis.radius_range) {
      const auto [lo, hi] = *cfg.analysis.radius_range;
      const analysis::Family family = [&](double r) { return build_problem(cfg.problem, r); };
      try {
        radius = analysis::admissible_radius(family, q, lo, hi, cfg.analysis.tol, opts);
      } catch (const analysis::NeverAdmissible& e) {
        err_ << "no admissible radius in the search range: " << e.what() << "\n";
      } catch (const analysis::AlwaysAdmissible& e) {
        err_ << "whole search range is admissible: " << e.what() << "\n";
      }
    }
    emit(render_threshold(report, radius, ReportFormat::csv), render_threshold(report, radius, ReportFormat::markdown));
    return ok;
  }

  int table() const {
    for (const auto& def : tables()) {
      if (def.name != f_.table) continue;
      const std::uint64_t seed = this->seed();
      const std::uint64_t n = samples(def.n);
      ReportTable table;
      table.title = def.name + ": " + def.title;
      std::uint64_t index = 0;
      for (double r : def.radii) {
        const ProblemSpec spec = def.family(r);
        for (const auto& x : def.points) {
          ReportRow row;
          if (def.radii.size() > 1) row.r = r;
          row.x = x;
          row.result = estimate_value(spec, x, n, seed + index++, estimator_options());
          if (spec.exact) row.exact = (*spec.exact)(std::span<const double>(x));
          err_ << def.name << " row " << index << " done in " << row.result.elapsed << " s\n";
          table.rows.push_back(std::move(row));
        }
      }
      emit(table);
      return ok;
    }
    std::string known;
    for (const auto& name : table_names()) known += " " + name;
    throw ValidationError("unknown table '" + f_.table + "'; known:" + known);
  }

  int kernel_test() const {
    KernelSuiteOptions opts;
    if (f_.seed) opts.seed = *f_.seed;
    if (f_.samples) opts.samples = *f_.samples;
    bool all = true;
    std::string csv = "check,passed,statistic,bound\r\n";
    std::string md = "| Check | Result | Statistic | Bound |\n|---|---|---|---|\n";
    for (const auto& c : run_kernel_suite(opts)) {
      all &= c.passed;
      csv += csv_field(c.name) + "," + (c.passed ? "true" : "false") + "," + format_double(c.statistic) + "," +
             format_double(c.bound) + "\r\n";
      md += "| " + c.name + " | " + (c.passed ? "PASS" : "FAIL") + " | " + format_double(c.statistic) + " | " +
            format_double(c.bound) + " |\n";
    }
    emit(csv, md);
    return all ? ok : failure;
  }

 private:
  const Flags& f_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<RunConfig> cfg_;
};

}  // namespace

std::vector<std::string> table_names() {
  std::vector<std::string> names;
  for (const auto& t : tables()) names.push_back(t.name);
  return names;
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Monte Carlo solver for semi-linear elliptic PDEs on rectangles", "branchpde"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto common = [&f](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", f.config, "TOML run configuration");
    if (needs_config) c->required();
    sub->add_option("--seed", f.seed, "64-bit seed (overrides config and BRANCHPDE_SEED)");
    sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    sub->add_option("--out", f.out, "report path (default: standard output)");
    sub->add_option("--format", f.format, "report format")->check(CLI::IsMember({"csv", "md", "markdown"}));
    sub->add_option("--samples", f.samples, "override the number of samples");
  };
  auto* solve = app.add_subcommand("solve", "estimate u at the configured points");
  common(solve, true);
  auto* gradient = app.add_subcommand("gradient", "estimate u' at the configured points (d = 1)");
  common(gradient, true);
  auto* analyze = app.add_subcommand("analyze", "integrability thresholds and admissible radius");
  common(analyze, true);
  analyze->add_option("--q", f.q, "moment order");
  auto* table = app.add_subcommand("table", "reproduce a reference results table");
  common(table, false);
  table->add_option("name", f.table, "table name")->required()->check(CLI::IsMember(table_names()));
  auto* kernel = app.add_subcommand("kernel-test", "statistical self-check of the exit-law kernels");
  common(kernel, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : validation_error;
  }

  try {
    const Session session(f, out, err);
    if (solve->parsed()) return session.solve(false);
    if (gradient->parsed()) return session.solve(true);
    if (analyze->parsed()) return session.analyze();
    if (table->parsed()) return session.table();
    return session.kernel_test();
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return budget_error;
  } catch (const std::invalid_argument& e) {
    // ConfigError, InvalidProblem, UnknownFunction and argument checks.
    err << "error: " << e.what() << "\n";
    return validation_error;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace branchpde::cli
