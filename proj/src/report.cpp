#include "branchpde/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "branchpde/version.hpp"

namespace branchpde {
namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string join_point(const std::vector<double>& x, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) out += sep;
    out += format_double(x[i]);
  }
  return out;
}

bool any_radius(const ReportTable& t) {
  for (const auto& row : t.rows)
    if (row.r) return true;
  return false;
}

bool all_exact(const ReportTable& t) {
  if (t.rows.empty()) return false;
  for (const auto& row : t.rows)
    if (!row.exact) return false;
  return true;
}

void require_rows(const ReportTable& t) {
  if (t.rows.empty()) throw std::invalid_argument("report needs at least one result row");
}

}  // namespace

double ReportRow::rel_error() const noexcept {
  if (!exact || *exact == 0.0) return std::nan("");
  return std::abs(result.mean - *exact) / std::abs(*exact);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool pending = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    pending = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      pending = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  if (pending) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string render_csv(const ReportTable& t) {
  require_rows(t);
  const bool with_r = any_radius(t);
  const bool with_rel = all_exact(t);
  std::string out;
  if (with_r) out += "r,";
  out += "x,estimate,ci_lo,ci_hi,std_over_mean,";
  if (with_rel) out += "rel_error,";
  out += "runtime_s,n,seed,version\r\n";
  for (const auto& row : t.rows) {
    const auto& res = row.result;
    if (with_r) out += (row.r ? format_double(*row.r) : std::string()) + ",";
    out += csv_field(join_point(row.x, " ")) + ",";
    out += format_double(res.mean) + "," + format_double(res.ci_lo) + "," + format_double(res.ci_hi) + ",";
    const double sm = res.std_over_mean();
    out += (std::isnan(sm) ? std::string() : format_double(sm)) + ",";
    if (with_rel) {
      const double rel = row.rel_error();
      out += (std::isnan(rel) ? std::string() : format_double(rel)) + ",";
    }
    out += format_double(res.elapsed) + "," + std::to_string(res.n) + "," + std::to_string(res.seed) + "," +
           kVersion + "\r\n";
  }
  return out;
}

std::string render_markdown(const ReportTable& t) {
  require_rows(t);
  const bool with_r = any_radius(t);
  const bool with_rel = all_exact(t);
  std::string out;
  if (!t.title.empty()) out += "## " + t.title + "\n\n";
  std::string head = "|";
  std::string rule = "|";
  auto col = [&](std::string_view name) {
    head += " " + std::string(name) + " |";
    rule += "---|";
  };
  if (with_r) col("r");
  col("x");
  col("Estimate");
  col("99% CI");
  col("Std/Mean");
  if (with_rel) col("Rel. error");
  col("Runtime (s)");
  out += head + "\n" + rule + "\n";

  std::set<std::uint64_t> seeds;
  std::set<std::uint64_t> ns;
  for (const auto& row : t.rows) {
    const auto& res = row.result;
    seeds.insert(res.seed);
    ns.insert(res.n);
    std::string line = "|";
    if (with_r) line += " " + (row.r ? format_double(*row.r) : std::string("-")) + " |";
    line += " " + (row.x.size() == 1 ? format_double(row.x[0]) : "(" + join_point(row.x, ", ") + ")") + " |";
    line += " " + fixed(res.mean, 4) + " |";
    line += " [" + fixed(res.ci_lo, 4) + ", " + fixed(res.ci_hi, 4) + "] |";
    const double sm = res.std_over_mean();
    line += " " + (std::isnan(sm) ? std::string("undefined") : fixed(sm, 4)) + " |";
    if (with_rel) {
      const double rel = row.rel_error();
      line += " " + (std::isnan(rel) ? std::string("undefined") : fixed(100.0 * rel, 4) + "%") + " |";
    }
    line += " " + fixed(res.elapsed, 1) + " |";
    out += line + "\n";
  }

  auto list = [](const std::set<std::uint64_t>& s) {
    std::string v;
    for (auto x : s) v += (v.empty() ? "" : ", ") + std::to_string(x);
    return v;
  };
  out += "\nsamples " + list(ns) + "; seed " + list(seeds) + "; branchpde " + kVersion + "\n";
  return out;
}

std::string render(const ReportTable& table, ReportFormat format) {
  return format == ReportFormat::csv ? render_csv(table) : render_markdown(table);
}

std::string render_threshold(const analysis::ThresholdReport& rep, std::optional<double> radius,
                             ReportFormat format) {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"lambda1", format_double(rep.lambda1)},
      {"lambda1_cube_formula", rep.lambda1_cube_formula ? "true" : "false"},
      {"extinction_margin", format_double(rep.extinction_margin)},
      {"delta", format_double(rep.delta)},
      {"delta_std_error", format_double(rep.delta_std_error)},
      {"gamma", format_double(rep.gamma)},
      {"s_star", format_double(rep.s_star)},
      {"supercritical", rep.supercritical ? "true" : "false"},
      {"c0", format_double(rep.c0)},
      {"q", std::to_string(rep.q)},
      {"admissible", rep.admissible ? "true" : "false"},
      {"regime", std::string(analysis::to_string(rep.regime))},
  };
  if (radius) kv.emplace_back("admissible_radius", format_double(*radius));
  kv.emplace_back("version", kVersion);

  std::string out;
  if (format == ReportFormat::csv) {
    out = "quantity,value\r\n";
    for (const auto& [k, v] : kv) out += k + "," + csv_field(v) + "\r\n";
  } else {
    out = "| Quantity | Value |\n|---|---|\n";
    for (const auto& [k, v] : kv) out += "| " + k + " | " + v + " |\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace branchpde
