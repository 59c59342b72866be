#include "branchpde/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "branchpde/registry.hpp"

namespace branchpde {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const toml::node& node, const std::string& message) const {
    const auto& where = node.source().begin;
    throw ConfigError(source_ + ":" + std::to_string(where.line) + ":" + std::to_string(where.column) + ": " + message);
  }

  void check_keys(const toml::table& table, std::initializer_list<std::string_view> allowed,
                  std::string_view section) const {
    for (auto&& [key, node] : table) {
      bool ok = false;
      for (auto a : allowed) ok |= key.str() == a;
      if (!ok) fail(node, "unknown key '" + std::string(key.str()) + "' in [" + std::string(section) + "]");
    }
  }

  const toml::table* section(const toml::table& root, std::string_view name) const {
    const toml::node* node = root.get(name);
    if (node == nullptr) return nullptr;
    if (!node->is_table()) fail(*node, "'" + std::string(name) + "' must be a table");
    return node->as_table();
  }

  double number(const toml::node& node, std::string_view what) const {
    if (auto v = node.value<double>(); v && (node.is_floating_point() || node.is_integer())) return *v;
    fail(node, std::string(what) + " must be a number");
  }

  std::uint64_t count(const toml::node& node, std::string_view what) const {
    if (auto v = node.value<std::int64_t>(); v && node.is_integer()) {
      if (*v < 0) fail(node, std::string(what) + " must be non-negative");
      return static_cast<std::uint64_t>(*v);
    }
    fail(node, std::string(what) + " must be a non-negative integer");
  }

  std::string text(const toml::node& node, std::string_view what) const {
    if (auto v = node.value<std::string>(); v && node.is_string()) return *v;
    fail(node, std::string(what) + " must be a string");
  }

  /// Registry reference: a string, or a number written as a constant.
  std::string reference(const toml::node& node, std::string_view what) const {
    if (node.is_string()) return *node.value<std::string>();
    if (node.is_number()) return format_number(*node.value<double>());
    fail(node, std::string(what) + " must be a registry reference or a number");
  }

  std::vector<double> numbers(const toml::node& node, std::string_view what) const {
    const toml::array* arr = node.as_array();
    if (arr == nullptr) fail(node, std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : *arr) out.push_back(number(v, what));
    return out;
  }

  static std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

 private:
  std::string source_;
};

std::string_view delta_method_name(analysis::DeltaMethod m) {
  switch (m) {
    case analysis::DeltaMethod::automatic: return "automatic";
    case analysis::DeltaMethod::quadrature: return "quadrature";
    case analysis::DeltaMethod::monte_carlo: return "monte_carlo";
  }
  return "automatic";
}

Rectangle make_rect(const DomainConfig& d, std::optional<double> r_override) {
  if (d.r) return Rectangle::cube(d.dim, r_override.value_or(*d.r));
  if (r_override) throw ConfigError("radius override needs a centred-cube domain ([domain] r = ...)");
  Rectangle rect;
  for (auto [lo, hi] : d.sides) rect.sides.push_back({lo, hi});
  return rect;
}

}  // namespace

std::optional<ReportFormat> parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "md" || name == "markdown") return ReportFormat::markdown;
  return std::nullopt;
}

std::string_view to_string(ReportFormat format) noexcept { return format == ReportFormat::csv ? "csv" : "md"; }

ProblemSpec build_problem(const ProblemConfig& config, std::optional<double> r_override) {
  ProblemSpec spec;
  spec.beta = config.beta;
  spec.rect = make_rect(config.domain, r_override);
  spec.rect.validate();
  const FieldContext ctx{spec.rect, spec.beta};
  const auto& reg = Registry::global();
  for (const auto& t : config.terms) spec.terms.push_back({t.l, reg.make(t.c, ctx), t.p});
  for (const auto& b : config.b) spec.b.push_back(reg.make(b, ctx));
  spec.h = reg.make(config.h, ctx);
  if (config.exact) spec.exact = reg.make(*config.exact, ctx);
  spec.budget = {config.max_particles, config.max_generations};
  spec.validate();
  return spec;
}

RunConfig parse_config(std::string_view text, std::string_view source_name) {
  const Reader rd(source_name);
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ConfigError(std::string(source_name) + ":" + std::to_string(where.line) + ":" + std::to_string(where.column) +
                      ": " + std::string(e.description()));
  }
  rd.check_keys(root, {"problem", "domain", "nonlinearity", "boundary", "gradient", "budget", "run", "analysis", "output"},
                "top level");

  RunConfig cfg;
  ProblemConfig& pc = cfg.problem;

  if (const auto* t = rd.section(root, "problem")) {
    rd.check_keys(*t, {"beta", "exact"}, "problem");
    if (const auto* n = t->get("beta")) pc.beta = rd.number(*n, "problem.beta");
    if (const auto* n = t->get("exact")) pc.exact = rd.reference(*n, "problem.exact");
  }

  const auto* dom = rd.section(root, "domain");
  if (dom == nullptr) throw ConfigError(std::string(source_name) + ": missing [domain]");
  rd.check_keys(*dom, {"r", "dim", "sides"}, "domain");
  if (const auto* n = dom->get("r")) {
    if (dom->get("sides") != nullptr) rd.fail(*n, "[domain] takes either r (+ dim) or sides, not both");
    pc.domain.r = rd.number(*n, "domain.r");
    if (const auto* d = dom->get("dim")) pc.domain.dim = rd.count(*d, "domain.dim");
  } else if (const auto* n = dom->get("sides")) {
    if (dom->get("dim") != nullptr) rd.fail(*dom->get("dim"), "domain.dim is implied by sides");
    const toml::array* arr = n->as_array();
    if (arr == nullptr || arr->empty()) rd.fail(*n, "domain.sides must be a non-empty array of [lo, hi] pairs");
    for (const auto& side : *arr) {
      const auto pair = rd.numbers(side, "domain.sides entry");
      if (pair.size() != 2) rd.fail(side, "domain.sides entries must be [lo, hi]");
      pc.domain.sides.emplace_back(pair[0], pair[1]);
    }
    pc.domain.dim = pc.domain.sides.size();
  } else {
    rd.fail(*dom, "[domain] needs r or sides");
  }

  const toml::node* nl = root.get("nonlinearity");
  if (nl == nullptr || !nl->is_array_of_tables()) throw ConfigError(std::string(source_name) + ": missing [[nonlinearity]] entries");
  for (const auto& entry : *nl->as_array()) {
    const auto& t = *entry.as_table();
    rd.check_keys(t, {"l", "c", "p"}, "nonlinearity");
    TermConfig term;
    const auto* l = t.get("l");
    const auto* c = t.get("c");
    const auto* p = t.get("p");
    if (l == nullptr || c == nullptr || p == nullptr) rd.fail(entry, "[[nonlinearity]] needs l, c and p");
    for (double v : rd.numbers(*l, "nonlinearity.l")) {
      if (v < 0 || v != std::floor(v)) rd.fail(*l, "nonlinearity.l entries must be non-negative integers");
      term.l.push_back(static_cast<int>(v));
    }
    term.c = rd.reference(*c, "nonlinearity.c");
    term.p = rd.number(*p, "nonlinearity.p");
    pc.terms.push_back(std::move(term));
  }

  const auto* bd = rd.section(root, "boundary");
  if (bd == nullptr || bd->get("h") == nullptr) throw ConfigError(std::string(source_name) + ": missing [boundary] h");
  rd.check_keys(*bd, {"h"}, "boundary");
  pc.h = rd.reference(*bd->get("h"), "boundary.h");

  if (const auto* t = rd.section(root, "gradient")) {
    rd.check_keys(*t, {"b"}, "gradient");
    if (const auto* n = t->get("b")) {
      const toml::array* arr = n->as_array();
      if (arr == nullptr) rd.fail(*n, "gradient.b must be an array");
      for (const auto& v : *arr) pc.b.push_back(rd.reference(v, "gradient.b entry"));
    }
  }

  if (const auto* t = rd.section(root, "budget")) {
    rd.check_keys(*t, {"max_particles", "max_generations"}, "budget");
    if (const auto* n = t->get("max_particles")) pc.max_particles = rd.count(*n, "budget.max_particles");
    if (const auto* n = t->get("max_generations")) pc.max_generations = rd.count(*n, "budget.max_generations");
  }

  if (const auto* t = rd.section(root, "run")) {
    rd.check_keys(*t, {"x", "n", "seed", "threads", "block_size"}, "run");
    if (const auto* n = t->get("x")) {
      const toml::array* arr = n->as_array();
      if (arr == nullptr) rd.fail(*n, "run.x must be an array");
      for (const auto& v : *arr) {
        if (v.is_array()) cfg.run.x.push_back(rd.numbers(v, "run.x point"));
        else cfg.run.x.push_back({rd.number(v, "run.x")});
      }
    }
    if (const auto* n = t->get("n")) {
      cfg.run.n = rd.count(*n, "run.n");
      if (cfg.run.n < 2) rd.fail(*n, "run.n must be at least 2");
    }
    if (const auto* n = t->get("seed")) {
      if (n->is_string()) {
        const std::string s = *n->value<std::string>();
        std::uint64_t v = 0;
        const int base = s.rfind("0x", 0) == 0 ? 16 : 10;
        const char* first = s.data() + (base == 16 ? 2 : 0);
        const auto res = std::from_chars(first, s.data() + s.size(), v, base);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) rd.fail(*n, "run.seed string must be a 64-bit integer");
        cfg.run.seed = v;
      } else {
        cfg.run.seed = rd.count(*n, "run.seed");
      }
    }
    if (const auto* n = t->get("threads")) cfg.run.threads = static_cast<unsigned>(rd.count(*n, "run.threads"));
    if (const auto* n = t->get("block_size")) {
      cfg.run.block_size = rd.count(*n, "run.block_size");
      if (cfg.run.block_size == 0) rd.fail(*n, "run.block_size must be positive");
    }
  }

  if (const auto* t = rd.section(root, "analysis")) {
    rd.check_keys(*t, {"q", "delta_method", "mc_samples", "radius_range", "tol"}, "analysis");
    if (const auto* n = t->get("q")) {
      const auto q = rd.count(*n, "analysis.q");
      if (q < 1 || q > 16) rd.fail(*n, "analysis.q must lie in [1, 16]");
      cfg.analysis.q = static_cast<int>(q);
    }
    if (const auto* n = t->get("delta_method")) {
      const std::string m = rd.text(*n, "analysis.delta_method");
      if (m == "automatic") cfg.analysis.delta_method = analysis::DeltaMethod::automatic;
      else if (m == "quadrature") cfg.analysis.delta_method = analysis::DeltaMethod::quadrature;
      else if (m == "monte_carlo") cfg.analysis.delta_method = analysis::DeltaMethod::monte_carlo;
      else rd.fail(*n, "analysis.delta_method must be automatic, quadrature or monte_carlo");
    }
    if (const auto* n = t->get("mc_samples")) {
      cfg.analysis.mc_samples = rd.count(*n, "analysis.mc_samples");
      if (cfg.analysis.mc_samples < 2) rd.fail(*n, "analysis.mc_samples must be at least 2");
    }
    if (const auto* n = t->get("radius_range")) {
      const auto v = rd.numbers(*n, "analysis.radius_range");
      if (v.size() != 2 || !(0 < v[0] && v[0] < v[1])) rd.fail(*n, "analysis.radius_range must be [lo, hi] with 0 < lo < hi");
      if (!pc.domain.r) rd.fail(*n, "analysis.radius_range needs a centred-cube domain");
      cfg.analysis.radius_range = std::pair{v[0], v[1]};
    }
    if (const auto* n = t->get("tol")) {
      cfg.analysis.tol = rd.number(*n, "analysis.tol");
      if (!(cfg.analysis.tol > 0)) rd.fail(*n, "analysis.tol must be positive");
    }
  }

  if (const auto* t = rd.section(root, "output")) {
    rd.check_keys(*t, {"path", "format"}, "output");
    if (const auto* n = t->get("path")) cfg.output.path = rd.text(*n, "output.path");
    if (const auto* n = t->get("format")) {
      cfg.output.format = parse_format(rd.text(*n, "output.format"));
      if (!cfg.output.format) rd.fail(*n, "output.format must be csv or md");
    }
  }

  ProblemSpec spec;
  try {
    spec = build_problem(pc);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(source_name) + ": invalid problem: " + e.what());
  }
  for (const auto& x : cfg.run.x) {
    if (x.size() != spec.rect.dim())
      throw ConfigError(std::string(source_name) + ": run.x point of dimension " + std::to_string(x.size()) +
                        " in a " + std::to_string(spec.rect.dim()) + "-dimensional domain");
    if (!spec.rect.contains(x)) throw ConfigError(std::string(source_name) + ": run.x point outside the open domain");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string serialize_config(const RunConfig& cfg) {
  const ProblemConfig& pc = cfg.problem;
  toml::table root;

  toml::table problem{{"beta", pc.beta}};
  if (pc.exact) problem.insert("exact", *pc.exact);
  root.insert("problem", std::move(problem));

  toml::table domain;
  if (pc.domain.r) {
    domain.insert("r", *pc.domain.r);
    domain.insert("dim", static_cast<std::int64_t>(pc.domain.dim));
  } else {
    toml::array sides;
    for (auto [lo, hi] : pc.domain.sides) sides.push_back(toml::array{lo, hi});
    domain.insert("sides", std::move(sides));
  }
  root.insert("domain", std::move(domain));

  toml::array terms;
  for (const auto& t : pc.terms) {
    toml::array l;
    for (int v : t.l) l.push_back(static_cast<std::int64_t>(v));
    terms.push_back(toml::table{{"l", std::move(l)}, {"c", t.c}, {"p", t.p}});
  }
  root.insert("nonlinearity", std::move(terms));
  root.insert("boundary", toml::table{{"h", pc.h}});
  if (!pc.b.empty()) {
    toml::array b;
    for (const auto& v : pc.b) b.push_back(v);
    root.insert("gradient", toml::table{{"b", std::move(b)}});
  }
  root.insert("budget", toml::table{{"max_particles", static_cast<std::int64_t>(pc.max_particles)},
                                    {"max_generations", static_cast<std::int64_t>(pc.max_generations)}});

  toml::table run;
  toml::array xs;
  for (const auto& x : cfg.run.x) {
    toml::array point;
    for (double v : x) point.push_back(v);
    xs.push_back(std::move(point));
  }
  run.insert("x", std::move(xs));
  run.insert("n", static_cast<std::int64_t>(cfg.run.n));
  // Seeds use the full unsigned range; strings avoid the signed TOML integer limit.
  if (cfg.run.seed) run.insert("seed", std::to_string(*cfg.run.seed));
  run.insert("threads", static_cast<std::int64_t>(cfg.run.threads));
  run.insert("block_size", static_cast<std::int64_t>(cfg.run.block_size));
  root.insert("run", std::move(run));

  toml::table an{{"q", static_cast<std::int64_t>(cfg.analysis.q)},
                 {"delta_method", std::string(delta_method_name(cfg.analysis.delta_method))},
                 {"mc_samples", static_cast<std::int64_t>(cfg.analysis.mc_samples)},
                 {"tol", cfg.analysis.tol}};
  if (cfg.analysis.radius_range) an.insert("radius_range", toml::array{cfg.analysis.radius_range->first, cfg.analysis.radius_range->second});
  root.insert("analysis", std::move(an));

  toml::table out;
  if (!cfg.output.path.empty()) out.insert("path", cfg.output.path);
  if (cfg.output.format) out.insert("format", std::string(to_string(*cfg.output.format)));
  if (!out.empty()) root.insert("output", std::move(out));

  std::ostringstream os;
  os << toml::toml_formatter{root};
  return os.str();
}

}  // namespace branchpde
