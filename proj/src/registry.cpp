#include "branchpde/registry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace branchpde {
namespace {

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::vector<double> parse_numbers(std::string_view param, std::vector<double> defaults, std::string_view name) {
  if (param.empty()) return defaults;
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= param.size()) {
    const std::size_t comma = param.find(',', start);
    const auto piece = param.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto v = parse_number(piece);
    if (!v) throw UnknownFunction("bad parameter '" + std::string(piece) + "' for " + std::string(name));
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() != defaults.size())
    throw UnknownFunction(std::string(name) + " expects " + std::to_string(defaults.size()) + " parameter(s)");
  return out;
}

void require_dim1(const FieldContext& ctx, std::string_view name) {
  if (ctx.rect.dim() != 1) throw UnknownFunction(std::string(name) + " is defined for one-dimensional domains only");
}

// max |x| over [lo, hi] and min |x| over [lo, hi].
double max_abs(const Interval& iv) { return std::max(std::abs(iv.lo), std::abs(iv.hi)); }
double min_abs(const Interval& iv) { return (iv.lo <= 0.0 && iv.hi >= 0.0) ? 0.0 : std::min(std::abs(iv.lo), std::abs(iv.hi)); }

ScalarField one_dim(std::string name, std::function<double(double)> f, std::function<double(double)> d1,
                    std::function<double(double)> d2, std::function<double(const Rectangle&)> sup) {
  ScalarField out;
  out.name = std::move(name);
  out.eval = [f](std::span<const double> x) { return f(x[0]); };
  out.d1 = std::move(d1);
  out.d2 = std::move(d2);
  out.sup_abs = std::move(sup);
  return out;
}

}  // namespace

Registry& Registry::global() {
  static Registry* instance = [] {
    auto* r = new Registry;
    register_builtin_fields(*r);
    return r;
  }();
  return *instance;
}

void Registry::add(std::string name, std::string description, FieldFactory factory) {
  std::lock_guard lock(mutex_);
  entries_[std::move(name)] = Entry{std::move(description), std::move(factory)};
}

ScalarField Registry::make(std::string_view reference, const FieldContext& ctx) const {
  if (auto v = parse_number(reference)) return ScalarField::constant(*v);
  const std::size_t colon = reference.find(':');
  const std::string_view name = reference.substr(0, colon);
  const std::string_view param = colon == std::string_view::npos ? std::string_view{} : reference.substr(colon + 1);
  FieldFactory factory;
  {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw UnknownFunction("unknown function '" + std::string(name) + "'");
    factory = it->second.factory;
  }
  ScalarField f = factory(param, ctx);
  f.name = std::string(reference);
  return f;
}

bool Registry::contains(std::string_view reference) const {
  if (parse_number(reference)) return true;
  std::lock_guard lock(mutex_);
  return entries_.find(reference.substr(0, reference.find(':'))) != entries_.end();
}

std::vector<std::pair<std::string, std::string>> Registry::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) out.emplace_back(k, v.description);
  return out;
}

void register_builtin_fields(Registry& r) {
  using std::cos, std::cosh, std::sin, std::sinh, std::sqrt, std::tan, std::tanh;

  r.add("const", "const:v, the constant v", [](std::string_view param, const FieldContext&) {
    return ScalarField::constant(parse_numbers(param, {0.0}, "const")[0]);
  });

  r.add("cosh_sech", "sqrt(2)/cosh(x), d = 1", [](std::string_view, const FieldContext& ctx) {
    require_dim1(ctx, "cosh_sech");
    const double s2 = std::numbers::sqrt2;
    return one_dim(
        "", [s2](double x) { return s2 / cosh(x); }, [s2](double x) { return -s2 * tanh(x) / cosh(x); },
        [s2](double x) { return s2 / cosh(x) * (2.0 * tanh(x) * tanh(x) - 1.0); },
        [s2](const Rectangle& rect) { return s2 / cosh(min_abs(rect.sides[0])); });
  });

  r.add("one_plus_2tan2", "1 + 2 tan(x)^2, d = 1", [](std::string_view, const FieldContext& ctx) {
    require_dim1(ctx, "one_plus_2tan2");
    return one_dim(
        "", [](double x) { return 1.0 + 2.0 * tan(x) * tan(x); },
        [](double x) { return 4.0 * tan(x) / (cos(x) * cos(x)); },
        [](double x) {
          const double sec2 = 1.0 / (cos(x) * cos(x));
          return 4.0 * sec2 * (sec2 + 2.0 * tan(x) * tan(x));
        },
        [](const Rectangle& rect) {
          const double m = max_abs(rect.sides[0]);
          return 1.0 + 2.0 * tan(m) * tan(m);
        });
  });

  r.add("tan_sum", "tan(x_1 + ... + x_d)", [](std::string_view, const FieldContext& ctx) {
    double lo = 0, hi = 0;
    for (const auto& iv : ctx.rect.sides) {
      lo += iv.lo;
      hi += iv.hi;
    }
    if (!(lo > -std::numbers::pi / 2 && hi < std::numbers::pi / 2))
      throw UnknownFunction("tan_sum: sum of coordinates leaves (-pi/2, pi/2) on this domain");
    ScalarField f;
    f.eval = [](std::span<const double> x) {
      double s = 0;
      for (double v : x) s += v;
      return tan(s);
    };
    f.sup_abs = [](const Rectangle& rect) {
      double a = 0, b = 0;
      for (const auto& iv : rect.sides) {
        a += iv.lo;
        b += iv.hi;
      }
      return std::max(std::abs(tan(a)), std::abs(tan(b)));
    };
    if (ctx.rect.dim() == 1) {
      f.d1 = [](double x) { return 1.0 / (cos(x) * cos(x)); };
      f.d2 = [](double x) { return 2.0 * tan(x) / (cos(x) * cos(x)); };
    }
    return f;
  });

  r.add("cos_super", "cos_super:lambda, sqrt(1+lambda) cos(sqrt(lambda) x), d = 1",
        [](std::string_view param, const FieldContext& ctx) {
          require_dim1(ctx, "cos_super");
          const double lambda = parse_numbers(param, {6.0}, "cos_super")[0];
          if (!(lambda > 0)) throw UnknownFunction("cos_super: lambda must be positive");
          const double a = sqrt(1.0 + lambda);
          const double k = sqrt(lambda);
          return one_dim(
              "", [a, k](double x) { return a * cos(k * x); }, [a, k](double x) { return -a * k * sin(k * x); },
              [a, k](double x) { return -a * k * k * cos(k * x); },
              [a, k](const Rectangle& rect) {
                const Interval& iv = rect.sides[0];
                // |cos| peaks at multiples of pi/k inside the interval, else at an endpoint.
                const double first = std::ceil(k * iv.lo / std::numbers::pi);
                if (first * std::numbers::pi / k <= iv.hi) return a;
                return a * std::max(std::abs(cos(k * iv.lo)), std::abs(cos(k * iv.hi)));
              });
        });

  r.add("cos", "cos(x), d = 1", [](std::string_view, const FieldContext& ctx) {
    require_dim1(ctx, "cos");
    return one_dim(
        "", [](double x) { return cos(x); }, [](double x) { return -sin(x); }, [](double x) { return -cos(x); },
        [](const Rectangle& rect) {
          const Interval& iv = rect.sides[0];
          const double first = std::ceil(iv.lo / std::numbers::pi);
          if (first * std::numbers::pi <= iv.hi) return 1.0;
          return std::max(std::abs(cos(iv.lo)), std::abs(cos(iv.hi)));
        });
  });

  r.add("exp", "exp:a, exp(a x), d = 1", [](std::string_view param, const FieldContext& ctx) {
    require_dim1(ctx, "exp");
    const double a = parse_numbers(param, {1.0}, "exp")[0];
    return one_dim(
        "", [a](double x) { return std::exp(a * x); }, [a](double x) { return a * std::exp(a * x); },
        [a](double x) { return a * a * std::exp(a * x); },
        [a](const Rectangle& rect) { return std::max(std::exp(a * rect.sides[0].lo), std::exp(a * rect.sides[0].hi)); });
  });

  r.add("vanish_quadratic", "(x - lo)(hi - x), d = 1", [](std::string_view, const FieldContext& ctx) {
    require_dim1(ctx, "vanish_quadratic");
    const Interval iv = ctx.rect.sides[0];
    return one_dim(
        "", [iv](double x) { return (x - iv.lo) * (iv.hi - x); }, [iv](double x) { return iv.lo + iv.hi - 2.0 * x; },
        [](double) { return -2.0; }, [](const Rectangle& rect) { return 0.25 * rect.sides[0].width() * rect.sides[0].width(); });
  });

  r.add("gdemo_source",
        "gdemo_source:c1,kappa, source making u = cos x solve the gradient demo with f = c0 + c1 u + kappa b u'",
        [](std::string_view param, const FieldContext& ctx) {
          require_dim1(ctx, "gdemo_source");
          const auto p = parse_numbers(param, {0.25, 0.5}, "gdemo_source");
          const double c1 = p[0], kappa = p[1], beta = ctx.beta;
          const Interval iv = ctx.rect.sides[0];
          ScalarField f;
          f.eval = [=](std::span<const double> x) {
            const double b = (x[0] - iv.lo) * (iv.hi - x[0]);
            return cos(x[0]) * (1.0 + 0.5 / beta - c1) + kappa * b * sin(x[0]);
          };
          return f;
        });

  r.add("indicator", "indicator:a,b, 1 on [a, b], d = 1", [](std::string_view param, const FieldContext& ctx) {
    require_dim1(ctx, "indicator");
    const auto p = parse_numbers(param, {0.0, 0.0}, "indicator");
    const double a = p[0], b = p[1];
    ScalarField f;
    f.eval = [a, b](std::span<const double> x) { return (x[0] >= a && x[0] <= b) ? 1.0 : 0.0; };
    f.sup_abs = [a, b](const Rectangle& rect) { return (b >= rect.sides[0].lo && a <= rect.sides[0].hi) ? 1.0 : 0.0; };
    return f;
  });
}

double sup_abs(const ScalarField& f, const Rectangle& rect) {
  if (f.sup_abs) return f.sup_abs(rect);
  const std::size_t d = rect.dim();
  // Grid with a per-axis count chosen to keep the total near 2^16 points, then
  // two rounds of local refinement around the best point.
  const std::size_t per_axis = std::max<std::size_t>(5, static_cast<std::size_t>(std::pow(65536.0, 1.0 / d)));
  std::vector<double> best(d), x(d), lo(d), hi(d);
  for (std::size_t j = 0; j < d; ++j) {
    lo[j] = rect.sides[j].lo;
    hi[j] = rect.sides[j].hi;
  }
  double best_val = -1.0;
  for (int round = 0; round < 3; ++round) {
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      for (std::size_t j = 0; j < d; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * double(idx[j]) / double(per_axis - 1);
      const double v = std::abs(f(x));
      if (v > best_val) {
        best_val = v;
        best = x;
      }
      std::size_t j = 0;
      while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
      if (j == d) break;
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double span = 2.0 * (hi[j] - lo[j]) / double(per_axis - 1);
      lo[j] = std::max(rect.sides[j].lo, best[j] - span);
      hi[j] = std::min(rect.sides[j].hi, best[j] + span);
    }
  }
  return best_val;
}

}  // namespace branchpde
