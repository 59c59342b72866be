#include "branchpde/general_ad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "branchpde/simd/kernels.hpp"

namespace branchpde::ad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside(const Vec& x, const Rectangle& rect) {
  return rect.contains(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double distance(const Vec& x, const Rectangle& rect) {
  return rect.distance_to_boundary(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

// Nearest point of the closed rectangle; used for grid-detected exits.
Vec project(const Vec& x, const Rectangle& rect) {
  Vec p = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Interval& iv = rect.sides[static_cast<std::size_t>(j)];
    p[j] = std::clamp(x[j], iv.lo, iv.hi);
  }
  return p;
}

// X only, without the tangent; used after the clock has stopped.
void step_position(Vec& x, const DiffusionSpec& spec, double h, NormalBuffer& normals) {
  const double sq = std::sqrt(h);
  if (spec.standard_brownian) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += sq * normals.next();
    return;
  }
  Vec dw(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) dw[i] = sq * normals.next();
  const Vec drift = spec.mu(x);
  x += drift * h + spec.sigma(x) * dw;
}

}  // namespace

DiffusionSpec DiffusionSpec::brownian(std::size_t dim) {
  DiffusionSpec s;
  s.dim = dim;
  s.mu = [dim](const Vec&) { return Vec::Zero(static_cast<Eigen::Index>(dim)); };
  s.sigma = [dim](const Vec&) { return Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)); };
  s.standard_brownian = true;
  return s;
}

DiffusionSpec DiffusionSpec::linear_drift(const Mat& a) {
  DiffusionSpec s = brownian(static_cast<std::size_t>(a.rows()));
  s.mu = [a](const Vec& x) -> Vec { return a * x; };
  s.dmu = [a](const Vec&) { return a; };
  s.standard_brownian = false;
  return s;
}

void DiffusionSpec::validate() const {
  if (dim == 0 || dim > static_cast<std::size_t>(kMaxDim))
    throw std::invalid_argument("DiffusionSpec: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!mu || !sigma) throw std::invalid_argument("DiffusionSpec: mu and sigma are required");
}

void EulerConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || !(max_time > 0.0))
    throw std::invalid_argument("EulerConfig: dt, horizon and max_time must be positive");
  if (!(clock_step > 0.0 && clock_step <= 0.1)) throw std::invalid_argument("EulerConfig: clock_step must lie in (0, 0.1]");
}

void step_with_tangent(State& state, const DiffusionSpec& spec, double h, NormalBuffer& normals, Vec& dw) {
  const auto n = static_cast<Eigen::Index>(spec.dim);
  const double sq = std::sqrt(h);
  dw.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) dw[i] = sq * normals.next();
  state.t += h;
  if (spec.standard_brownian) {
    state.x += dw;
    return;
  }
  // Coefficients at the left point, shared by X and Y.
  const Vec x0 = state.x;
  Mat dy = Mat::Zero(n, n);
  if (spec.dmu) dy.noalias() += spec.dmu(x0) * state.y * h;
  if (spec.dsigma)
    for (Eigen::Index i = 0; i < n; ++i) dy.noalias() += spec.dsigma(x0, static_cast<std::size_t>(i)) * state.y * dw[i];
  state.x += spec.mu(x0) * h + spec.sigma(x0) * dw;
  state.y += dy;
}

AdPath sample_ad_weight(const Vec& x, const DiffusionSpec& spec, const Rectangle& domain, Selector selector,
                        const EulerConfig& config, Stream& rng) {
  spec.validate();
  config.validate();
  const auto n = static_cast<Eigen::Index>(spec.dim);
  if (static_cast<std::size_t>(x.size()) != spec.dim || domain.dim() != spec.dim)
    throw std::invalid_argument("sample_ad_weight: dimension mismatch");
  if (!inside(x, domain)) throw DegenerateStart("sample_ad_weight: start must be interior");
  if (!selector.boundary && !(selector.s > 0.0)) throw std::invalid_argument("sample_ad_weight: s must be positive");
  const double horizon = selector.boundary ? config.horizon : std::min(selector.s, config.horizon);

  NormalBuffer normals(rng);
  State st{x, Mat::Identity(n, n), 0.0};
  AdPath out;
  out.weight = Vec::Zero(n);
  Vec dw(n);

  // Clock phase: A = ∫θ dr; the final step is shortened so that A lands on 1.
  double clock = 0.0;
  const double sq_dt = std::sqrt(config.dt);
  // Returns (θ, h, √h, last). The common case h = dt is decided without a
  // division so that the position update does not wait on one.
  auto clock_step = [&](double d) {
    const double q = d * d * (horizon - st.t);
    const double theta = 1.0 / q;
    if (config.dt * 64.0 <= d * d && config.dt <= config.clock_step * q && clock + config.dt * theta < 1.0)
      return std::tuple{theta, config.dt, sq_dt, false};
    double h = std::min({config.dt, d * d / 64.0, config.clock_step * q});
    const bool last = clock + theta * h >= 1.0;
    if (last) h = (1.0 - clock) * q;
    if (!(h > 0.0) || !std::isfinite(theta)) throw ClockUnderResolved("sample_ad_weight: clock step underflow");
    return std::tuple{theta, h, std::sqrt(h), last};
  };
  if (spec.standard_brownian) {
    // Y stays the identity: W accumulates θ dW directly.
    for (;;) {
      const double d = distance(st.x, domain);
      if (d <= 0.0) {
        out.exit_before_clock = true;
        break;
      }
      const auto [theta, h, sq, last] = clock_step(d);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double inc = sq * normals.next();
        st.x[j] += inc;
        out.weight[j] += theta * inc;
      }
      st.t += h;
      clock += theta * h;
      ++out.steps;
      if (last) break;
    }
  } else {
    for (;;) {
      const double d = distance(st.x, domain);
      if (d <= 0.0) {
        out.exit_before_clock = true;
        break;
      }
      const auto [theta, h, sq, last] = clock_step(d);
      static_cast<void>(sq);
      const Mat m = spec.sigma(st.x).partialPivLu().solve(st.y);
      step_with_tangent(st, spec, h, normals, dw);
      out.weight.noalias() += theta * (m.transpose() * dw);
      clock += theta * h;
      ++out.steps;
      if (last) break;
    }
  }
  out.zeta = st.t;
  out.clock = clock;
  if (clock > 1.1) throw ClockUnderResolved("sample_ad_weight: clock overshoot " + std::to_string(clock - 1.0));

  auto finish_exit = [&]() {
    out.exited = true;
    out.eta = st.t;
    out.end = project(st.x, domain);
  };
  if (out.exit_before_clock || !inside(st.x, domain)) {
    out.exit_before_clock = true;
    finish_exit();
    return out;
  }

  if (!selector.boundary) {
    // Run to time s on the dt grid, last step shortened.
    while (st.t < selector.s) {
      const double h = std::min(config.dt, selector.s - st.t);
      step_position(st.x, spec, h, normals);
      st.t += h;
      ++out.steps;
      if (!inside(st.x, domain)) {
        finish_exit();
        return out;
      }
    }
    out.eta = kInf;
    out.end = st.x;
    return out;
  }

  if (spec.standard_brownian && spec.dim == 1) {
    const Interval& iv = domain.sides[0];
    const double scale = std::sqrt(config.dt);
    double pos = st.x[0];
    while (st.t < config.max_time) {
      const auto z = normals.take(NormalBuffer::kBatch);
      const std::size_t idx = simd::brownian_scan(pos, z, scale, iv.lo, iv.hi);
      const std::size_t used = idx < z.size() ? idx + 1 : z.size();
      st.t += static_cast<double>(used) * config.dt;
      out.steps += used;
      if (idx < z.size()) {
        st.x[0] = pos;
        finish_exit();
        return out;
      }
    }
    st.x[0] = pos;
  } else {
    while (st.t < config.max_time) {
      step_position(st.x, spec, config.dt, normals);
      st.t += config.dt;
      ++out.steps;
      if (!inside(st.x, domain)) {
        finish_exit();
        return out;
      }
    }
  }
  out.censored = true;
  out.eta = kInf;
  out.end = st.x;
  return out;
}

LifetimeLaw LifetimeLaw::exponential(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("LifetimeLaw: beta must be positive");
  return {Kind::exponential, beta, beta};
}

LifetimeLaw LifetimeLaw::gamma_half(double beta, double beta_prime) {
  if (!(beta > 0.0) || !(beta_prime > 0.0) || !(beta_prime < beta))
    throw std::invalid_argument("LifetimeLaw: gamma_half needs 0 < beta' < beta");
  return {Kind::gamma_half, beta, beta_prime};
}

LifetimeLaw LifetimeLaw::generalized_gamma(double beta, double beta_prime) {
  if (!(beta > 0.0) || !(beta_prime > 0.0)) throw std::invalid_argument("LifetimeLaw: rates must be positive");
  return {Kind::generalized_gamma, beta, beta_prime};
}

double LifetimeLaw::sample(Stream& rng) const {
  switch (kind_) {
    case Kind::exponential: return rng.exponential(rate_);
    case Kind::gamma_half: {
      const double z = rng.normal();
      return z * z / (2.0 * rate_);
    }
    case Kind::generalized_gamma: {
      const double e = rng.exponential(rate_);
      return e * e;
    }
  }
  return 0.0;
}

double LifetimeLaw::density(double t) const {
  if (t <= 0.0) return kind_ == Kind::exponential ? (t == 0.0 ? rate_ : 0.0) : (t == 0.0 ? kInf : 0.0);
  switch (kind_) {
    case Kind::exponential: return rate_ * std::exp(-rate_ * t);
    case Kind::gamma_half: return std::sqrt(rate_ / (std::numbers::pi * t)) * std::exp(-rate_ * t);
    case Kind::generalized_gamma: return rate_ / (2.0 * std::sqrt(t)) * std::exp(-rate_ * std::sqrt(t));
  }
  return 0.0;
}

double LifetimeLaw::survival(double t) const {
  if (t <= 0.0) return 1.0;
  switch (kind_) {
    case Kind::exponential: return std::exp(-rate_ * t);
    case Kind::gamma_half: return std::erfc(std::sqrt(rate_ * t));
    case Kind::generalized_gamma: return std::exp(-rate_ * std::sqrt(t));
  }
  return 0.0;
}

double LifetimeLaw::interior_factor(double t) const {
  if (kind_ == Kind::exponential) return 1.0;
  return beta_ * std::exp(-beta_ * t) / density(t);
}

double LifetimeLaw::boundary_factor(double t) const {
  if (kind_ == Kind::exponential) return 1.0;
  switch (kind_) {
    case Kind::gamma_half: {
      // e^{-βt}/erfc(√(β't)); past a = 26 erfc underflows and the asymptotic
      // series erfc(a) ~ e^{-a²}/(a√π)(1 - 1/(2a²) + 3/(4a⁴)) is exact to 1e-8.
      const double a = std::sqrt(rate_ * t);
      if (a < 26.0) return std::exp(-beta_ * t) / std::erfc(a);
      const double inv = 1.0 / (a * a);
      return std::exp(-(beta_ - rate_) * t) * a * std::sqrt(std::numbers::pi) / (1.0 - 0.5 * inv + 0.75 * inv * inv);
    }
    case Kind::generalized_gamma: return std::exp(-beta_ * t + rate_ * std::sqrt(t));
    default: return 1.0;
  }
}

}  // namespace branchpde::ad
