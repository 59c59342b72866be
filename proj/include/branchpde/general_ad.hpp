#pragma once

// Euler discretisation of the automatic-differentiation weight for a general
// uniformly elliptic diffusion dX = μ(X)dt + σ(X)dW killed on a rectangle:
//   W = ∫_0^ζ θ(r, X_r) (σ^{-1}(X_r) Y_r)^T dW_r,  θ(r, y) = 1 / (d(y)^2 (s - r)),
// where Y is the tangent process and ζ the first time ∫θ dr reaches one.
// Experimental: the discretisation error is not controlled.

#include <cstdint>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "branchpde/normals.hpp"
#include "branchpde/rect.hpp"
#include "branchpde/rng.hpp"

namespace branchpde::ad {

inline constexpr int kMaxDim = 8;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Coefficients and their Jacobians. Empty dmu / dsigma mean zero Jacobians.
struct DiffusionSpec {
  std::size_t dim = 1;
  std::function<Vec(const Vec&)> mu;
  std::function<Mat(const Vec&)> sigma;
  std::function<Mat(const Vec&)> dmu;
  /// Jacobian of the i-th column of σ.
  std::function<Mat(const Vec&, std::size_t)> dsigma;
  /// μ = 0 and σ = I; enables the vectorised post-clock path.
  bool standard_brownian = false;

  static DiffusionSpec brownian(std::size_t dim);
  /// μ(x) = A x, σ = I.
  static DiffusionSpec linear_drift(const Mat& a);
  void validate() const;
};

struct EulerConfig {
  double dt = 1e-4;
  /// Horizon T of the boundary weight; interior weights use min(s, T).
  double horizon = 1.0;
  /// Paths still inside at this time are censored.
  double max_time = 50.0;
  /// Largest clock increment per step; steps shrink near ζ.
  double clock_step = 0.05;
  void validate() const;
};

struct ClockUnderResolved : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct State {
  Vec x;
  Mat y;
  double t = 0.0;
};

/// One Euler-Maruyama step of (X, Y) with step h; writes the Brownian increment to dw.
void step_with_tangent(State& state, const DiffusionSpec& spec, double h, NormalBuffer& normals, Vec& dw);

/// Which weight to build: the boundary weight (horizon T, path run to exit) or
/// the interior weight at time s (horizon min(s, T), path run to s or exit).
struct Selector {
  bool boundary = true;
  double s = 0.0;
  static Selector at_boundary() { return {true, 0.0}; }
  static Selector at_time(double s) { return {false, s}; }
};

struct AdPath {
  Vec weight;
  double zeta = 0.0;
  /// ∫_0^ζ θ dr as accumulated by the scheme; 1 up to rounding unless exited early.
  double clock = 0.0;
  /// The discrete path left the domain before the clock completed.
  bool exit_before_clock = false;
  /// Exit time on the grid; +inf if censored or not needed.
  double eta = 0.0;
  bool exited = false;
  bool censored = false;
  /// Exit point projected onto the nearest face, or X_s for interior selectors.
  Vec end;
  std::uint64_t steps = 0;
};

AdPath sample_ad_weight(const Vec& x, const DiffusionSpec& spec, const Rectangle& domain, Selector selector,
                        const EulerConfig& config, Stream& rng);

/// Lifetime law ρ of a particle and the reweighting factors that keep the
/// representation unbiased when ρ is not Exp(β).
class LifetimeLaw {
 public:
  enum class Kind { exponential, gamma_half, generalized_gamma };

  static LifetimeLaw exponential(double beta);
  /// Gamma with shape 1/2 and rate β': τ = Z² / (2β').
  static LifetimeLaw gamma_half(double beta, double beta_prime);
  /// ρ(t) = β'/(2√t) exp(-β'√t): τ = E² with E ~ Exp(β').
  static LifetimeLaw generalized_gamma(double beta, double beta_prime);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  double sample(Stream& rng) const;
  [[nodiscard]] double density(double t) const;
  [[nodiscard]] double survival(double t) const;
  /// β e^{-βt} / ρ(t), applied to particles that branch at age t.
  [[nodiscard]] double interior_factor(double t) const;
  /// e^{-βt} / F̄(t), applied to particles that exit at age t.
  [[nodiscard]] double boundary_factor(double t) const;

 private:
  LifetimeLaw(Kind kind, double beta, double rate) : kind_(kind), beta_(beta), rate_(rate) {}
  Kind kind_;
  double beta_;
  double rate_;
};

}  // namespace branchpde::ad
