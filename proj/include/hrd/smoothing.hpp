#pragma once

#include <cstdint>
#include <string>

#include "hrd/rng.hpp"

namespace hrd {

struct PathEnsemble;  // models.hpp

// Density family for the smoothing variable Z. All three members are
// symmetric, unimodal, strictly positive on R, absolutely continuous with
// f' in L1 — exactly what the shift bound and the positive-depth result ask
// for. grad_l1() is the closed form of the total variation of f,
// int |f'| = 2 f(0).
struct SmoothingDensity {
  enum class Family { gaussian, laplace, cauchy };

  Family family = Family::gaussian;
  double scale = 1.0;

  static SmoothingDensity Gaussian(double sigma);
  static SmoothingDensity Laplace(double b);
  static SmoothingDensity Cauchy(double gamma);

  double pdf(double x) const;
  double cdf(double x) const;
  double survival(double x) const;  // P(Z >= x)
  double sample(PathRng& rng) const;
  double grad_l1() const;
  std::string family_name() const;
  void validate() const;

  bool operator==(const SmoothingDensity&) const = default;
};

// One independent draw Z_j per path, added to every value of path j.
// Increments are unchanged; the result is flagged smoothed, and smoothing an
// already-smoothed ensemble is a domain error.
PathEnsemble smooth_ensemble(const PathEnsemble& ens, const SmoothingDensity& density,
                             std::uint64_t seed);

struct TvShift {
  double lhs;       // int |f(x+delta) - f(x)| dx by adaptive quadrature
  double rhs;       // |delta| * grad_l1 — the L1 shift bound
  double w3_bound;  // 2 |delta| * grad_l1 — the margin-tail Lipschitz bound
};

// Contract: lhs <= rhs for every admissible density and shift.
TvShift tv_shift_check(const SmoothingDensity& density, double delta);

}  // namespace hrd
