#include "hrd/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hrd/models.hpp"
#include "hrd/numeric.hpp"

namespace hrd {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

SmoothingDensity SmoothingDensity::Gaussian(double sigma) {
  SmoothingDensity d{Family::gaussian, sigma};
  d.validate();
  return d;
}

SmoothingDensity SmoothingDensity::Laplace(double b) {
  SmoothingDensity d{Family::laplace, b};
  d.validate();
  return d;
}

SmoothingDensity SmoothingDensity::Cauchy(double gamma) {
  SmoothingDensity d{Family::cauchy, gamma};
  d.validate();
  return d;
}

void SmoothingDensity::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("smoothing density scale must be > 0");
}

double SmoothingDensity::pdf(double x) const {
  switch (family) {
    case Family::gaussian:
      return kInvSqrt2Pi / scale * std::exp(-0.5 * (x / scale) * (x / scale));
    case Family::laplace:
      return 0.5 / scale * std::exp(-std::abs(x) / scale);
    case Family::cauchy:
      return scale / (std::numbers::pi * (x * x + scale * scale));
  }
  return 0.0;
}

double SmoothingDensity::cdf(double x) const {
  switch (family) {
    case Family::gaussian:
      return normal_cdf(x / scale);
    case Family::laplace:
      return x < 0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
    case Family::cauchy:
      return 0.5 + std::atan(x / scale) / std::numbers::pi;
  }
  return 0.0;
}

double SmoothingDensity::survival(double x) const { return cdf(-x); }  // symmetric families

double SmoothingDensity::sample(PathRng& rng) const {
  switch (family) {
    case Family::gaussian:
      return scale * rng.normal();
    case Family::laplace: {
      const double u = rng.uniform_pos();
      return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
    }
    case Family::cauchy:
      return scale * std::tan(std::numbers::pi * (rng.uniform_pos() - 0.5));
  }
  return 0.0;
}

double SmoothingDensity::grad_l1() const {
  // int |f'| = 2 f(mode) for these symmetric unimodal families.
  return 2.0 * pdf(0.0);
}

std::string SmoothingDensity::family_name() const {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::laplace: return "laplace";
    case Family::cauchy: return "cauchy";
  }
  return "?";
}

PathEnsemble smooth_ensemble(const PathEnsemble& ens, const SmoothingDensity& density,
                             std::uint64_t seed) {
  density.validate();
  if (ens.smoothed)
    throw std::invalid_argument("smooth_ensemble: ensemble is already smoothed");
  PathEnsemble out = ens;
  for (std::size_t j = 0; j < out.n_paths; ++j) {
    PathRng rng(seed, j);
    const double z = density.sample(rng);
    for (auto& v : out.path_mut(j)) v += z;
  }
  out.smoothed = true;
  out.model_tag += "+" + density.family_name() + "(" + std::to_string(density.scale) + ")";
  return out;
}

TvShift tv_shift_check(const SmoothingDensity& density, double delta) {
  density.validate();
  const double g = density.grad_l1();
  if (delta == 0.0) return {0.0, 0.0, 0.0};

  // Integration window. Gaussian and Laplace tails are negligible past 20-50
  // scales; the Cauchy difference tail beyond R contributes at most
  // 2|delta| f(R) ~ 2|delta| scale / (pi R^2), so R is widened until that
  // bound sits below the quadrature tolerance.
  const double s = density.scale;
  const double ad = std::abs(delta);
  double half_width;
  switch (density.family) {
    case SmoothingDensity::Family::gaussian: half_width = 20.0 * s + ad; break;
    case SmoothingDensity::Family::laplace: half_width = 50.0 * s + ad; break;
    case SmoothingDensity::Family::cauchy:
      half_width = std::max(1e3 * s, std::sqrt(2.6e9 * ad * s)) + ad;
      break;
    default: half_width = 20.0 * s + ad;
  }

  const auto integrand = [&](double x) { return std::abs(density.pdf(x + delta) - density.pdf(x)); };
  // The integrand has kinks where f(x+delta) = f(x) (at -delta/2 for these
  // symmetric families) and at the modes x = 0, -delta; split there so the
  // adaptive rule converges on smooth pieces.
  std::vector<double> cuts{-half_width, -delta, -0.5 * delta, 0.0, half_width};
  std::sort(cuts.begin(), cuts.end());
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) lhs += adaptive_simpson(integrand, cuts[i], cuts[i + 1], 2.5e-10);
  return {lhs, ad * g, 2.0 * ad * g};
}

}  // namespace hrd
