#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hrd/gridfn.hpp"
#include "hrd/models.hpp"

namespace hrd {

struct DepthEstimate {
  double value = 0.0;  // min(count_above, count_below) / n
  std::size_t count_above = 0;
  std::size_t count_below = 0;
  std::size_t count_both = 0;  // paths on both sides (pointwise ties with h)
  std::size_t n = 0;
  double ci_half_width = 0.0;  // normal-approx binomial CI of the smaller count
  std::size_t grid_size = 0;
  std::optional<std::vector<std::size_t>> subset;
  std::uint64_t seed = 0;
  std::string model_tag;
  bool oracle = false;
};

inline constexpr double kDefaultZ = 1.96;

DepthEstimate empirical_depth(const PathEnsemble& ens, const GridFunction& h, unsigned jobs = 0);

DepthEstimate empirical_depth_subset(const PathEnsemble& ens, const GridFunction& h,
                                     const IndexSubset& J, unsigned jobs = 0);

// Depth of increments over pairwise-disjoint grid intervals: path increments
// X(v) - X(u) compared against h(v) - h(u) on every interval.
DepthEstimate empirical_increment_depth(const PathEnsemble& ens, const GridFunction& h,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& intervals,
                                        unsigned jobs = 0);

// Exact half-region depth of the sequence a under an independent-coordinate
// product law: min( prod F_t(a_t), prod (1 - F_t^-(a_t)) ), evaluated in log
// space so thousands of coordinates do not underflow.
double exact_product_depth(const std::vector<MarginalSpec>& marginals,
                           const std::vector<double>& a);

// Tail description of P(Z_t != a_t) for coordinates beyond the explicit
// marginal list. The off-atom mass is assumed to split evenly between the
// two sides (symmetric remainder).
struct TailModel {
  enum class Kind { none, constant, geometric, power };
  Kind kind = Kind::none;
  double c = 0.0;    // constant value / prefactor
  double rho = 0.5;  // geometric ratio, in (0,1)
  double s = 2.0;    // power exponent: p_t = min(1, c * t^-s)

  static TailModel None();
  static TailModel Constant(double c);
  static TailModel Geometric(double c, double rho);
  static TailModel Power(double c, double s);
  void validate() const;
  bool summable() const;
};

struct ZeroDepthVerdict {
  enum class Kind { zero_by_boundary, zero_by_divergence, positive };
  Kind kind = Kind::positive;
  std::size_t witness_t = 0;         // boundary case: offending coordinate, t = 1, 2, ...
  std::vector<double> partial_sums;  // divergence case: leading partial sums
  double value = 0.0;                // positive case: exact depth
};

// Necessary-and-sufficient zero-depth test for product laws: zero iff some
// coordinate puts no mass on one side of a_t, or the non-atom probabilities
// sum to infinity; otherwise the depth is the strictly positive product.
ZeroDepthVerdict nasc_verdict(const std::vector<MarginalSpec>& marginals,
                              const std::vector<double>& a, const TailModel& tail);

// High-precision Monte Carlo reference for a population depth: empirical
// depth over a fresh streamed ensemble of n_ref paths. h's grid must be
// grid_for(model, m) for some m.
DepthEstimate population_depth_oracle(const ProcessModel& model, const GridFunction& h,
                                      std::size_t n_ref, std::uint64_t seed, unsigned jobs = 0);

// P(walk of m symmetric continuous i.i.d. increments stays >= 0) =
// C(2m, m) / 4^m; the exact grid-depth oracle for tied-down processes.
double sparre_andersen_exact(std::size_t m);

// --- oracle helpers -------------------------------------------------------

// Side counts of a streamed ensemble against one h (never materializes the
// paths). Identical to counting over simulate(model, n, m, seed) since paths
// are pure functions of (model, seed, index).
struct SideCounts {
  std::size_t above = 0;
  std::size_t below = 0;
  std::size_t both = 0;
};

SideCounts streamed_side_counts(const ProcessModel& model, const GridFunction& h, std::size_t n,
                                std::uint64_t seed, unsigned jobs = 0);

// Population depth of a smoothed model by conditioning on the unsmoothed
// paths Y: P(X >= h everywhere) = E[ P(Z >= max_t(h - Y)) ] and
// P(X <= h everywhere) = E[ P(Z <= min_t(h - Y)) ]. Exact in Z, so the
// variance is far below indicator counting at the same n_ref.
struct MarginOracle {
  double above = 0.0, below = 0.0, joint = 0.0;
  double se_above = 0.0, se_below = 0.0;
  std::size_t n_ref = 0;
  double depth() const { return std::min(above, below); }
};

MarginOracle smoothed_margin_oracle(const ProcessModel& model, const GridFunction& h,
                                    std::size_t n_ref, std::uint64_t seed, unsigned jobs = 0);

}  // namespace hrd
