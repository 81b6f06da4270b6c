#include "hrd/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hrd/kernels.hpp"
#include "hrd/numeric.hpp"
#include "hrd/parallel.hpp"

namespace hrd {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

// Fixed-size blocks keep parallel reductions independent of the thread
// count: per-block partials are merged in block order.
constexpr std::size_t kBlock = 1024;

DepthEstimate finish_estimate(SideCounts counts, std::size_t n, std::size_t grid_size) {
  DepthEstimate d;
  d.count_above = counts.above;
  d.count_below = counts.below;
  d.count_both = counts.both;
  d.n = n;
  d.value = static_cast<double>(std::min(counts.above, counts.below)) / static_cast<double>(n);
  d.ci_half_width = binomial_ci_half_width(d.value, n, kDefaultZ);
  d.grid_size = grid_size;
  return d;
}

template <typename PathCheck>
SideCounts blocked_side_counts(std::size_t n, unsigned jobs, PathCheck&& check) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<SideCounts> partial(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      SideCounts local;
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t j = b * kBlock; j < end; ++j) {
        const auto side = check(j);
        local.above += side.above;
        local.below += side.below;
        local.both += side.above && side.below;
      }
      partial[b] = local;
    }
  });
  SideCounts total;
  for (const auto& p : partial) {
    total.above += p.above;
    total.below += p.below;
    total.both += p.both;
  }
  return total;
}

}  // namespace

DepthEstimate empirical_depth(const PathEnsemble& ens, const GridFunction& h, unsigned jobs) {
  require(ens.grid == h.grid, "empirical_depth: ensemble and h use different grids");
  const std::size_t m = ens.n_values();
  const auto counts = blocked_side_counts(ens.n_paths, jobs, [&](std::size_t j) {
    return kernels::side_compare(ens.path(j).data(), h.data(), m);
  });
  DepthEstimate d = finish_estimate(counts, ens.n_paths, m);
  d.seed = ens.seed;
  d.model_tag = ens.model_tag;
  return d;
}

DepthEstimate empirical_depth_subset(const PathEnsemble& ens, const GridFunction& h,
                                     const IndexSubset& J, unsigned jobs) {
  require(ens.grid == h.grid, "empirical_depth_subset: grid mismatch");
  J.validate(ens.n_values());
  const auto& idx = J.indices;
  const auto counts = blocked_side_counts(ens.n_paths, jobs, [&](std::size_t j) {
    const double* x = ens.path(j).data();
    bool above = true, below = true;
    for (std::size_t i : idx) {
      above = above && x[i] >= h.values[i];
      below = below && x[i] <= h.values[i];
      if (!above && !below) break;
    }
    return kernels::SidePair{above, below};
  });
  DepthEstimate d = finish_estimate(counts, ens.n_paths, ens.n_values());
  d.subset = idx;
  d.seed = ens.seed;
  d.model_tag = ens.model_tag;
  return d;
}

DepthEstimate empirical_increment_depth(
    const PathEnsemble& ens, const GridFunction& h,
    const std::vector<std::pair<std::size_t, std::size_t>>& intervals, unsigned jobs) {
  require(ens.grid == h.grid, "empirical_increment_depth: grid mismatch");
  require(!ens.grid.is_2d(), "empirical_increment_depth: 1D grids only");
  require(!intervals.empty(), "empirical_increment_depth: need at least one interval");
  auto sorted = intervals;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = ens.n_values();
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    require(sorted[k].first < sorted[k].second && sorted[k].second < m,
            "empirical_increment_depth: intervals must be index pairs u < v on the grid");
    if (k > 0)
      require(sorted[k].first >= sorted[k - 1].second,
              "empirical_increment_depth: intervals overlap");
  }

  std::vector<double> hinc(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k)
    hinc[k] = h.values[sorted[k].second] - h.values[sorted[k].first];

  const auto counts = blocked_side_counts(ens.n_paths, jobs, [&](std::size_t j) {
    const double* x = ens.path(j).data();
    bool above = true, below = true;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const double xi = x[sorted[k].second] - x[sorted[k].first];
      above = above && xi >= hinc[k];
      below = below && xi <= hinc[k];
      if (!above && !below) break;
    }
    return kernels::SidePair{above, below};
  });
  DepthEstimate d = finish_estimate(counts, ens.n_paths, m);
  d.seed = ens.seed;
  d.model_tag = ens.model_tag;
  return d;
}

double exact_product_depth(const std::vector<MarginalSpec>& marginals,
                           const std::vector<double>& a) {
  require(marginals.size() == a.size(), "exact_product_depth: length mismatch");
  double log_below = 0.0;  // log prod F_t(a_t)
  double log_above = 0.0;  // log prod (1 - F_t^-(a_t))
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto cdf = marginal_cdf(marginals[t], a[t]);
    log_below += std::log(cdf.F);
    log_above += std::log(1.0 - cdf.F_left);
    if (log_below == -std::numeric_limits<double>::infinity() &&
        log_above == -std::numeric_limits<double>::infinity())
      return 0.0;
  }
  return std::exp(std::min(log_below, log_above));
}

TailModel TailModel::None() { return {}; }

TailModel TailModel::Constant(double c) {
  TailModel t;
  t.kind = Kind::constant;
  t.c = c;
  t.validate();
  return t;
}

TailModel TailModel::Geometric(double c, double rho) {
  TailModel t;
  t.kind = Kind::geometric;
  t.c = c;
  t.rho = rho;
  t.validate();
  return t;
}

TailModel TailModel::Power(double c, double s) {
  TailModel t;
  t.kind = Kind::power;
  t.c = c;
  t.s = s;
  t.validate();
  return t;
}

void TailModel::validate() const {
  switch (kind) {
    case Kind::none:
      break;
    case Kind::constant:
      require(c >= 0.0 && c <= 1.0, "tail model: constant probability must be in [0,1]");
      break;
    case Kind::geometric:
      require(c >= 0.0 && rho > 0.0 && rho < 1.0, "tail model: need c >= 0 and rho in (0,1)");
      break;
    case Kind::power:
      require(c >= 0.0 && s > 0.0, "tail model: need c >= 0 and s > 0");
      break;
  }
}

bool TailModel::summable() const {
  switch (kind) {
    case Kind::none: return true;
    case Kind::constant: return c == 0.0;
    case Kind::geometric: return true;
    case Kind::power: return c == 0.0 || s > 1.0;
  }
  return false;
}

namespace {

double tail_probability(const TailModel& tail, std::size_t t) {
  switch (tail.kind) {
    case TailModel::Kind::none: return 0.0;
    case TailModel::Kind::constant: return tail.c;
    case TailModel::Kind::geometric: return std::min(1.0, tail.c * std::pow(tail.rho, static_cast<double>(t)));
    case TailModel::Kind::power: return std::min(1.0, tail.c * std::pow(static_cast<double>(t), -tail.s));
  }
  return 0.0;
}

// log prod_t (1 - p_t / 2) over the (summable) tail, summed to convergence.
double tail_log_factor(const TailModel& tail) {
  double acc = 0.0;
  for (std::size_t t = 1; t <= 100000000; ++t) {
    const double p = tail_probability(tail, t);
    if (p >= 2.0) return -std::numeric_limits<double>::infinity();
    acc += std::log1p(-0.5 * p);
    if (p < 1e-18) break;
  }
  return acc;
}

}  // namespace

ZeroDepthVerdict nasc_verdict(const std::vector<MarginalSpec>& marginals,
                              const std::vector<double>& a, const TailModel& tail) {
  require(marginals.size() == a.size(), "nasc_verdict: length mismatch");
  tail.validate();

  ZeroDepthVerdict verdict;

  // Condition (i): a coordinate with no mass on one side of a_t.
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto cdf = marginal_cdf(marginals[t], a[t]);
    const double p_le = cdf.F;
    const double p_ge = 1.0 - cdf.F_left;
    if (p_le == 0.0 || p_ge == 0.0) {
      verdict.kind = ZeroDepthVerdict::Kind::zero_by_boundary;
      verdict.witness_t = t + 1;
      return verdict;
    }
  }

  // Condition (ii): sum of P(Z_t != a_t).
  std::vector<double> partials;
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto cdf = marginal_cdf(marginals[t], a[t]);
    sum += 1.0 - (cdf.F - cdf.F_left);
    if (partials.size() < 16) partials.push_back(sum);
  }
  bool divergent = !tail.summable();
  if (!divergent && tail.kind != TailModel::Kind::none) {
    for (std::size_t t = 1; t <= 64; ++t) {
      sum += tail_probability(tail, t);
      if (partials.size() < 16) partials.push_back(sum);
    }
  }
  if (divergent) {
    for (std::size_t t = 1; partials.size() < 16; ++t) {
      sum += tail_probability(tail, t);
      partials.push_back(sum);
    }
    verdict.kind = ZeroDepthVerdict::Kind::zero_by_divergence;
    verdict.partial_sums = std::move(partials);
    return verdict;
  }

  // Summable: depth is the strictly positive product, tail handled with the
  // symmetric-remainder split.
  double log_below = 0.0, log_above = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto cdf = marginal_cdf(marginals[t], a[t]);
    log_below += std::log(cdf.F);
    log_above += std::log(1.0 - cdf.F_left);
  }
  const double log_tail = tail_log_factor(tail);
  verdict.kind = ZeroDepthVerdict::Kind::positive;
  verdict.partial_sums = std::move(partials);
  verdict.value = std::exp(std::min(log_below, log_above) + log_tail);
  return verdict;
}

namespace {

std::size_t infer_resolution(const ProcessModel& model, const Grid& grid) {
  std::size_t m;
  switch (model.kind) {
    case ProcessModel::Kind::brownian_sheet: m = grid.axis1.size() - 1; break;
    case ProcessModel::Kind::product_sequence: m = grid.axis1.size(); break;
    default: m = grid.axis1.size() - 1; break;
  }
  require(grid_for(model, m) == grid, "h's grid does not match the model's grid layout");
  return m;
}

}  // namespace

SideCounts streamed_side_counts(const ProcessModel& model, const GridFunction& h, std::size_t n,
                                std::uint64_t seed, unsigned jobs) {
  model.validate();
  infer_resolution(model, h.grid);
  const std::size_t m = h.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<SideCounts> partial(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b0, std::size_t b1) {
    std::vector<double> buf(m);
    for (std::size_t b = b0; b < b1; ++b) {
      SideCounts local;
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t j = b * kBlock; j < end; ++j) {
        fill_path(model, h.grid, seed, j, buf);
        const auto side = kernels::side_compare(buf.data(), h.data(), m);
        local.above += side.above;
        local.below += side.below;
        local.both += side.above && side.below;
      }
      partial[b] = local;
    }
  });
  SideCounts total;
  for (const auto& p : partial) {
    total.above += p.above;
    total.below += p.below;
    total.both += p.both;
  }
  return total;
}

DepthEstimate population_depth_oracle(const ProcessModel& model, const GridFunction& h,
                                      std::size_t n_ref, std::uint64_t seed, unsigned jobs) {
  require(n_ref >= 100000, "population_depth_oracle: n_ref must be at least 1e5");
  const auto counts = streamed_side_counts(model, h, n_ref, seed, jobs);
  DepthEstimate d = finish_estimate(counts, n_ref, h.size());
  d.seed = seed;
  d.model_tag = model.tag();
  d.oracle = true;
  return d;
}

double sparre_andersen_exact(std::size_t m) {
  require(m >= 1, "sparre_andersen_exact: m must be >= 1");
  const double dm = static_cast<double>(m);
  return std::exp(std::lgamma(2.0 * dm + 1.0) - 2.0 * std::lgamma(dm + 1.0) -
                  dm * std::log(4.0));
}

MarginOracle smoothed_margin_oracle(const ProcessModel& model, const GridFunction& h,
                                    std::size_t n_ref, std::uint64_t seed, unsigned jobs) {
  model.validate();
  require(model.smoothing.has_value(), "smoothed_margin_oracle: model must carry a smoothing density");
  infer_resolution(model, h.grid);
  const SmoothingDensity density = *model.smoothing;
  ProcessModel base = model;
  base.smoothing.reset();

  const std::size_t m = h.size();
  const std::size_t blocks = (n_ref + kBlock - 1) / kBlock;
  struct Partial {
    double sa = 0, sb = 0, sa2 = 0, sb2 = 0, joint = 0;
  };
  std::vector<Partial> partial(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b0, std::size_t b1) {
    std::vector<double> buf(m);
    for (std::size_t b = b0; b < b1; ++b) {
      Partial local;
      const std::size_t end = std::min(n_ref, (b + 1) * kBlock);
      for (std::size_t j = b * kBlock; j < end; ++j) {
        fill_path(base, h.grid, seed, j, buf);
        // X = Y + Z >= h everywhere iff Z >= max(h - Y); <= h iff Z <= min(h - Y).
        const auto mm = kernels::minmax_diff(buf.data(), h.data(), m);
        const double upper = -mm.lo;  // max_t (h - Y)
        const double lower = -mm.hi;  // min_t (h - Y)
        const double pa = density.survival(upper);
        const double pb = density.cdf(lower);
        local.sa += pa;
        local.sb += pb;
        local.sa2 += pa * pa;
        local.sb2 += pb * pb;
        local.joint += std::max(0.0, density.cdf(lower) - density.cdf(upper));
      }
      partial[b] = local;
    }
  });
  Partial total;
  for (const auto& p : partial) {
    total.sa += p.sa;
    total.sb += p.sb;
    total.sa2 += p.sa2;
    total.sb2 += p.sb2;
    total.joint += p.joint;
  }
  const double dn = static_cast<double>(n_ref);
  MarginOracle out;
  out.n_ref = n_ref;
  out.above = total.sa / dn;
  out.below = total.sb / dn;
  out.joint = total.joint / dn;
  out.se_above = std::sqrt(std::max(0.0, total.sa2 / dn - out.above * out.above) / dn);
  out.se_below = std::sqrt(std::max(0.0, total.sb2 / dn - out.below * out.below) / dn);
  return out;
}

}  // namespace hrd
