#include "hrd/models.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hrd/numeric.hpp"
#include "hrd/parallel.hpp"

namespace hrd {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

constexpr std::uint64_t kSmoothingSalt = 0x5a6f6f6dull;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

MarginalSpec MarginalSpec::Gaussian(double mu, double sigma) {
  MarginalSpec s;
  s.kind = Kind::gaussian;
  s.mu = mu;
  s.sigma = sigma;
  s.validate();
  return s;
}

MarginalSpec MarginalSpec::PointMass(double x) {
  MarginalSpec s;
  s.kind = Kind::point_mass;
  s.atom = x;
  return s;
}

MarginalSpec MarginalSpec::TwoPoint(double c, double d) {
  MarginalSpec s;
  s.kind = Kind::two_point;
  s.c = c;
  s.d = d;
  s.validate();
  return s;
}

MarginalSpec MarginalSpec::Uniform(double a, double b) {
  MarginalSpec s;
  s.kind = Kind::uniform;
  s.lo = a;
  s.hi = b;
  s.validate();
  return s;
}

MarginalSpec MarginalSpec::MixtureAtomContinuous(double atom, double weight, MarginalSpec cont) {
  MarginalSpec s;
  s.kind = Kind::mixture_atom_continuous;
  s.atom = atom;
  s.atom_weight = weight;
  s.continuous = std::make_shared<MarginalSpec>(std::move(cont));
  s.validate();
  return s;
}

void MarginalSpec::validate() const {
  switch (kind) {
    case Kind::gaussian:
      require(sigma > 0.0, "gaussian marginal needs sigma > 0");
      break;
    case Kind::point_mass:
      break;
    case Kind::two_point:
      require(c > 0.0, "two-point marginal needs c > 0");
      require(d > 0.0 && d <= 0.5, "two-point marginal needs d in (0, 1/2]");
      break;
    case Kind::uniform:
      require(lo < hi, "uniform marginal needs a < b");
      break;
    case Kind::mixture_atom_continuous:
      require(atom_weight >= 0.0 && atom_weight <= 1.0, "mixture weight must be in [0,1]");
      require(continuous != nullptr, "mixture needs a continuous part");
      require(continuous->kind == Kind::gaussian || continuous->kind == Kind::uniform,
              "mixture continuous part must be gaussian or uniform");
      continuous->validate();
      break;
  }
}

std::string MarginalSpec::kind_name() const {
  switch (kind) {
    case Kind::gaussian: return "gaussian";
    case Kind::point_mass: return "point-mass";
    case Kind::two_point: return "two-point";
    case Kind::uniform: return "uniform";
    case Kind::mixture_atom_continuous: return "mixture";
  }
  return "?";
}

MarginalCdf marginal_cdf(const MarginalSpec& spec, double x) {
  switch (spec.kind) {
    case MarginalSpec::Kind::gaussian: {
      const double F = normal_cdf(x, spec.mu, spec.sigma);
      return {F, F};
    }
    case MarginalSpec::Kind::point_mass:
      return {x >= spec.atom ? 1.0 : 0.0, x > spec.atom ? 1.0 : 0.0};
    case MarginalSpec::Kind::two_point: {
      auto mass_below = [&](bool strict) {
        double F = 0.0;
        if (strict ? x > -spec.c : x >= -spec.c) F += spec.d;
        if (strict ? x > 0.0 : x >= 0.0) F += 1.0 - 2.0 * spec.d;
        if (strict ? x > spec.c : x >= spec.c) F += spec.d;
        return F;
      };
      return {mass_below(false), mass_below(true)};
    }
    case MarginalSpec::Kind::uniform: {
      double F;
      if (x < spec.lo)
        F = 0.0;
      else if (x >= spec.hi)
        F = 1.0;
      else
        F = (x - spec.lo) / (spec.hi - spec.lo);
      return {F, F};
    }
    case MarginalSpec::Kind::mixture_atom_continuous: {
      const auto cont = marginal_cdf(*spec.continuous, x);
      const double p = spec.atom_weight;
      const double F = p * (x >= spec.atom ? 1.0 : 0.0) + (1.0 - p) * cont.F;
      const double Fl = p * (x > spec.atom ? 1.0 : 0.0) + (1.0 - p) * cont.F_left;
      return {F, Fl};
    }
  }
  throw std::invalid_argument("marginal_cdf: unknown kind");
}

double sample_marginal(const MarginalSpec& spec, PathRng& rng) {
  switch (spec.kind) {
    case MarginalSpec::Kind::gaussian:
      return spec.mu + spec.sigma * rng.normal();
    case MarginalSpec::Kind::point_mass:
      return spec.atom;
    case MarginalSpec::Kind::two_point: {
      const double u = rng.uniform();
      if (u < spec.d) return -spec.c;
      if (u < 2.0 * spec.d) return spec.c;
      return 0.0;
    }
    case MarginalSpec::Kind::uniform:
      return spec.lo + (spec.hi - spec.lo) * rng.uniform();
    case MarginalSpec::Kind::mixture_atom_continuous:
      if (rng.uniform() < spec.atom_weight) return spec.atom;
      return sample_marginal(*spec.continuous, rng);
  }
  throw std::invalid_argument("sample_marginal: unknown kind");
}

ProcessModel ProcessModel::BrownianMotion() {
  ProcessModel m;
  m.kind = Kind::brownian_motion;
  return m;
}

ProcessModel ProcessModel::SymmetricStable(double alpha) {
  ProcessModel m;
  m.kind = Kind::symmetric_stable;
  m.alpha = alpha;
  m.validate();
  return m;
}

ProcessModel ProcessModel::Poisson(double lambda) {
  ProcessModel m;
  m.kind = Kind::poisson;
  m.lambda = lambda;
  m.validate();
  return m;
}

ProcessModel ProcessModel::CompoundPoisson(double lambda, MarginalSpec jump) {
  ProcessModel m;
  m.kind = Kind::compound_poisson;
  m.lambda = lambda;
  m.jump = std::move(jump);
  m.validate();
  return m;
}

ProcessModel ProcessModel::BrownianSheet() {
  ProcessModel m;
  m.kind = Kind::brownian_sheet;
  return m;
}

ProcessModel ProcessModel::ReflectedBM() {
  ProcessModel m;
  m.kind = Kind::reflected_bm;
  return m;
}

ProcessModel ProcessModel::IntegratedPoisson(double lambda) {
  ProcessModel m;
  m.kind = Kind::integrated_poisson;
  m.lambda = lambda;
  m.validate();
  return m;
}

ProcessModel ProcessModel::ProductSequence(std::vector<MarginalSpec> marginals) {
  ProcessModel m;
  m.kind = Kind::product_sequence;
  m.marginals = std::move(marginals);
  m.validate();
  return m;
}

ProcessModel ProcessModel::with_smoothing(SmoothingDensity density) const {
  ProcessModel m = *this;
  density.validate();
  m.smoothing = density;
  return m;
}

void ProcessModel::validate() const {
  switch (kind) {
    case Kind::symmetric_stable:
      require(alpha > 0.0 && alpha <= 2.0, "stable alpha must be in (0, 2]");
      break;
    case Kind::poisson:
    case Kind::integrated_poisson:
      require(lambda > 0.0, "poisson rate lambda must be > 0");
      break;
    case Kind::compound_poisson:
      require(lambda > 0.0, "poisson rate lambda must be > 0");
      jump.validate();
      break;
    case Kind::product_sequence:
      require(!marginals.empty(), "product sequence needs at least one marginal");
      for (const auto& s : marginals) s.validate();
      break;
    default:
      break;
  }
  if (smoothing) smoothing->validate();
}

std::string ProcessModel::kind_name() const {
  switch (kind) {
    case Kind::brownian_motion: return "bm";
    case Kind::symmetric_stable: return "stable";
    case Kind::poisson: return "poisson";
    case Kind::compound_poisson: return "compound-poisson";
    case Kind::brownian_sheet: return "sheet";
    case Kind::reflected_bm: return "reflected-bm";
    case Kind::integrated_poisson: return "integrated-poisson";
    case Kind::product_sequence: return "product";
  }
  return "?";
}

std::string ProcessModel::tag() const {
  std::string t = kind_name();
  switch (kind) {
    case Kind::symmetric_stable: t += "(alpha=" + fmt(alpha) + ")"; break;
    case Kind::poisson:
    case Kind::integrated_poisson: t += "(lambda=" + fmt(lambda) + ")"; break;
    case Kind::compound_poisson:
      t += "(lambda=" + fmt(lambda) + ",jump=" + jump.kind_name() + ")";
      break;
    case Kind::product_sequence:
      t += "(m=" + std::to_string(marginals.size()) + ")";
      break;
    default: break;
  }
  if (smoothing)
    t += "+" + smoothing->family_name() + "(" + fmt(smoothing->scale) + ")";
  return t;
}

Grid grid_for(const ProcessModel& model, std::size_t m) {
  switch (model.kind) {
    case ProcessModel::Kind::brownian_sheet:
      return Grid::uniform01_2d(m);
    case ProcessModel::Kind::product_sequence:
      require(m == model.marginals.size(),
              "product sequence: m must equal the number of marginals");
      return Grid::sequence(m);
    default:
      return Grid::uniform01(m);
  }
}

namespace {

void fill_poisson_counts(double lambda, const std::vector<double>& t, PathRng& rng,
                         std::span<double> out) {
  double next_arrival = rng.exponential(lambda);
  double count = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    while (next_arrival <= t[i]) {
      count += 1.0;
      next_arrival += rng.exponential(lambda);
    }
    out[i] = count;
  }
}

void fill_unsmoothed(const ProcessModel& model, const Grid& grid, PathRng& rng,
                     std::span<double> out) {
  const auto& t = grid.axis1;
  switch (model.kind) {
    case ProcessModel::Kind::brownian_motion: {
      out[0] = 0.0;
      for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + std::sqrt(t[i] - t[i - 1]) * rng.normal();
      break;
    }
    case ProcessModel::Kind::symmetric_stable: {
      out[0] = 0.0;
      const double inv_alpha = 1.0 / model.alpha;
      for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + std::pow(t[i] - t[i - 1], inv_alpha) * rng.stable(model.alpha);
      break;
    }
    case ProcessModel::Kind::poisson:
      fill_poisson_counts(model.lambda, t, rng, out);
      break;
    case ProcessModel::Kind::compound_poisson: {
      double next_arrival = rng.exponential(model.lambda);
      double total = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        while (next_arrival <= t[i]) {
          total += sample_marginal(model.jump, rng);
          next_arrival += rng.exponential(model.lambda);
        }
        out[i] = total;
      }
      break;
    }
    case ProcessModel::Kind::reflected_bm: {
      out[0] = 0.0;
      for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + std::sqrt(t[i] - t[i - 1]) * rng.normal();
      // max(0, B_t) applied to the finished Brownian path.
      for (auto& v : out) v = std::max(0.0, v);
      break;
    }
    case ProcessModel::Kind::integrated_poisson: {
      // Left Riemann sum of the Poisson sample path.
      std::vector<double> counts(t.size());
      fill_poisson_counts(model.lambda, t, rng, counts);
      out[0] = 0.0;
      for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + counts[i - 1] * (t[i] - t[i - 1]);
      break;
    }
    case ProcessModel::Kind::brownian_sheet: {
      const auto& t2 = grid.axis2;
      const std::size_t n1 = t.size();
      const std::size_t n2 = t2.size();
      // Cell increments are N(0, d1*d2); cumulative sums tie the sheet down
      // along both axes.
      for (std::size_t i2 = 0; i2 < n2; ++i2) out[i2] = 0.0;
      for (std::size_t i1 = 1; i1 < n1; ++i1) {
        out[i1 * n2] = 0.0;
        const double d1 = t[i1] - t[i1 - 1];
        for (std::size_t i2 = 1; i2 < n2; ++i2) {
          const double d2 = t2[i2] - t2[i2 - 1];
          const double cell = std::sqrt(d1 * d2) * rng.normal();
          out[i1 * n2 + i2] =
              out[(i1 - 1) * n2 + i2] + out[i1 * n2 + i2 - 1] - out[(i1 - 1) * n2 + i2 - 1] + cell;
        }
      }
      break;
    }
    case ProcessModel::Kind::product_sequence: {
      for (std::size_t i = 0; i < model.marginals.size(); ++i)
        out[i] = sample_marginal(model.marginals[i], rng);
      break;
    }
  }
}

}  // namespace

void fill_path(const ProcessModel& model, const Grid& grid, std::uint64_t seed,
               std::size_t path_index, std::span<double> out) {
  PathRng rng(seed, path_index);
  fill_unsmoothed(model, grid, rng, out);
  if (model.smoothing) {
    PathRng zrng(mix_seed(seed, kSmoothingSalt), path_index);
    const double z = model.smoothing->sample(zrng);
    for (auto& v : out) v += z;
  }
}

PathEnsemble simulate(const ProcessModel& model, std::size_t n, std::size_t m,
                      std::uint64_t seed, const SimulateOptions& opts) {
  model.validate();
  require(n >= 1, "simulate: n must be >= 1");
  Grid grid = grid_for(model, m);
  const std::size_t values = grid.size();
  if (n * values * sizeof(double) > opts.max_bytes)
    throw std::invalid_argument("simulate: ensemble exceeds the configured memory cap");

  PathEnsemble ens;
  ens.grid = std::move(grid);
  ens.n_paths = n;
  ens.data.resize(n * values);
  ens.model_tag = model.tag();
  ens.seed = seed;
  ens.smoothed = model.smoothing.has_value();

  parallel_for(n, opts.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      fill_path(model, ens.grid, seed, j, ens.path_mut(j));
  });
  return ens;
}

PathEnsemble sample_product(const std::vector<MarginalSpec>& marginals, std::size_t n,
                            std::uint64_t seed, const SimulateOptions& opts) {
  return simulate(ProcessModel::ProductSequence(marginals), n, marginals.size(), seed, opts);
}

PathEnsemble refine_brownian(const PathEnsemble& ens, std::uint64_t seed) {
  require(!ens.smoothed, "refine_brownian: expects an unsmoothed ensemble");
  require(!ens.grid.is_2d(), "refine_brownian: 1D ensembles only");
  const auto& t = ens.grid.axis1;
  const std::size_t m_old = t.size() - 1;

  Grid fine;
  fine.axis1.resize(2 * m_old + 1);
  for (std::size_t i = 0; i < m_old; ++i) {
    fine.axis1[2 * i] = t[i];
    fine.axis1[2 * i + 1] = 0.5 * (t[i] + t[i + 1]);
  }
  fine.axis1.back() = t.back();

  PathEnsemble out;
  out.grid = std::move(fine);
  out.n_paths = ens.n_paths;
  out.data.resize(ens.n_paths * out.grid.size());
  out.model_tag = ens.model_tag + "+bridge";
  out.seed = ens.seed;
  out.smoothed = false;

  for (std::size_t j = 0; j < ens.n_paths; ++j) {
    PathRng rng(seed, j);
    const auto src = ens.path(j);
    auto dst = out.path_mut(j);
    for (std::size_t i = 0; i < m_old; ++i) {
      const double gap = t[i + 1] - t[i];
      dst[2 * i] = src[i];
      // Brownian bridge midpoint: mean of the endpoints, variance gap/4.
      dst[2 * i + 1] = 0.5 * (src[i] + src[i + 1]) + 0.5 * std::sqrt(gap) * rng.normal();
    }
    dst[2 * m_old] = src[m_old];
  }
  return out;
}

}  // namespace hrd
