#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrd/gridfn.hpp"
#include "hrd/rng.hpp"
#include "hrd/smoothing.hpp"

namespace hrd {

// One-dimensional marginal distributions used by product-sequence models and
// compound Poisson jumps.
struct MarginalSpec {
  enum class Kind { gaussian, point_mass, two_point, uniform, mixture_atom_continuous };

  Kind kind = Kind::gaussian;
  double mu = 0.0, sigma = 1.0;  // gaussian
  double atom = 0.0;             // point_mass location / mixture atom
  double c = 1.0, d = 0.5;       // two_point: P(Z = +-c) = d, P(Z = 0) = 1 - 2d
  double lo = 0.0, hi = 1.0;     // uniform support
  double atom_weight = 0.0;      // mixture atom probability
  std::shared_ptr<MarginalSpec> continuous;  // mixture continuous part

  static MarginalSpec Gaussian(double mu, double sigma);
  static MarginalSpec PointMass(double x);
  static MarginalSpec TwoPoint(double c, double d);
  static MarginalSpec Uniform(double a, double b);
  static MarginalSpec MixtureAtomContinuous(double atom, double weight, MarginalSpec cont);

  void validate() const;
  std::string kind_name() const;
};

struct MarginalCdf {
  double F;       // P(Z <= x)
  double F_left;  // P(Z < x)
};

MarginalCdf marginal_cdf(const MarginalSpec& spec, double x);
double sample_marginal(const MarginalSpec& spec, PathRng& rng);

struct ProcessModel {
  enum class Kind {
    brownian_motion,
    symmetric_stable,
    poisson,
    compound_poisson,
    brownian_sheet,
    reflected_bm,
    integrated_poisson,
    product_sequence
  };

  Kind kind = Kind::brownian_motion;
  double alpha = 2.0;   // symmetric_stable, in (0, 2]
  double lambda = 1.0;  // jump rate of the Poisson variants
  MarginalSpec jump;    // compound_poisson
  std::vector<MarginalSpec> marginals;          // product_sequence
  std::optional<SmoothingDensity> smoothing;    // applied per path when set

  static ProcessModel BrownianMotion();
  static ProcessModel SymmetricStable(double alpha);
  static ProcessModel Poisson(double lambda);
  static ProcessModel CompoundPoisson(double lambda, MarginalSpec jump);
  static ProcessModel BrownianSheet();
  static ProcessModel ReflectedBM();
  static ProcessModel IntegratedPoisson(double lambda);
  static ProcessModel ProductSequence(std::vector<MarginalSpec> marginals);

  ProcessModel with_smoothing(SmoothingDensity density) const;
  void validate() const;
  std::string kind_name() const;
  // Compact human/machine-readable descriptor (parameters + smoothing).
  std::string tag() const;
};

struct PathEnsemble {
  Grid grid;
  std::size_t n_paths = 0;
  std::vector<double> data;  // n_paths x grid.size(), row-major, path-contiguous
  std::string model_tag;
  std::uint64_t seed = 0;
  bool smoothed = false;

  std::size_t n_values() const { return grid.size(); }
  std::span<const double> path(std::size_t j) const {
    return {data.data() + j * n_values(), n_values()};
  }
  std::span<double> path_mut(std::size_t j) { return {data.data() + j * n_values(), n_values()}; }
};

struct SimulateOptions {
  std::size_t max_bytes = std::size_t{2} << 30;  // ensemble memory cap
  unsigned jobs = 0;                             // 0: HRDEPTH_JOBS or core count
};

// Grid a model lives on at resolution m: {0,1/m,...,1} for the 1D processes,
// the (m+1)^2 lattice for the sheet, {1/m,...,1} for product sequences
// (which require m == marginals.size()).
Grid grid_for(const ProcessModel& model, std::size_t m);

// Deterministic single-path generation: path j of (model, seed) is a pure
// function of (model, grid, seed, j). Materialized and streamed consumers
// therefore see bit-identical paths.
void fill_path(const ProcessModel& model, const Grid& grid, std::uint64_t seed,
               std::size_t path_index, std::span<double> out);

PathEnsemble simulate(const ProcessModel& model, std::size_t n, std::size_t m,
                      std::uint64_t seed, const SimulateOptions& opts = {});

// Coordinate t of each path drawn from marginals[t], independently.
PathEnsemble sample_product(const std::vector<MarginalSpec>& marginals, std::size_t n,
                            std::uint64_t seed, const SimulateOptions& opts = {});

// Doubles the resolution of an unsmoothed Brownian ensemble by sampling grid
// midpoints from the Brownian bridge between existing points. Existing values
// are kept exactly, so domination constraints only tighten.
PathEnsemble refine_brownian(const PathEnsemble& ens, std::uint64_t seed);

}  // namespace hrd
