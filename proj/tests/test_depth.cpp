#include <doctest.h>

#include <cmath>
#include <vector>

#include "hrd/depth.hpp"
#include "hrd/numeric.hpp"
#include "support.hpp"

using namespace hrd;

namespace {

PathEnsemble constant_paths(const std::vector<double>& levels, std::size_t m) {
  PathEnsemble ens;
  ens.grid = Grid::uniform01(m);
  ens.n_paths = levels.size();
  ens.data.resize(levels.size() * ens.grid.size());
  for (std::size_t j = 0; j < levels.size(); ++j)
    for (auto& v : ens.path_mut(j)) v = levels[j];
  ens.model_tag = "fixture";
  return ens;
}

}  // namespace

TEST_CASE("empirical depth by enumeration") {
  const auto ens = constant_paths({1.0, 2.0, -1.0}, 4);
  const auto h = GridFunction::constant(ens.grid, 0.0);
  const auto d = empirical_depth(ens, h);
  CHECK(d.count_above == 2);
  CHECK(d.count_below == 1);
  CHECK(d.value == doctest::Approx(1.0 / 3.0));
  CHECK(d.n == 3);
  CHECK(d.ci_half_width == doctest::Approx(1.96 * binomial_se(d.value, 3)));
}

TEST_CASE("all paths equal to h have depth one") {
  const auto ens = constant_paths({0.25, 0.25, 0.25, 0.25}, 3);
  const auto d = empirical_depth(ens, GridFunction::constant(ens.grid, 0.25));
  CHECK(d.value == 1.0);
  CHECK(d.count_above == 4);
  CHECK(d.count_below == 4);
  CHECK(d.count_both == 4);
}

TEST_CASE("tied-down BM at m=10 matches the symmetric-walk persistence count") {
  // C(20,10)/4^10 = 184756/1048576.
  const double oracle = 184756.0 / 1048576.0;
  CHECK(sparre_andersen_exact(10) == doctest::Approx(oracle).epsilon(1e-12));
  const std::size_t n = 20000;
  const auto ens = simulate(ProcessModel::BrownianMotion(), n, 10, 424242);
  const auto d = empirical_depth(ens, GridFunction::constant(ens.grid, 0.0));
  CHECK(std::abs(d.value - oracle) <= 3.5 * binomial_se(oracle, n));
}

TEST_CASE("sparre-andersen closed form") {
  CHECK(sparre_andersen_exact(1) == doctest::Approx(0.5).epsilon(1e-14));
  // Independent route: C(2m,m)/4^m = prod_k (m+k)/(4k).
  double direct = 1.0;
  for (int k = 1; k <= 100; ++k) direct *= (100.0 + k) / (4.0 * k);
  CHECK(sparre_andersen_exact(100) == doctest::Approx(direct).epsilon(1e-10));
  CHECK(sparre_andersen_exact(100) == doctest::Approx(0.056348).epsilon(1e-4));
  // Stirling asymptote 1/sqrt(pi m).
  CHECK(sparre_andersen_exact(100) ==
        doctest::Approx(1.0 / std::sqrt(100.0 * 3.14159265358979)).epsilon(0.005));
}

TEST_CASE("subset depth: full grid coincides, single point is marginal") {
  const auto ens = simulate(ProcessModel::BrownianMotion(), 2000, 8, 5);
  const auto h = GridFunction::constant(ens.grid, 0.1);
  const auto full = empirical_depth(ens, h);
  const auto sub = empirical_depth_subset(ens, h, IndexSubset::all(ens.n_values()));
  CHECK(full.count_above == sub.count_above);
  CHECK(full.count_below == sub.count_below);
  CHECK(full.value == sub.value);

  // Smoothed BM at one interior point: marginal symmetry gives 1/2.
  const std::size_t n = 50000;
  const auto sm = simulate(
      ProcessModel::BrownianMotion().with_smoothing(SmoothingDensity::Gaussian(1.0)), n, 16, 7);
  const auto zero = GridFunction::constant(sm.grid, 0.0);
  const auto d1 = empirical_depth_subset(sm, zero, IndexSubset::of({8}, sm.n_values()));
  CHECK(std::abs(d1.value - 0.5) <= 3 * binomial_se(0.5, n));

  CHECK_THROWS_AS(empirical_depth_subset(ens, h, IndexSubset::of({}, 9)),
                  std::invalid_argument);
}

TEST_CASE("subset depth is monotone under subset inclusion") {
  PathRng rng(6, 6);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 4 + static_cast<std::size_t>(rng.uniform() * 5);
    const std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * 40);
    const auto ens = simulate(ProcessModel::BrownianMotion().with_smoothing(
                                  SmoothingDensity::Gaussian(1.0)),
                              n, m, 1000 + rep);
    std::vector<double> hv(ens.n_values());
    for (auto& v : hv) v = rng.uniform() - 0.5;
    const GridFunction h(ens.grid, hv);
    std::vector<std::size_t> small, big;
    for (std::size_t i = 0; i < ens.n_values(); ++i) {
      const double u = rng.uniform();
      if (u < 0.65) {
        big.push_back(i);
        if (u < 0.3) small.push_back(i);
      }
    }
    if (big.empty()) big.push_back(0);
    if (small.empty()) small.push_back(big.front());
    const auto ds = empirical_depth_subset(ens, h, IndexSubset::of(small, ens.n_values()));
    const auto db = empirical_depth_subset(ens, h, IndexSubset::of(big, ens.n_values()));
    CHECK(db.value <= ds.value + 1e-15);
  }
}

TEST_CASE("increment depth") {
  const auto ens = constant_paths({0.5, -1.0, 2.0}, 8);
  const auto h = GridFunction::constant(ens.grid, 0.0);
  const auto d = empirical_increment_depth(ens, h, {{0, 4}, {5, 7}});
  CHECK(d.value == 1.0);  // constant paths: all increments are 0 on both sides

  const std::size_t n = 20000;
  const auto bm = simulate(ProcessModel::BrownianMotion(), n, 64, 17);
  const auto zero = GridFunction::constant(bm.grid, 0.0);
  const auto one = empirical_increment_depth(bm, zero, {{0, 64}});
  CHECK(std::abs(one.value - 0.5) <= 3 * binomial_se(0.5, n));

  const auto four =
      empirical_increment_depth(bm, zero, {{0, 16}, {16, 32}, {32, 48}, {48, 64}});
  CHECK(std::abs(four.value - 1.0 / 16.0) <= 3 * binomial_se(1.0 / 16.0, n));

  CHECK_THROWS_AS(empirical_increment_depth(bm, zero, {{0, 16}, {8, 24}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_increment_depth(bm, zero, {{16, 16}}), std::invalid_argument);
}

TEST_CASE("exact product depth") {
  const std::vector<MarginalSpec> normals(10, MarginalSpec::Gaussian(0, 1));
  const std::vector<double> zeros(10, 0.0);
  const double d = exact_product_depth(normals, zeros);
  CHECK(std::abs(d - std::pow(2.0, -10)) <= 1e-12 * std::pow(2.0, -10));

  std::vector<MarginalSpec> masses;
  std::vector<double> at;
  for (int i = 0; i < 6; ++i) {
    masses.push_back(MarginalSpec::PointMass(0.1 * i));
    at.push_back(0.1 * i);
  }
  CHECK(exact_product_depth(masses, at) == 1.0);

  std::vector<MarginalSpec> mixed(3, MarginalSpec::Gaussian(0, 1));
  for (int i = 0; i < 7; ++i) mixed.push_back(MarginalSpec::PointMass(0.0));
  CHECK(exact_product_depth(mixed, std::vector<double>(10, 0.0)) ==
        doctest::Approx(0.125).epsilon(1e-12));

  CHECK_THROWS_AS(exact_product_depth(normals, {0.0}), std::invalid_argument);
}

TEST_CASE("exact product depth is sign-symmetric for symmetric marginals") {
  std::vector<MarginalSpec> sym{MarginalSpec::Gaussian(0, 1), MarginalSpec::Gaussian(0, 2),
                                MarginalSpec::TwoPoint(1.0, 0.25),
                                MarginalSpec::Uniform(-1, 1), MarginalSpec::TwoPoint(0.5, 0.5)};
  PathRng rng(8, 0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(sym.size());
    for (auto& v : a) v = 2 * (rng.uniform() - 0.5);
    std::vector<double> neg(a);
    for (auto& v : neg) v = -v;
    // Analytically an exact identity; float cdf evaluation costs a few ulps.
    CHECK(exact_product_depth(sym, a) ==
          doctest::Approx(exact_product_depth(sym, neg)).epsilon(1e-13));
  }
}

TEST_CASE("zero-depth verdicts for product laws") {
  // All-continuous coordinates: every term of sum P(Z_t != a_t) is 1.
  const std::vector<MarginalSpec> normals(5, MarginalSpec::Gaussian(0, 1));
  const auto v1 = nasc_verdict(normals, std::vector<double>(5, 0.3), TailModel::Constant(1.0));
  CHECK(v1.kind == ZeroDepthVerdict::Kind::zero_by_divergence);
  REQUIRE(!v1.partial_sums.empty());
  CHECK(v1.partial_sums[0] == doctest::Approx(1.0));
  CHECK(v1.partial_sums[4] == doctest::Approx(5.0));

  // Boundary violation: P(Z >= 2) = 0 for Uniform(0,1) at coordinate 3.
  std::vector<MarginalSpec> margs{MarginalSpec::Gaussian(0, 1), MarginalSpec::Gaussian(0, 1),
                                  MarginalSpec::Uniform(0, 1), MarginalSpec::Gaussian(0, 1)};
  const auto v2 = nasc_verdict(margs, {0, 0, 2.0, 0}, TailModel::None());
  CHECK(v2.kind == ZeroDepthVerdict::Kind::zero_by_boundary);
  CHECK(v2.witness_t == 3);

  // Summable atoms: P(Z_t = a_t) = 1 - 2^-t with symmetric remainder.
  const auto v3 = nasc_verdict({}, {}, TailModel::Geometric(1.0, 0.5));
  CHECK(v3.kind == ZeroDepthVerdict::Kind::positive);
  double oracle = 1.0;
  for (int t = 1; t <= 64; ++t) oracle *= 1.0 - 0.5 * std::pow(0.5, t);
  CHECK(v3.value == doctest::Approx(oracle).epsilon(1e-12));

  // Mixed: explicit atom coordinates plus a summable tail.
  std::vector<MarginalSpec> atoms{
      MarginalSpec::MixtureAtomContinuous(0.0, 0.9, MarginalSpec::Gaussian(0, 1))};
  const auto v4 = nasc_verdict(atoms, {0.0}, TailModel::Power(0.5, 2.0));
  CHECK(v4.kind == ZeroDepthVerdict::Kind::positive);
  CHECK(v4.value > 0.0);

  // Divergent power tail.
  const auto v5 = nasc_verdict({}, {}, TailModel::Power(1.0, 1.0));
  CHECK(v5.kind == ZeroDepthVerdict::Kind::zero_by_divergence);
}

TEST_CASE("population depth oracle") {
  // Poisson(1): paths are nonnegative, so depth = P(no jump by 1) = 1/e.
  const auto h16 = GridFunction::constant(Grid::uniform01(16), 0.0);
  const auto d = population_depth_oracle(ProcessModel::Poisson(1.0), h16, 100000, 99);
  CHECK(d.oracle);
  CHECK(std::abs(d.value - std::exp(-1.0)) <= 3 * binomial_se(std::exp(-1.0), d.n));
  CHECK(d.count_above == d.n);

  // Smoothed BM: reflection principle gives 1/4 in the limit; the grid max
  // undershoots the continuum max, so expect 1/4 plus a small positive bias.
  const auto h256 = GridFunction::constant(Grid::uniform01(256), 0.0);
  const auto sm = population_depth_oracle(
      ProcessModel::BrownianMotion().with_smoothing(SmoothingDensity::Gaussian(1.0)), h256,
      100000, 7);
  CHECK(sm.value == doctest::Approx(0.25).epsilon(0.08));
  CHECK(sm.value > 0.25 - 3 * binomial_se(0.25, sm.n));

  // Product sequences: cross-check against the exact product depth.
  std::vector<MarginalSpec> margs{MarginalSpec::Gaussian(0, 1), MarginalSpec::Gaussian(0.5, 2),
                                  MarginalSpec::Uniform(-1, 1)};
  const std::vector<double> a{0.2, 0.0, -0.3};
  const auto grid = Grid::sequence(3);
  const auto dp = population_depth_oracle(ProcessModel::ProductSequence(margs),
                                          GridFunction(grid, a), 200000, 3);
  const double exact = exact_product_depth(margs, a);
  CHECK(std::abs(dp.value - exact) <= 3 * binomial_se(exact, dp.n));

  CHECK_THROWS_AS(population_depth_oracle(ProcessModel::Poisson(1.0), h16, 1000, 1),
                  std::invalid_argument);
}

TEST_CASE("streamed counts equal materialized counts") {
  const auto model = ProcessModel::SymmetricStable(1.5).with_smoothing(
      SmoothingDensity::Laplace(0.7));
  const auto grid = grid_for(model, 12);
  const auto h = GridFunction::constant(grid, 0.2);
  const auto streamed = streamed_side_counts(model, h, 5000, 31);
  const auto ens = simulate(model, 5000, 12, 31);
  const auto direct = empirical_depth(ens, h);
  CHECK(streamed.above == direct.count_above);
  CHECK(streamed.below == direct.count_below);
  CHECK(streamed.both == direct.count_both);
}

TEST_CASE("unsmoothed stable grid depth is distribution-free") {
  const std::size_t n = 10000, m = 10;
  const double oracle = sparre_andersen_exact(m);
  int salt = 0;
  for (double alpha : {1.0, 1.5, 2.0}) {
    const auto ens = simulate(ProcessModel::SymmetricStable(alpha), n, m, 500 + salt++);
    const auto d = empirical_depth(ens, GridFunction::constant(ens.grid, 0.0));
    CHECK(std::abs(d.value - oracle) <= 3 * binomial_se(oracle, n));
  }
}

TEST_CASE("min-min inequality against exact product oracles") {
  std::vector<MarginalSpec> margs{MarginalSpec::Gaussian(0, 1), MarginalSpec::Uniform(-2, 1),
                                  MarginalSpec::Gaussian(0.3, 0.5),
                                  MarginalSpec::TwoPoint(1.0, 0.3)};
  PathRng rng(12, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const auto ens = sample_product(margs, 500, 9000 + rep);
    std::vector<double> a(margs.size());
    for (auto& v : a) v = 3 * (rng.uniform() - 0.5);
    const GridFunction h(ens.grid, a);
    const auto d = empirical_depth(ens, h);
    double logF = 0, logG = 0;
    for (std::size_t t = 0; t < margs.size(); ++t) {
      const auto cdf = marginal_cdf(margs[t], a[t]);
      logF += std::log(cdf.F);
      logG += std::log(1 - cdf.F_left);
    }
    const double F = std::exp(logF), G = std::exp(logG);
    const double D = std::min(F, G);
    const double Fn = static_cast<double>(d.count_below) / d.n;
    const double Gn = static_cast<double>(d.count_above) / d.n;
    CHECK(std::abs(d.value - D) <= std::abs(Fn - F) + std::abs(Gn - G) + 1e-15);
  }
}

TEST_CASE("bridge refinement never increases depth") {
  auto ens = simulate(ProcessModel::BrownianMotion(), 2000, 4, 44);
  auto h = GridFunction::constant(ens.grid, 0.1);
  auto d = empirical_depth(ens, h);
  for (int level = 0; level < 2; ++level) {
    const auto fine = refine_brownian(ens, 100 + level);
    const auto hf = GridFunction::constant(fine.grid, 0.1);
    const auto df = empirical_depth(fine, hf);
    CHECK(df.count_above <= d.count_above);
    CHECK(df.count_below <= d.count_below);
    CHECK(df.value <= d.value);
    ens = fine;
    d = df;
  }
}

TEST_CASE("margin oracle agrees with indicator counting") {
  const auto model =
      ProcessModel::BrownianMotion().with_smoothing(SmoothingDensity::Gaussian(1.0));
  const auto h = GridFunction::constant(Grid::uniform01(32), 0.25);
  const auto margin = smoothed_margin_oracle(model, h, 200000, 5);
  const auto counted = population_depth_oracle(model, h, 200000, 6);
  const double se = 3 * (binomial_se(counted.value, counted.n) + margin.se_above +
                         margin.se_below);
  CHECK(std::abs(margin.depth() - counted.value) <= se);
  CHECK(margin.joint == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(margin.se_above < binomial_se(margin.above, margin.n_ref));
}
