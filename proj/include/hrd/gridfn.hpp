#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hrd {

// Index set for grid functions. 1D grids are strictly increasing points in
// [0,1]; 2D grids are rectangular lattices with strictly increasing axes.
// Values attached to a 2D grid are laid out axis1-major:
// flat index = i1 * axis2.size() + i2.
struct Grid {
  std::vector<double> axis1;
  std::vector<double> axis2;  // empty for 1D

  bool is_2d() const { return !axis2.empty(); }
  std::size_t size() const { return axis1.size() * (axis2.empty() ? 1 : axis2.size()); }
  double point1d(std::size_t i) const { return axis1[i]; }

  // {0, 1/m, ..., 1}: m steps, m+1 points; the tied-down origin is always on
  // the grid.
  static Grid uniform01(std::size_t m);
  // Same on both axes of [0,1]^2.
  static Grid uniform01_2d(std::size_t m_per_axis);
  // {1/m, 2/m, ..., 1}: index set for length-m sequence models.
  static Grid sequence(std::size_t m);

  void validate() const;
  bool operator==(const Grid&) const = default;
};

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Grid g, std::vector<double> v);

  static GridFunction constant(Grid g, double c);

  std::size_t size() const { return values.size(); }
  const double* data() const { return values.data(); }

  void validate() const;
};

// Sorted distinct positions into a grid's flat index space.
struct IndexSubset {
  std::vector<std::size_t> indices;

  static IndexSubset all(std::size_t grid_size);
  static IndexSubset of(std::vector<std::size_t> idx, std::size_t grid_size);

  std::size_t size() const { return indices.size(); }
  void validate(std::size_t grid_size) const;
};

// Function families for nets / entropy computations. `radius` is the
// sup-norm bound of every family; lipschitz_ball additionally bounds the
// slopes by `lip`, and smooth_ball bounds slope increments by `lip2`
// (uniform 1D grids only).
struct FamilySpec {
  enum class Kind { constants, finite_list, lipschitz_ball, smooth_ball };

  Kind kind = Kind::constants;
  double radius = 1.0;
  double lip = 0.0;
  double lip2 = 0.0;
  Grid grid;
  std::vector<GridFunction> members;  // finite_list only

  static FamilySpec constants(Grid g, double radius);
  static FamilySpec finite_list(std::vector<GridFunction> members);
  static FamilySpec lipschitz_ball(Grid g, double radius, double lip);
  static FamilySpec smooth_ball(Grid g, double radius, double lip, double lip2);

  void validate() const;
  std::string kind_name() const;
};

struct CompareResult {
  bool above;  // x(t) >= h(t) for all t in J (non-strict)
  bool below;  // x(t) <= h(t) for all t in J
};

CompareResult compare(const GridFunction& x, const GridFunction& h, const IndexSubset& J);
double sup_norm(const GridFunction& x);
// min over the full grid of x(t) - h(t); x dominates h iff this is >= 0.
double lower_margin(const GridFunction& x, const GridFunction& h);

// Restriction of h to a coarser grid whose points all appear in h's grid
// (matched within 1e-12); used to evaluate one h across a resolution sweep.
GridFunction restrict_to_grid(const GridFunction& h, const Grid& coarse);

struct EpsilonNet {
  std::vector<GridFunction> centers;
  std::size_t count = 0;
};

// Sup-norm eps-cover of the family. Constants use an interval cover with
// ceil(R/eps) centers; lipschitz balls use the cheaper of a value-lattice
// cover and a branching tube cover; smooth balls use the value-lattice cover
// with a slope-increment constraint. Materialization refuses counts above
// `max_centers`.
EpsilonNet epsilon_net(const FamilySpec& family, double eps,
                       std::size_t max_centers = 1u << 20);

// log of the covering count backing epsilon_net, computable for counts far
// beyond what can be materialized.
double log_covering_count(const FamilySpec& family, double eps);

struct EntropyIntegral {
  double value = 0.0;
  bool divergence_flag = false;
};

// Quadrature of sqrt(log N(eps)) / sqrt(eps) over [eps_min, eps_max]. The
// divergence flag fires when the value gained by halving eps_min fails to
// decay by `growth_factor` relative to the octave above, the signature of an
// integrand behaving like 1/eps or worse.
EntropyIntegral entropy_integral(const FamilySpec& family, double eps_min, double eps_max,
                                 double growth_factor = 1.2);

}  // namespace hrd
