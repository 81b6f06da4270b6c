#include "hrd/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hrd/kernels.hpp"

namespace hrd {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

void check_axis(const std::vector<double>& axis, const char* name) {
  require(!axis.empty(), "grid axis must be non-empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    require(std::isfinite(axis[i]) && axis[i] >= 0.0 && axis[i] <= 1.0,
            "grid points must lie in [0,1]");
    if (i > 0) require(axis[i] > axis[i - 1], name);
  }
}

}  // namespace

Grid Grid::uniform01(std::size_t m) {
  require(m >= 1, "grid resolution m must be >= 1");
  Grid g;
  g.axis1.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) g.axis1[i] = static_cast<double>(i) / static_cast<double>(m);
  return g;
}

Grid Grid::uniform01_2d(std::size_t m_per_axis) {
  Grid g = uniform01(m_per_axis);
  g.axis2 = g.axis1;
  return g;
}

Grid Grid::sequence(std::size_t m) {
  require(m >= 1, "sequence length m must be >= 1");
  Grid g;
  g.axis1.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    g.axis1[i] = static_cast<double>(i + 1) / static_cast<double>(m);
  return g;
}

void Grid::validate() const {
  check_axis(axis1, "grid axis1 must be strictly increasing");
  if (!axis2.empty()) check_axis(axis2, "grid axis2 must be strictly increasing");
}

GridFunction::GridFunction(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  validate();
}

GridFunction GridFunction::constant(Grid g, double c) {
  const std::size_t n = g.size();
  return GridFunction(std::move(g), std::vector<double>(n, c));
}

void GridFunction::validate() const {
  grid.validate();
  require(values.size() == grid.size(), "values.length must equal grid size");
  for (double v : values) require(std::isfinite(v), "grid function values must be finite");
}

IndexSubset IndexSubset::all(std::size_t grid_size) {
  IndexSubset J;
  J.indices.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) J.indices[i] = i;
  return J;
}

IndexSubset IndexSubset::of(std::vector<std::size_t> idx, std::size_t grid_size) {
  IndexSubset J;
  J.indices = std::move(idx);
  std::sort(J.indices.begin(), J.indices.end());
  J.validate(grid_size);
  return J;
}

void IndexSubset::validate(std::size_t grid_size) const {
  require(!indices.empty(), "index subset must be non-empty");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < grid_size, "index subset out of grid bounds");
    if (i > 0) require(indices[i] > indices[i - 1], "index subset must be sorted and distinct");
  }
}

FamilySpec FamilySpec::constants(Grid g, double radius) {
  FamilySpec f;
  f.kind = Kind::constants;
  f.radius = radius;
  f.grid = std::move(g);
  f.validate();
  return f;
}

FamilySpec FamilySpec::finite_list(std::vector<GridFunction> members) {
  FamilySpec f;
  f.kind = Kind::finite_list;
  f.members = std::move(members);
  require(!f.members.empty(), "finite-list family must be non-empty");
  f.grid = f.members.front().grid;
  f.radius = 0.0;
  for (const auto& m : f.members) f.radius = std::max(f.radius, sup_norm(m));
  if (f.radius == 0.0) f.radius = 1.0;
  f.validate();
  return f;
}

FamilySpec FamilySpec::lipschitz_ball(Grid g, double radius, double lip) {
  FamilySpec f;
  f.kind = Kind::lipschitz_ball;
  f.radius = radius;
  f.lip = lip;
  f.grid = std::move(g);
  f.validate();
  return f;
}

FamilySpec FamilySpec::smooth_ball(Grid g, double radius, double lip, double lip2) {
  FamilySpec f;
  f.kind = Kind::smooth_ball;
  f.radius = radius;
  f.lip = lip;
  f.lip2 = lip2;
  f.grid = std::move(g);
  f.validate();
  return f;
}

void FamilySpec::validate() const {
  require(radius > 0.0, "family radius R must be > 0");
  require(lip >= 0.0 && lip2 >= 0.0, "Lipschitz constants must be >= 0");
  grid.validate();
  if (kind == Kind::finite_list) {
    require(!members.empty(), "finite-list family must be non-empty");
    for (const auto& m : members)
      require(m.grid == grid, "finite-list members must share one grid");
  }
  if (kind == Kind::lipschitz_ball || kind == Kind::smooth_ball)
    require(!grid.is_2d(), "lipschitz/smooth families are supported on 1D grids only");
  if (kind == Kind::smooth_ball) {
    const auto& t = grid.axis1;
    require(t.size() >= 2, "smooth-ball grid needs at least 2 points");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i + 1 < t.size(); ++i)
      require(std::abs((t[i + 1] - t[i]) - dt) <= 1e-9 * dt,
              "smooth-ball families require a uniform grid");
  }
}

std::string FamilySpec::kind_name() const {
  switch (kind) {
    case Kind::constants: return "constants";
    case Kind::finite_list: return "finite-list";
    case Kind::lipschitz_ball: return "lipschitz-ball";
    case Kind::smooth_ball: return "smooth-ball";
  }
  return "?";
}

CompareResult compare(const GridFunction& x, const GridFunction& h, const IndexSubset& J) {
  require(x.grid == h.grid, "compare: grid mismatch");
  J.validate(x.size());
  if (J.size() == x.size()) {
    const auto r = kernels::side_compare(x.data(), h.data(), x.size());
    return {r.above, r.below};
  }
  bool above = true, below = true;
  for (std::size_t idx : J.indices) {
    above = above && x.values[idx] >= h.values[idx];
    below = below && x.values[idx] <= h.values[idx];
    if (!above && !below) break;
  }
  return {above, below};
}

double sup_norm(const GridFunction& x) { return kernels::max_abs(x.data(), x.size()); }

double lower_margin(const GridFunction& x, const GridFunction& h) {
  require(x.grid == h.grid, "lower_margin: grid mismatch");
  return kernels::min_diff(x.data(), h.data(), x.size());
}

namespace {

std::vector<std::size_t> match_axis(const std::vector<double>& fine,
                                    const std::vector<double>& coarse) {
  std::vector<std::size_t> map(coarse.size());
  std::size_t i = 0;
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    while (i < fine.size() && fine[i] < coarse[c] - 1e-12) ++i;
    require(i < fine.size() && std::abs(fine[i] - coarse[c]) <= 1e-12,
            "restrict_to_grid: coarse grid point missing from h's grid");
    map[c] = i;
  }
  return map;
}

}  // namespace

GridFunction restrict_to_grid(const GridFunction& h, const Grid& coarse) {
  coarse.validate();
  require(h.grid.is_2d() == coarse.is_2d(), "restrict_to_grid: dimensionality mismatch");
  const auto m1 = match_axis(h.grid.axis1, coarse.axis1);
  std::vector<double> values;
  if (!coarse.is_2d()) {
    values.reserve(m1.size());
    for (std::size_t i : m1) values.push_back(h.values[i]);
  } else {
    const auto m2 = match_axis(h.grid.axis2, coarse.axis2);
    const std::size_t stride = h.grid.axis2.size();
    values.reserve(m1.size() * m2.size());
    for (std::size_t i : m1)
      for (std::size_t j : m2) values.push_back(h.values[i * stride + j]);
  }
  return GridFunction(coarse, std::move(values));
}

// ---------------------------------------------------------------------------
// Covering machinery.
//
// Conventions shared by the constructions below, for a family of sup-norm
// radius R and target eps:
//   * interval cover of [-R, R]: k = ceil(R/eps) centers at -R + (2i+1) R/k,
//     each within R/k <= eps of every point it covers;
//   * value-lattice cover: the same k levels per coordinate, with lattice
//     spacing s = 2R/k <= 2 eps; a family member quantizes coordinatewise to
//     within s/2 <= eps, and the quantized function inherits the family's
//     increment bounds up to lattice slack (s for slopes, 2s for slope
//     increments).
// For Lipschitz balls a second construction ("tube cover") does better once
// eps is large relative to L*dt: pick branch points spaced so the function
// can move at most eps/2 between them, hold centers constant in between, and
// allow level jumps of at most floor(L*gap/eps + 1) lattice steps at each
// branch. Both are genuine covers, so the count used is the smaller one.
// ---------------------------------------------------------------------------

namespace {

struct LatticeSpec {
  std::size_t k = 0;   // number of levels
  double spacing = 0;  // distance between adjacent levels
  double base = 0;     // level j sits at base + j*spacing
};

LatticeSpec make_lattice(double radius, double eps) {
  LatticeSpec lat;
  lat.k = static_cast<std::size_t>(std::ceil(radius / eps - 1e-12));
  if (lat.k == 0) lat.k = 1;
  lat.spacing = 2.0 * radius / static_cast<double>(lat.k);
  lat.base = -radius + 0.5 * lat.spacing;
  return lat;
}

// Max level-index jump per grid step for the Lipschitz lattice cover.
std::vector<std::size_t> lattice_steps(const FamilySpec& f, const LatticeSpec& lat) {
  const auto& t = f.grid.axis1;
  std::vector<std::size_t> d(t.size() > 0 ? t.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    d[i] = static_cast<std::size_t>(std::floor(f.lip * dt / lat.spacing + 1.0 + 1e-9));
  }
  return d;
}

double log_lattice_count_lipschitz(const FamilySpec& f, double eps) {
  const LatticeSpec lat = make_lattice(f.radius, eps);
  const auto steps = lattice_steps(f, lat);
  const std::size_t k = lat.k;
  std::vector<double> cur(k, 1.0), pre(k + 1), next(k);
  double log_scale = 0.0;
  for (std::size_t d : steps) {
    pre[0] = 0.0;
    for (std::size_t j = 0; j < k; ++j) pre[j + 1] = pre[j] + cur[j];
    double peak = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t lo = j > d ? j - d : 0;
      const std::size_t hi = std::min(k - 1, j + d);
      next[j] = pre[hi + 1] - pre[lo];
      peak = std::max(peak, next[j]);
    }
    if (peak > 1e250) {
      for (auto& v : next) v /= peak;
      log_scale += std::log(peak);
    }
    cur.swap(next);
  }
  double total = 0.0;
  for (double v : cur) total += v;
  return std::log(total) + log_scale;
}

struct TubePlan {
  LatticeSpec lat;                    // levels spaced eps (k0 = ceil(2R/eps))
  std::vector<std::size_t> branches;  // branch grid indices (first is 0)
  std::vector<long> max_jump;         // per transition, in lattice steps
};

TubePlan make_tube_plan(const FamilySpec& f, double eps) {
  TubePlan plan;
  plan.lat.k = static_cast<std::size_t>(std::ceil(2.0 * f.radius / eps - 1e-12));
  if (plan.lat.k == 0) plan.lat.k = 1;
  plan.lat.spacing = eps;
  plan.lat.base = -f.radius + 0.5 * eps;  // covers [-R, R] within eps/2
  const auto& t = f.grid.axis1;
  std::size_t b = 0;
  plan.branches.push_back(0);
  while (b + 1 < t.size()) {
    std::size_t next = b + 1;
    for (std::size_t j = b + 1; j < t.size(); ++j) {
      if (f.lip * (t[j] - t[b]) <= 0.5 * eps)
        next = j;
      else
        break;
    }
    if (next == b) break;
    const double gap = t[next] - t[b];
    plan.max_jump.push_back(static_cast<long>(std::floor(f.lip * gap / eps + 1.0 + 1e-9)));
    plan.branches.push_back(next);
    b = next;
  }
  return plan;
}

double log_tube_count(const FamilySpec& f, double eps) {
  const TubePlan plan = make_tube_plan(f, eps);
  double log_n = std::log(static_cast<double>(plan.lat.k));
  for (long m : plan.max_jump) log_n += std::log(static_cast<double>(2 * m + 1));
  return log_n;
}

// Slope-increment cap (in lattice steps) for the smooth-ball cover.
std::size_t smooth_ddiff_cap(const FamilySpec& f, const LatticeSpec& lat) {
  const auto& t = f.grid.axis1;
  const double dt = t.size() >= 2 ? t[1] - t[0] : 1.0;
  return static_cast<std::size_t>(std::floor(f.lip2 * dt * dt / lat.spacing + 2.0 + 1e-9));
}

double log_lattice_count_smooth(const FamilySpec& f, double eps) {
  const LatticeSpec lat = make_lattice(f.radius, eps);
  const auto steps = lattice_steps(f, lat);
  const std::size_t k = lat.k;
  if (steps.empty()) return std::log(static_cast<double>(k));
  const long D = static_cast<long>(steps[0]);
  const long B = static_cast<long>(smooth_ddiff_cap(f, lat));
  const std::size_t width = static_cast<std::size_t>(2 * D + 1);
  // state[j * width + (d + D)]: admissible prefixes ending at level j with
  // last level-jump d.
  std::vector<double> cur(k * width, 0.0), next(k * width);
  for (std::size_t j = 0; j < k; ++j)
    for (long d = -D; d <= D; ++d) {
      const long jp = static_cast<long>(j) - d;
      if (jp >= 0 && jp < static_cast<long>(k)) cur[j * width + (d + D)] = 1.0;
    }
  double log_scale = 0.0;
  for (std::size_t step = 1; step + 1 < steps.size() + 1; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    double peak = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (long d = -D; d <= D; ++d) {
        const double c = cur[j * width + (d + D)];
        if (c == 0.0) continue;
        const long dlo = std::max(-D, d - B);
        const long dhi = std::min(D, d + B);
        for (long dn = dlo; dn <= dhi; ++dn) {
          const long jn = static_cast<long>(j) + dn;
          if (jn < 0 || jn >= static_cast<long>(k)) continue;
          double& slot = next[static_cast<std::size_t>(jn) * width + (dn + D)];
          slot += c;
          if (slot > peak) peak = slot;
        }
      }
    }
    if (peak > 1e250) {
      for (auto& v : next) v /= peak;
      log_scale += std::log(peak);
    }
    cur.swap(next);
  }
  double total = 0.0;
  for (double v : cur) total += v;
  return std::log(total) + log_scale;
}

std::size_t greedy_list_count(const FamilySpec& f, double eps, std::vector<GridFunction>* out) {
  std::vector<const GridFunction*> kept;
  for (const auto& m : f.members) {
    bool covered = false;
    for (const auto* c : kept) {
      const auto mm = kernels::minmax_diff(m.data(), c->values.data(), m.size());
      if (std::max(std::abs(mm.lo), std::abs(mm.hi)) <= eps) {
        covered = true;
        break;
      }
    }
    if (!covered) kept.push_back(&m);
  }
  if (out)
    for (const auto* c : kept) out->push_back(*c);
  return kept.size();
}

void enumerate_lattice_lipschitz(const FamilySpec& f, const LatticeSpec& lat,
                                 const std::vector<std::size_t>& steps, std::size_t cap,
                                 std::vector<GridFunction>& out) {
  const std::size_t m = f.grid.axis1.size();
  std::vector<std::size_t> levels(m);
  std::vector<double> vals(m);
  auto emit = [&] {
    for (std::size_t i = 0; i < m; ++i)
      vals[i] = lat.base + static_cast<double>(levels[i]) * lat.spacing;
    out.emplace_back(f.grid, vals);
  };
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
    if (pos == m) {
      emit();
      return;
    }
    const std::size_t d = steps[pos - 1];
    const std::size_t j = levels[pos - 1];
    const std::size_t lo = j > d ? j - d : 0;
    const std::size_t hi = std::min(lat.k - 1, j + d);
    for (std::size_t jn = lo; jn <= hi; ++jn) {
      levels[pos] = jn;
      self(self, pos + 1);
    }
  };
  for (std::size_t j0 = 0; j0 < lat.k; ++j0) {
    levels[0] = j0;
    if (m == 1)
      emit();
    else
      rec(rec, 1);
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
  }
}

void enumerate_tube(const FamilySpec& f, double eps, std::size_t cap,
                    std::vector<GridFunction>& out) {
  const TubePlan plan = make_tube_plan(f, eps);
  const std::size_t m = f.grid.axis1.size();
  const std::size_t segs = plan.branches.size();
  std::vector<double> seg_val(segs);
  std::vector<double> vals(m);
  auto emit = [&] {
    for (std::size_t r = 0; r < segs; ++r) {
      const std::size_t lo = plan.branches[r];
      const std::size_t hi = r + 1 < segs ? plan.branches[r + 1] : m;
      for (std::size_t i = lo; i < hi; ++i) vals[i] = seg_val[r];
    }
    out.emplace_back(f.grid, vals);
  };
  auto rec = [&](auto&& self, std::size_t r) -> void {
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
    if (r == segs) {
      emit();
      return;
    }
    const long mj = plan.max_jump[r - 1];
    for (long d = -mj; d <= mj; ++d) {
      seg_val[r] = seg_val[r - 1] + static_cast<double>(d) * plan.lat.spacing;
      self(self, r + 1);
    }
  };
  for (std::size_t j0 = 0; j0 < plan.lat.k; ++j0) {
    seg_val[0] = plan.lat.base + static_cast<double>(j0) * plan.lat.spacing;
    if (segs == 1)
      emit();
    else
      rec(rec, 1);
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
  }
}

void enumerate_lattice_smooth(const FamilySpec& f, const LatticeSpec& lat,
                              const std::vector<std::size_t>& steps, std::size_t cap,
                              std::vector<GridFunction>& out) {
  const std::size_t m = f.grid.axis1.size();
  const long D = steps.empty() ? 0 : static_cast<long>(steps[0]);
  const long B = static_cast<long>(smooth_ddiff_cap(f, lat));
  std::vector<std::size_t> levels(m);
  std::vector<double> vals(m);
  auto emit = [&] {
    for (std::size_t i = 0; i < m; ++i)
      vals[i] = lat.base + static_cast<double>(levels[i]) * lat.spacing;
    out.emplace_back(f.grid, vals);
  };
  auto rec = [&](auto&& self, std::size_t pos, long last_d) -> void {
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
    if (pos == m) {
      emit();
      return;
    }
    const long dlo = pos == 1 ? -D : std::max(-D, last_d - B);
    const long dhi = pos == 1 ? D : std::min(D, last_d + B);
    for (long d = dlo; d <= dhi; ++d) {
      const long jn = static_cast<long>(levels[pos - 1]) + d;
      if (jn < 0 || jn >= static_cast<long>(lat.k)) continue;
      levels[pos] = static_cast<std::size_t>(jn);
      self(self, pos + 1, d);
    }
  };
  for (std::size_t j0 = 0; j0 < lat.k; ++j0) {
    levels[0] = j0;
    if (m == 1)
      emit();
    else
      rec(rec, 1, 0);
    if (out.size() > cap) throw std::length_error("epsilon_net: center count exceeds cap");
  }
}

}  // namespace

double log_covering_count(const FamilySpec& family, double eps) {
  family.validate();
  require(eps > 0.0, "eps must be > 0");
  switch (family.kind) {
    case FamilySpec::Kind::constants: {
      const LatticeSpec lat = make_lattice(family.radius, eps);
      return std::log(static_cast<double>(lat.k));
    }
    case FamilySpec::Kind::finite_list:
      return std::log(static_cast<double>(greedy_list_count(family, eps, nullptr)));
    case FamilySpec::Kind::lipschitz_ball:
      return std::min(log_lattice_count_lipschitz(family, eps), log_tube_count(family, eps));
    case FamilySpec::Kind::smooth_ball:
      return log_lattice_count_smooth(family, eps);
  }
  throw std::invalid_argument("unsupported family kind");
}

EpsilonNet epsilon_net(const FamilySpec& family, double eps, std::size_t max_centers) {
  family.validate();
  require(eps > 0.0, "eps must be > 0");
  EpsilonNet net;
  switch (family.kind) {
    case FamilySpec::Kind::constants: {
      const LatticeSpec lat = make_lattice(family.radius, eps);
      for (std::size_t j = 0; j < lat.k; ++j)
        net.centers.push_back(GridFunction::constant(
            family.grid, lat.base + static_cast<double>(j) * lat.spacing));
      break;
    }
    case FamilySpec::Kind::finite_list:
      greedy_list_count(family, eps, &net.centers);
      break;
    case FamilySpec::Kind::lipschitz_ball: {
      const LatticeSpec lat = make_lattice(family.radius, eps);
      const auto steps = lattice_steps(family, lat);
      if (log_lattice_count_lipschitz(family, eps) <= log_tube_count(family, eps))
        enumerate_lattice_lipschitz(family, lat, steps, max_centers, net.centers);
      else
        enumerate_tube(family, eps, max_centers, net.centers);
      break;
    }
    case FamilySpec::Kind::smooth_ball: {
      const LatticeSpec lat = make_lattice(family.radius, eps);
      const auto steps = lattice_steps(family, lat);
      enumerate_lattice_smooth(family, lat, steps, max_centers, net.centers);
      break;
    }
  }
  net.count = net.centers.size();
  return net;
}

EntropyIntegral entropy_integral(const FamilySpec& family, double eps_min, double eps_max,
                                 double growth_factor) {
  require(eps_min > 0.0 && eps_min < eps_max, "entropy_integral: need 0 < eps_min < eps_max");
  require(growth_factor > 1.0, "entropy_integral: growth factor must exceed 1");

  // Midpoint rule on a geometric partition; the integrand is smooth between
  // the (logarithmically sparse) jumps of the covering count.
  auto integrate = [&](double a, double b) {
    if (a >= b) return 0.0;
    constexpr int kNodesPerOctave = 16;
    const int n = std::max(4, static_cast<int>(std::ceil(std::log2(b / a) * kNodesPerOctave)));
    const double ratio = std::pow(b / a, 1.0 / n);
    double total = 0.0;
    double hi = b;
    for (int i = 0; i < n; ++i) {
      const double lo = hi / ratio;
      const double mid = std::sqrt(lo * hi);
      const double log_n_mid = std::max(0.0, log_covering_count(family, mid));
      total += std::sqrt(log_n_mid) / std::sqrt(mid) * (hi - lo);
      hi = lo;
    }
    return total;
  };

  EntropyIntegral out;
  out.value = integrate(eps_min, eps_max);
  // Probe the two octaves at the lower endpoint: if the mass gained by
  // halving eps_min stops decaying (by `growth_factor` per octave), the
  // integrand is behaving like 1/eps or worse.
  const double upper_octave = integrate(eps_min, 2.0 * eps_min);
  const double lower_octave = integrate(0.5 * eps_min, eps_min);
  out.divergence_flag = lower_octave > 1e-12 && upper_octave < growth_factor * lower_octave;
  return out;
}

}  // namespace hrd
