#include "rbll/symflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <sstream>

namespace rbll {

namespace {

GridSet steiner_grid(const GridSet& g, const double* u) {
  const int d = g.d;
  double uperp[2] = {0, 0};
  if (d == 2) {
    uperp[0] = -u[1];
    uperp[1] = u[0];
  }

  struct Cand {
    double t_abs;
    double t;
    std::size_t idx;
  };
  // bins along u-perp cover a bounded index range on the grid
  const double diag = (std::abs(g.n[0]) + std::abs(g.n[1])) * g.h;
  const long long bin_lo =
      static_cast<long long>(std::floor((-(std::abs(g.lo[0]) + std::abs(g.lo[1])) - diag) / g.h)) - 2;
  const long long bin_hi = -bin_lo + 2;
  const std::size_t nbins = static_cast<std::size_t>(bin_hi - bin_lo + 1);
  // two passes: bucket counts, then a flat candidate array per bin
  std::vector<std::size_t> count(nbins, 0), occupied(nbins, 0), start(nbins + 1, 0);
  const std::size_t ncells = static_cast<std::size_t>(g.n[0]) * g.n[1];
  std::vector<std::size_t> bin_of(ncells);
  std::vector<double> tval(ncells);
  double x[3];
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      g.center(ix, iy, 0, x);
      const double s = d == 2 ? x[0] * uperp[0] + x[1] * uperp[1] : 0.0;
      const double t = d == 2 ? x[0] * u[0] + x[1] * u[1] : x[0] * u[0];
      const std::size_t id = g.index(ix, iy, 0);
      const std::size_t bin = static_cast<std::size_t>(
          static_cast<long long>(std::floor(s / g.h + 0.5)) - bin_lo);
      bin_of[id] = bin;
      tval[id] = t;
      ++count[bin];
      occupied[bin] += g.cell[id] ? 1 : 0;
    }
  for (std::size_t b = 0; b < nbins; ++b) start[b + 1] = start[b] + count[b];
  std::vector<Cand> cands(ncells);
  {
    std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
    for (std::size_t id = 0; id < ncells; ++id)
      cands[cursor[bin_of[id]]++] = {std::abs(tval[id]), tval[id], id};
  }

  GridSet out = g;
  std::fill(out.cell.begin(), out.cell.end(), 0);
  for (std::size_t b = 0; b < nbins; ++b) {
    const std::size_t need = occupied[b];
    if (need == 0) continue;
    auto first = cands.begin() + static_cast<std::ptrdiff_t>(start[b]);
    auto last = cands.begin() + static_cast<std::ptrdiff_t>(start[b + 1]);
    std::sort(first, last, [](const Cand& a, const Cand& c) {
      if (a.t_abs != c.t_abs) return a.t_abs < c.t_abs;
      if (a.t != c.t) return a.t < c.t;  // prefer the negative side on ties
      return a.idx < c.idx;
    });
    for (std::size_t q = 0; q < need; ++q) out.cell[(first + q)->idx] = 1;
  }
  return out;
}

}  // namespace

SetTuple steiner_step(const SetTuple& E, std::span<const double> u) {
  if (E.d != 1 && E.d != 2)
    throw std::invalid_argument("steiner_step: d in {1,2}");
  double un[2] = {u[0], E.d == 2 ? u[1] : 0.0};
  const double n = std::hypot(un[0], un[1]);
  if (!(n > 0)) throw std::invalid_argument("steiner_step: zero direction");
  un[0] /= n;
  un[1] /= n;
  SetTuple out;
  out.d = E.d;
  for (const auto& rep : E.sets) {
    const GridSet* g = std::get_if<GridSet>(&rep);
    if (!g) throw std::invalid_argument("steiner_step: Grid representation required");
    out.sets.emplace_back(steiner_grid(*g, un));
  }
  return out;
}

FlowResult flow_to_balls(const LinearFamily& fam, const SetTuple& E,
                         const MeasureSpec& spec, const FlowOptions& opts) {
  FlowResult res;
  SetTuple cur = E;
  const SetTuple star = make_ball_tuple(spec);

  auto record = [&](int step) {
    MCEstimate est = eval_phi_mc(fam, cur, opts.mc_samples, opts.seed);
    double dist = 0;
    for (int j = 0; j < cur.J(); ++j)
      dist = std::max(dist, symmetric_difference_measure(cur.d, cur.sets[j],
                                                         star.sets[j]));
    res.trajectory.push_back({step, est.value, est.std_error, dist});
  };

  record(0);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 1; k <= opts.steps; ++k) {
    double dir[2] = {1, 0};
    if (cur.d == 2) {
      const double ang = opts.golden_schedule
                             ? geom::kPi * std::fmod(k * golden, 1.0)
                             : (k % 2 ? 0.0 : geom::kPi / 2);
      dir[0] = std::cos(ang);
      dir[1] = std::sin(ang);
    }
    cur = steiner_step(cur, {dir, 2});
    record(k);
  }

  // stall: symmetric difference stops improving while still far from the
  // raster floor
  const double floor_est = 8 * std::pow(grid_default_h(spec), 1) *
                           *std::max_element(spec.r.begin(), spec.r.end());
  const std::size_t nt = res.trajectory.size();
  if (nt > 10) {
    const double last = res.trajectory[nt - 1].dist;
    const double mid = res.trajectory[nt / 2].dist;
    res.stalled = last > 4 * floor_est && last > 0.9 * mid;
  }
  res.final = std::move(cur);
  return res;
}

std::string serialize_trajectory(const FlowResult& r) {
  std::ostringstream os;
  os << "step,phi,stderr,dist\n";
  char buf[120];
  for (const FlowPoint& p : r.trajectory) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", p.step, p.phi,
                  p.std_error, p.dist);
    os << buf;
  }
  return os.str();
}

}  // namespace rbll
