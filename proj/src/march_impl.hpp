#pragma once

// Level-by-level backward march shared by the serial reference and the
// OpenMP driver. ForEach(count, body) must call body(i) exactly once for
// every i in [0, count); bodies touch disjoint entries only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "fbsde/backward.hpp"
#include "fbsde/error.hpp"

namespace fbsde::detail {

inline Error with_context(const Error& e, int level, std::size_t node, const Vec& x) {
  std::ostringstream msg;
  msg << "level " << level << ", node " << node << " (x = " << x.transpose() << "): " << e.what();
  return Error(e.code(), msg.str());
}

inline ImplicitPart level_part(Scheme scheme, Parity parity) {
  if (scheme == Scheme::CN) return ImplicitPart::Full;
  return parity == Parity::Even ? ImplicitPart::F1 : ImplicitPart::F2;
}

template <class ForEach>
MarchResult march_impl(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg,
                       ForEach&& for_each) {
  using clock = std::chrono::steady_clock;
  validate(problem, grid, cfg);

  const auto start = clock::now();
  const int d = problem.dim_x;
  const auto& space = grid.space();
  const std::size_t nodes = space->size();
  const ForwardStep forward(problem, cfg.forward);
  const GaussianStencil stencil(gh_rule(cfg.gh_order), d);
  const ZForm form = z_form(cfg);

  std::vector<Vec> points(nodes);
  for (std::size_t i = 0; i < nodes; ++i) points[i] = space->point(i);

  MarchResult result{terminal_fields(problem, grid), {}, {}};
  result.levels.resize(static_cast<std::size_t>(grid.n_steps()) + 1);
  LevelSolution& cur = result.solution;

  std::vector<double> constant(nodes), y_prev(nodes), y_next(nodes), change(nodes);
  std::vector<RowVec> z_new(nodes);
  std::vector<ImplicitEquation> eqs(nodes);

  for (int n = grid.n_steps() - 1; n >= 0; --n) {
    const auto level_start = clock::now();
    const SplineInterpolant next = fit_level(cur, cfg.extrapolation);
    const LevelKernel kernel(problem, forward, stencil, next, cfg, grid, n);
    const Parity parity = parity_of(n);

    // the implicit part is the same at every node of a level
    const bool direct = kernel.affine(ImplicitEquation{0.0, 0.0, level_part(cfg.scheme, parity)});

    // Z is explicit in level-(n+1) data; the Picard seed needs it.
    for_each(nodes, [&](std::size_t i) {
      try {
        const NodeMoments m = kernel.moments(points[i], form);
        z_new[i] = kernel.z_from(m, form);
        eqs[i] = kernel.y_equation(m, cfg.scheme, parity);
        y_prev[i] = direct ? kernel.solve_affine(eqs[i], points[i], z_new[i])
                           : kernel.predictor(eqs[i], m, points[i], z_new[i]);
      } catch (const Error& e) {
        throw with_context(e, n, i, points[i]);
      }
    });

    StepStats stats;
    double prev_res = INFINITY;
    while (!direct) {
      for_each(nodes, [&](std::size_t i) {
        y_next[i] = kernel.apply(eqs[i], points[i], y_prev[i], z_new[i]);
        change[i] = std::abs(y_next[i] - y_prev[i]);
      });
      // max is exact, so the reduction order does not matter
      double res = 0.0;
      for (std::size_t i = 0; i < nodes; ++i) {
        if (!(change[i] <= res)) res = change[i];
      }
      std::swap(y_prev, y_next);
      ++stats.picard_iters;
      stats.residual = res;
      if (res <= cfg.picard_tol) break;
      if (stats.picard_iters >= cfg.picard_max || !std::isfinite(res)) {
        std::ostringstream msg;
        msg << "level " << n << ": Picard residual " << res << (res >= prev_res ? " growing" : " above tolerance")
            << " after " << stats.picard_iters << " sweeps";
        throw Error(ErrorCode::PicardDiverged, msg.str());
      }
      prev_res = res;
    }

    for (std::size_t i = 0; i < nodes; ++i) {
      cur.y.at(i) = y_prev[i];
      for (int c = 0; c < d; ++c) cur.z.at(i, static_cast<std::size_t>(c)) = z_new[i](c);
    }
    cur.level = n;

    stats.wallclock = std::chrono::duration<double>(clock::now() - level_start).count();
    result.levels[static_cast<std::size_t>(n)] = stats;
    result.total.picard_iters += stats.picard_iters;
    result.total.residual = std::max(result.total.residual, stats.residual);
  }
  result.total.wallclock = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

}  // namespace fbsde::detail
