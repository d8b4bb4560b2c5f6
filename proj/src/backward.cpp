#include "fbsde/backward.hpp"

#include <cmath>

#include "fbsde/error.hpp"

namespace fbsde {

LevelSolution terminal_fields(const FbsdeProblem& problem, const SpaceTimeGrid& grid) {
  const auto& space = grid.space();
  const int d = problem.dim_x;
  LevelSolution out{GridField(space, 1), GridField(space, static_cast<std::size_t>(d)), grid.n_steps()};
  const double t_end = grid.horizon();
  for (std::size_t node = 0; node < space->size(); ++node) {
    const Vec x = space->point(node);
    out.y.at(node) = problem.terminal(x);
    const RowVec z = problem.terminal_dx(x) * problem.diffusion(t_end, x);
    for (int c = 0; c < d; ++c) out.z.at(node, static_cast<std::size_t>(c)) = z(c);
  }
  return out;
}

ZForm z_form(const SchemeConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::S1: return ZForm::AMatrix;
    case Scheme::S2: return ZForm::Malliavin;
    case Scheme::CN: return cfg.cn_z_update == CnZUpdate::AMatrix ? ZForm::AMatrix : ZForm::Malliavin;
  }
  return ZForm::AMatrix;
}

SplineInterpolant fit_level(const LevelSolution& level, Extrapolation policy) {
  const std::size_t d = level.z.components();
  GridField packed(level.y.grid(), 1 + d);
  for (std::size_t node = 0; node < packed.nodes(); ++node) {
    packed.at(node, 0) = level.y.at(node);
    for (std::size_t c = 0; c < d; ++c) packed.at(node, 1 + c) = level.z.at(node, c);
  }
  return fit(packed, policy);
}

LevelKernel::LevelKernel(const FbsdeProblem& problem, const ForwardStep& forward, const GaussianStencil& stencil,
                         const SplineInterpolant& next, const SchemeConfig& cfg, const SpaceTimeGrid& grid,
                         int level)
    : problem_(problem),
      forward_(forward),
      stencil_(stencil),
      next_(next),
      cfg_(cfg),
      level_(level),
      t_(grid.time(level)),
      t_next_(grid.time(level + 1)),
      dt_(grid.dt()) {
  const bool euler_like = forward.variant() == ForwardScheme::Euler ||
                          forward.variant() == ForwardScheme::Milstein || problem.constant_drift ||
                          problem.dim_x > 1;
  zero_amatrix_corr_ = problem.constant_diffusion && problem.constant_drift;
  zero_malliavin_corr_ = problem.constant_diffusion && euler_like;
  if (problem.constant_diffusion) {
    sigma_inv_const_ = invert_small(problem.diffusion(t_next_, Vec::Zero(problem.dim_x)));
  }
}

NodeMoments LevelKernel::moments(const Vec& x, ZForm form) const {
  const int d = problem_.dim_x;
  NodeMoments m;
  m.ey_dw = RowVec::Zero(d);
  m.ef_dw = RowVec::Zero(d);
  m.z_corr = RowVec::Zero(d);
  const bool need_corr = form == ZForm::AMatrix ? !zero_amatrix_corr_ : !zero_malliavin_corr_;
  const Mat sigma_n = need_corr && form == ZForm::AMatrix ? problem_.diffusion(t_, x) : Mat();

  double vals[1 + kMaxDim];
  const std::span<double> out(vals, static_cast<std::size_t>(1 + d));
  for_each_sample(forward_, stencil_, t_, x, dt_, [&](const Vec& x1, const Vec& dw, double w) {
    next_.eval(x1, out);
    const double y1 = vals[0];
    RowVec z1(d);
    for (int c = 0; c < d; ++c) z1(c) = vals[1 + c];
    const double f1 = problem_.gen_f1(t_next_, x1, y1, z1);
    const double f2 = problem_.gen_f2(t_next_, x1, y1, z1);

    m.ey += w * y1;
    m.ey_dw += (w * y1) * dw.transpose();
    m.ef_dw += (w * (f1 + f2)) * dw.transpose();
    m.ef1 += w * f1;
    m.ef2 += w * f2;

    if (need_corr) {
      const Mat sigma_inv = problem_.constant_diffusion ? sigma_inv_const_
                                                        : invert_small(problem_.diffusion(t_next_, x1));
      if (form == ZForm::AMatrix) {
        const Mat a = amatrix(problem_, t_, x, dt_, dw);
        m.z_corr += w * (z1 - z1 * sigma_inv * a * sigma_n);
      } else {
        const Mat md = forward_.malliavin_integral(t_, x, dt_, dw);
        m.z_corr += w * (z1 * (sigma_inv * md - dt_ * Mat::Identity(d, d)));
      }
    }
  });

  if (!std::isfinite(m.ey) || !m.ey_dw.allFinite() || !m.ef_dw.allFinite() || !std::isfinite(m.ef1) ||
      !std::isfinite(m.ef2) || !m.z_corr.allFinite()) {
    throw Error(ErrorCode::NonFiniteSample, "non-finite conditional expectation");
  }
  return m;
}

RowVec LevelKernel::z_from(const NodeMoments& m, ZForm form) const {
  const RowVec base = m.ey_dw / dt_ + m.ef_dw;
  if (form == ZForm::AMatrix) return base - 0.5 * m.z_corr;
  return base + m.z_corr / dt_;
}

ImplicitEquation LevelKernel::y_equation(const NodeMoments& m, Scheme scheme, Parity parity) const {
  ImplicitEquation eq;
  if (scheme == Scheme::CN) {
    eq.weight = 0.5 * dt_;
    eq.part = ImplicitPart::Full;
    eq.constant = m.ey + eq.weight * (m.ef1 + m.ef2);
    return eq;
  }
  eq.weight = scheme == Scheme::S2 && cfg_.s2_verbatim_weights ? 0.5 * dt_ : dt_;
  if (parity == Parity::Even) {
    eq.part = ImplicitPart::F1;
    eq.constant = m.ey + eq.weight * m.ef2;
  } else {
    eq.part = ImplicitPart::F2;
    eq.constant = m.ey + eq.weight * m.ef1;
  }
  return eq;
}

double LevelKernel::apply(const ImplicitEquation& eq, const Vec& x, double y, const RowVec& z) const {
  double f = 0.0;
  switch (eq.part) {
    case ImplicitPart::F1: f = problem_.gen_f1(t_, x, y, z); break;
    case ImplicitPart::F2: f = problem_.gen_f2(t_, x, y, z); break;
    case ImplicitPart::Full: f = problem_.generator(t_, x, y, z); break;
  }
  return eq.constant + eq.weight * f;
}

double LevelKernel::predictor(const ImplicitEquation& eq, const NodeMoments& m, const Vec& x,
                              const RowVec& z) const {
  return apply(eq, x, m.ey, z);
}

bool LevelKernel::affine(const ImplicitEquation& eq) const {
  if (!cfg_.direct_affine) return false;
  switch (eq.part) {
    case ImplicitPart::F1: return problem_.f1_affine_in_y;
    case ImplicitPart::F2: return problem_.f2_affine_in_y;
    case ImplicitPart::Full: return problem_.f1_affine_in_y && problem_.f2_affine_in_y;
  }
  return false;
}

// y = a + s y  =>  y = a / (1 - s), with a and s read off two evaluations.
double LevelKernel::solve_affine(const ImplicitEquation& eq, const Vec& x, const RowVec& z) const {
  const double a = apply(eq, x, 0.0, z);
  const double s = apply(eq, x, 1.0, z) - a;
  if (!(std::abs(1.0 - s) > 1e-14)) {
    throw Error(ErrorCode::PicardDiverged, "affine implicit step has no unique solution");
  }
  return a / (1.0 - s);
}

RowVec LevelKernel::z_update_s1(const Vec& x) const {
  return z_from(moments(x, ZForm::AMatrix), ZForm::AMatrix);
}

RowVec LevelKernel::z_update_s2(const Vec& x) const {
  return z_from(moments(x, ZForm::Malliavin), ZForm::Malliavin);
}

std::pair<double, StepStats> LevelKernel::picard(const ImplicitEquation& eq, const NodeMoments& m, const Vec& x,
                                                 const RowVec& z) const {
  StepStats stats;
  if (affine(eq)) return {solve_affine(eq, x, z), stats};
  double y = predictor(eq, m, x, z);
  double prev_res = INFINITY;
  while (true) {
    const double next = apply(eq, x, y, z);
    const double res = std::abs(next - y);
    y = next;
    ++stats.picard_iters;
    stats.residual = res;
    if (res <= cfg_.picard_tol) break;
    if (stats.picard_iters >= cfg_.picard_max || !std::isfinite(res)) {
      throw Error(ErrorCode::PicardDiverged,
                  "Picard residual " + std::to_string(res) + (res >= prev_res ? " growing" : " above tolerance") +
                      " after " + std::to_string(stats.picard_iters) + " sweeps");
    }
    prev_res = res;
  }
  return {y, stats};
}

std::pair<double, StepStats> LevelKernel::y_update(const Vec& x, Parity parity, const RowVec& z_n) const {
  const Scheme scheme = cfg_.scheme == Scheme::CN ? Scheme::S1 : cfg_.scheme;
  const NodeMoments m = moments(x, z_form(cfg_));
  return picard(y_equation(m, scheme, parity), m, x, z_n);
}

std::pair<double, StepStats> LevelKernel::y_update_cn(const Vec& x, const RowVec& z_n) const {
  const NodeMoments m = moments(x, z_form(cfg_));
  return picard(y_equation(m, Scheme::CN, Parity::Even), m, x, z_n);
}

}  // namespace fbsde
