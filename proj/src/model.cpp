#include "fbsde/model.hpp"

#include <cmath>
#include <sstream>

#include "fbsde/error.hpp"

namespace fbsde {

SpatialGrid::SpatialGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::InvalidConfig, "spatial grid must have 1 or 2 axes");
  }
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.count == 0 || !(a.step > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "axis needs a positive step and at least one node");
    }
    size_ *= a.count;
  }
}

std::size_t SpatialGrid::flat_index(std::span<const std::size_t> multi) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) flat = flat * axes_[i].count + multi[i];
  return flat;
}

std::array<std::size_t, kMaxDim> SpatialGrid::multi_index(std::size_t flat) const {
  std::array<std::size_t, kMaxDim> multi{};
  for (std::size_t i = axes_.size(); i-- > 0;) {
    multi[i] = flat % axes_[i].count;
    flat /= axes_[i].count;
  }
  return multi;
}

Vec SpatialGrid::point(std::size_t flat) const {
  const auto multi = multi_index(flat);
  Vec x(dim());
  for (int i = 0; i < dim(); ++i) x(i) = axes_[static_cast<std::size_t>(i)].node(multi[static_cast<std::size_t>(i)]);
  return x;
}

double spatial_step(double dt, int p_time, int r_interp) {
  return std::pow(dt, static_cast<double>(p_time + 1) / static_cast<double>(r_interp + 1));
}

SpaceTimeGrid::SpaceTimeGrid(double horizon, int n_steps, const Box& box, int p_time, int r_interp)
    : horizon_(horizon), n_steps_(n_steps), p_time_(p_time), r_interp_(r_interp) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  if (n_steps < 1) throw Error(ErrorCode::InvalidConfig, "N must be positive");
  if (p_time < 1 || p_time > 2) throw Error(ErrorCode::InvalidConfig, "time order p must be 1 or 2");
  if (r_interp < 1) throw Error(ErrorCode::InvalidConfig, "interpolation order must be positive");
  dx_ = spatial_step(dt(), p_time_, r_interp_);

  std::vector<Axis> axes;
  for (const auto& iv : box) {
    if (!(iv.hi > iv.lo)) throw Error(ErrorCode::InvalidConfig, "box interval must have hi > lo");
    const auto count = static_cast<std::size_t>(std::ceil((iv.hi - iv.lo) / dx_)) + 1;
    axes.push_back(Axis{iv.lo, dx_, count});
  }
  space_ = std::make_shared<const SpatialGrid>(std::move(axes));
}

GridField::GridField(std::shared_ptr<const SpatialGrid> grid, std::size_t components)
    : grid_(std::move(grid)), components_(components) {
  if (!grid_ || components_ == 0) throw Error(ErrorCode::InvalidConfig, "grid field needs a grid and c >= 1");
  values_.assign(grid_->size() * components_, 0.0);
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::S1: return "s1";
    case Scheme::S2: return "s2";
    case Scheme::CN: return "cn";
  }
  return "?";
}

std::string_view to_string(ForwardScheme f) {
  switch (f) {
    case ForwardScheme::Euler: return "euler";
    case ForwardScheme::Milstein: return "milstein";
    case ForwardScheme::WeakTaylor2: return "wt2";
  }
  return "?";
}

Scheme parse_scheme(std::string_view s) {
  if (s == "s1") return Scheme::S1;
  if (s == "s2") return Scheme::S2;
  if (s == "cn") return Scheme::CN;
  throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + std::string(s) + "'");
}

ForwardScheme parse_forward(std::string_view s) {
  if (s == "euler") return ForwardScheme::Euler;
  if (s == "milstein") return ForwardScheme::Milstein;
  if (s == "wt2") return ForwardScheme::WeakTaylor2;
  throw Error(ErrorCode::InvalidConfig, "unknown forward scheme '" + std::string(s) + "'");
}

Mat invert_small(const Mat& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  Mat inv(m.rows(), m.cols());
  if (m.rows() == 1) {
    if (!std::isfinite(m(0, 0)) || m(0, 0) == 0.0) {
      throw Error(ErrorCode::SingularDiffusion, "diffusion is zero");
    }
    inv(0, 0) = 1.0 / m(0, 0);
    return inv;
  }
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (!std::isfinite(det) || std::abs(det) <= 1e-14 * scale * scale) {
    throw Error(ErrorCode::SingularDiffusion, "diffusion matrix is singular");
  }
  inv(0, 0) = m(1, 1) / det;
  inv(0, 1) = -m(0, 1) / det;
  inv(1, 0) = -m(1, 0) / det;
  inv(1, 1) = m(0, 0) / det;
  return inv;
}

void validate(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg) {
  if (grid.n_steps() % 2 != 0) {
    throw Error(ErrorCode::OddN, "N = " + std::to_string(grid.n_steps()) + " is odd; the alternating scheme pairs steps");
  }
  const auto& space = *grid.space();
  if (space.dim() != problem.dim_x) {
    throw Error(ErrorCode::InvalidConfig, "box dimension does not match the problem dimension");
  }
  for (int i = 0; i < space.dim(); ++i) {
    if (space.axis(i).count < 4) {
      throw Error(ErrorCode::TooFewNodes, "axis " + std::to_string(i) + " has " +
                                              std::to_string(space.axis(i).count) + " nodes; cubic splines need 4");
    }
  }
  if (cfg.gh_order < 1 || cfg.gh_order > 64) {
    throw Error(ErrorCode::OrderOutOfRange, "Gauss-Hermite order must lie in [1, 64]");
  }
  if (!(cfg.picard_tol > 0.0) || cfg.picard_max < 1) {
    throw Error(ErrorCode::InvalidConfig, "picard_tol must be > 0 and picard_max >= 1");
  }
  if (!problem.drift || !problem.diffusion || !problem.gen_f1 || !problem.gen_f2 || !problem.terminal ||
      !problem.terminal_dx) {
    throw Error(ErrorCode::InvalidConfig, "problem is missing a coefficient function");
  }

  const int levels = problem.constant_diffusion ? 0 : grid.n_steps();
  for (int n = 0; n <= levels; ++n) {
    const double t = grid.time(n);
    for (std::size_t node = 0; node < space.size(); ++node) {
      const Vec x = space.point(node);
      try {
        (void)invert_small(problem.diffusion(t, x));
      } catch (const Error&) {
        std::ostringstream msg;
        msg << "diffusion not invertible at t=" << t << ", x=(" << x.transpose() << ")";
        throw Error(ErrorCode::SingularDiffusion, msg.str());
      }
    }
  }
}

}  // namespace fbsde
