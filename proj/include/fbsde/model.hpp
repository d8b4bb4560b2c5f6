#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fbsde {

// State dimension is capped at two; fixed maximum sizes keep the small
// vectors and matrices off the heap inside the quadrature loops.
inline constexpr int kMaxDim = 2;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Column-wise derivatives of the diffusion matrix: entry j is the d x d
/// Jacobian of column j of sigma, (row i, col k) = d sigma_{ij} / d x_k.
using DiffusionJacobian = std::array<Mat, kMaxDim>;

using VecFn = std::function<Vec(double t, const Vec& x)>;
using MatFn = std::function<Mat(double t, const Vec& x)>;
using DiffusionJacobianFn = std::function<DiffusionJacobian(double t, const Vec& x)>;
using ScalarFn = std::function<double(double t, double x)>;
using GeneratorFn = std::function<double(double t, const Vec& x, double y, const RowVec& z)>;
using TerminalFn = std::function<double(const Vec& x)>;
using TerminalGradFn = std::function<RowVec(const Vec& x)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Box = std::vector<Interval>;

/// Closed-form (Y, Z) used to measure errors.
struct AnalyticSolution {
  std::function<double(double t, const Vec& x)> y;
  std::function<RowVec(double t, const Vec& x)> z;
};

/// A decoupled FBSDE with scalar Y and a generator split f = f1 + f2.
///
/// The one-dimensional second-order coefficient derivatives are only needed
/// by the weak order-2 forward scheme; the constant_* flags let multi-d
/// problems use the higher-order forward variants without supplying them.
struct FbsdeProblem {
  std::string id;
  int dim_x = 1;
  double horizon = 1.0;

  VecFn drift;
  MatFn diffusion;
  MatFn drift_dx;
  DiffusionJacobianFn diffusion_dx;

  ScalarFn drift_dt;
  ScalarFn drift_dxx;
  ScalarFn diffusion_dt;
  ScalarFn diffusion_dxx;

  bool constant_drift = false;
  bool constant_diffusion = false;

  // Declares f1 / f2 affine in y for fixed (t, x, z); only consulted when
  // SchemeConfig::direct_affine is set.
  bool f1_affine_in_y = false;
  bool f2_affine_in_y = false;

  GeneratorFn gen_f1;
  GeneratorFn gen_f2;
  TerminalFn terminal;
  TerminalGradFn terminal_dx;

  std::optional<AnalyticSolution> analytic;

  Box default_box;
  Vec default_x0;

  double generator(double t, const Vec& x, double y, const RowVec& z) const {
    return gen_f1(t, x, y, z) + gen_f2(t, x, y, z);
  }
};

/// One uniform axis: nodes lo + i * step for i in [0, count).
struct Axis {
  double lo = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  double node(std::size_t i) const { return lo + static_cast<double>(i) * step; }
  double hi() const { return node(count - 1); }
};

/// Tensor grid of uniform axes, flattened row-major (last axis fastest).
class SpatialGrid {
 public:
  explicit SpatialGrid(std::vector<Axis> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }

  std::size_t flat_index(std::span<const std::size_t> multi) const;
  std::array<std::size_t, kMaxDim> multi_index(std::size_t flat) const;
  Vec point(std::size_t flat) const;

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

/// Spatial step tied to the time step: dx = dt^((p + 1) / (r + 1)).
double spatial_step(double dt, int p_time, int r_interp);

/// Uniform time partition plus a truncated tensor spatial grid whose step
/// follows spatial_step(). Upper box ends are snapped up onto the lattice.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(double horizon, int n_steps, const Box& box, int p_time, int r_interp = 3);

  double horizon() const { return horizon_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return horizon_ / static_cast<double>(n_steps_); }
  double time(int n) const { return horizon_ * static_cast<double>(n) / static_cast<double>(n_steps_); }
  int p_time() const { return p_time_; }
  int r_interp() const { return r_interp_; }
  double dx() const { return dx_; }
  const std::shared_ptr<const SpatialGrid>& space() const { return space_; }

 private:
  double horizon_;
  int n_steps_;
  int p_time_;
  int r_interp_;
  double dx_;
  std::shared_ptr<const SpatialGrid> space_;
};

/// Flat array of `components` values per grid node.
class GridField {
 public:
  GridField(std::shared_ptr<const SpatialGrid> grid, std::size_t components);

  const std::shared_ptr<const SpatialGrid>& grid() const { return grid_; }
  std::size_t components() const { return components_; }
  std::size_t nodes() const { return grid_->size(); }

  double& at(std::size_t node, std::size_t c = 0) { return values_[node * components_ + c]; }
  double at(std::size_t node, std::size_t c = 0) const { return values_[node * components_ + c]; }
  double& at(std::span<const std::size_t> multi, std::size_t c = 0) {
    return at(grid_->flat_index(multi), c);
  }
  double at(std::span<const std::size_t> multi, std::size_t c = 0) const {
    return at(grid_->flat_index(multi), c);
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  std::shared_ptr<const SpatialGrid> grid_;
  std::size_t components_;
  std::vector<double> values_;
};

/// Y (scalar) and Z (1 x d row) on one time level.
struct LevelSolution {
  GridField y;
  GridField z;
  int level = 0;
};

enum class Scheme { S1, S2, CN };
enum class ForwardScheme { Euler, Milstein, WeakTaylor2 };
enum class Extrapolation { LinearBoundary, Clamp };
/// Which Z update accompanies the trapezoidal Y update of the CN reference.
enum class CnZUpdate { AMatrix, Malliavin };

struct SchemeConfig {
  Scheme scheme = Scheme::S1;
  ForwardScheme forward = ForwardScheme::Euler;
  int gh_order = 8;
  double picard_tol = 1e-12;
  int picard_max = 50;
  bool s2_verbatim_weights = false;
  Extrapolation extrapolation = Extrapolation::LinearBoundary;
  CnZUpdate cn_z_update = CnZUpdate::AMatrix;
  // Solve implicit steps whose implicit part is declared affine in y in
  // closed form (zero sweeps) instead of by Picard iteration.
  bool direct_affine = false;
};

std::string_view to_string(Scheme s);
std::string_view to_string(ForwardScheme f);
Scheme parse_scheme(std::string_view s);
ForwardScheme parse_forward(std::string_view s);

/// Throws OddN, TooFewNodes, SingularDiffusion, OrderOutOfRange or
/// InvalidConfig; silent otherwise.
void validate(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg);

/// Inverse of a 1x1 or 2x2 matrix; SingularDiffusion when not invertible.
Mat invert_small(const Mat& m);

}  // namespace fbsde
