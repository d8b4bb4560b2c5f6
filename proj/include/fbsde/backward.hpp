#pragma once

#include <utility>
#include <vector>

#include "fbsde/forward.hpp"
#include "fbsde/interp.hpp"
#include "fbsde/model.hpp"
#include "fbsde/quadrature.hpp"

namespace fbsde {

struct StepStats {
  int picard_iters = 0;  // grid-wide sweeps
  double residual = 0.0; // final max-norm change of Y
  double wallclock = 0.0;
};

enum class Parity { Even, Odd };

inline Parity parity_of(int n) { return n % 2 == 0 ? Parity::Even : Parity::Odd; }

/// Z update variants: the A-matrix form (S1 and, by default, the CN
/// reference) and the Malliavin-derivative form (S2).
enum class ZForm { AMatrix, Malliavin };

/// Which part of the generator a Y update treats implicitly.
enum class ImplicitPart { F1, F2, Full };

/// Level-N fields: Y = Phi(x), Z = Phi_x(x) sigma(T, x).
LevelSolution terminal_fields(const FbsdeProblem& problem, const SpaceTimeGrid& grid);

/// Conditional moments of the level-(n+1) data seen from one node of level n.
struct NodeMoments {
  double ey = 0.0;   // E[Y^{n+1}]
  RowVec ey_dw;      // E[Y^{n+1} dW^T]
  RowVec ef_dw;      // E[f^{n+1} dW^T]
  double ef1 = 0.0;  // E[f1^{n+1}]
  double ef2 = 0.0;  // E[f2^{n+1}]
  RowVec z_corr;     // Z-form specific expectation, see LevelKernel::moments
};

/// Scalar fixed-point equation y = constant + weight * f_part(t_n, x, y, z).
struct ImplicitEquation {
  double constant = 0.0;
  double weight = 0.0;
  ImplicitPart part = ImplicitPart::F1;
};

/// Everything one node of level n needs: the problem, forward step,
/// quadrature stencil and the frozen interpolant of level n + 1 holding
/// (Y, Z_1, ..., Z_d). Pure; safe to call from any number of threads.
class LevelKernel {
 public:
  LevelKernel(const FbsdeProblem& problem, const ForwardStep& forward, const GaussianStencil& stencil,
              const SplineInterpolant& next, const SchemeConfig& cfg, const SpaceTimeGrid& grid, int level);

  int level() const { return level_; }
  double t() const { return t_; }
  double dt() const { return dt_; }

  /// One quadrature pass. z_corr is
  ///   AMatrix:   E[Z^{n+1} - Z^{n+1} (sigma^{n+1})^{-1} A^n sigma^n]
  ///   Malliavin: E[Z^{n+1} ((sigma^{n+1})^{-1} int D_s X^{n+1} ds - dt I)]
  /// and is exactly zero when the diffusion (and, for the A form, the
  /// drift) is constant.
  NodeMoments moments(const Vec& x, ZForm form) const;

  RowVec z_from(const NodeMoments& m, ZForm form) const;

  ImplicitEquation y_equation(const NodeMoments& m, Scheme scheme, Parity parity) const;
  double apply(const ImplicitEquation& eq, const Vec& x, double y, const RowVec& z) const;
  /// Explicit predictor: the equation evaluated at y = E[Y^{n+1}].
  double predictor(const ImplicitEquation& eq, const NodeMoments& m, const Vec& x, const RowVec& z) const;
  /// True when cfg.direct_affine is set and the implicit part is declared
  /// affine in y; solve_affine() then gives the fixed point directly.
  bool affine(const ImplicitEquation& eq) const;
  double solve_affine(const ImplicitEquation& eq, const Vec& x, const RowVec& z) const;

  RowVec z_update_s1(const Vec& x) const;
  RowVec z_update_s2(const Vec& x) const;

  /// Alternating-split Y update at a single node, solved by Picard iteration.
  std::pair<double, StepStats> y_update(const Vec& x, Parity parity, const RowVec& z_n) const;
  /// Trapezoidal (Crank-Nicolson) Y update with the full generator implicit.
  std::pair<double, StepStats> y_update_cn(const Vec& x, const RowVec& z_n) const;

 private:
  std::pair<double, StepStats> picard(const ImplicitEquation& eq, const NodeMoments& m, const Vec& x,
                                      const RowVec& z) const;

  const FbsdeProblem& problem_;
  const ForwardStep& forward_;
  const GaussianStencil& stencil_;
  const SplineInterpolant& next_;
  const SchemeConfig& cfg_;
  int level_;
  double t_, t_next_, dt_;
  bool zero_amatrix_corr_;
  bool zero_malliavin_corr_;
  Mat sigma_inv_const_;
};

ZForm z_form(const SchemeConfig& cfg);

/// Packs Y and Z of a level into one (1 + d)-component field and fits it.
SplineInterpolant fit_level(const LevelSolution& level, Extrapolation policy);

struct MarchResult {
  LevelSolution solution;         // level 0
  StepStats total;                // summed sweeps, max residual, total time
  std::vector<StepStats> levels;  // indexed by n
};

/// Backward march from level N to 0, node loops run with OpenMP.
MarchResult march(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg);

/// Single-threaded reference march. Produces bit-identical output to march().
MarchResult march_serial(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg);

}  // namespace fbsde
