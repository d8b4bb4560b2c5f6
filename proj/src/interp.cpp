#include "fbsde/interp.hpp"

#include <cmath>

#include "fbsde/error.hpp"

namespace fbsde {

namespace {

// Thomas factorization of the not-a-knot slope system on a uniform axis:
//   m_0 + 2 m_1                 = (-5 f_0 + 4 f_1 + f_2) / (2h)
//   m_{i-1} + 4 m_i + m_{i+1}   = 3 (f_{i+1} - f_{i-1}) / h
//   2 m_{n-2} + m_{n-1}         = (5 f_{n-1} - 4 f_{n-2} - f_{n-3}) / (2h)
// The end rows make the third derivative continuous at the first and last
// interior knots.
class NotAKnotSolver {
 public:
  NotAKnotSolver(std::size_t n, double h) : n_(n), h_(h), upper_(n), inv_pivot_(n), lower_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      double a = 1.0, b = 4.0, c = 1.0;
      if (i == 0) {
        a = 0.0, b = 1.0, c = 2.0;
      } else if (i == n - 1) {
        a = 2.0, b = 1.0, c = 0.0;
      }
      const double pivot = i == 0 ? b : b - a * upper_[i - 1];
      inv_pivot_[i] = 1.0 / pivot;
      upper_[i] = c / pivot;
      lower_[i] = a;
    }
  }

  // Slopes of the values f[k * stride], k < n, written to m[k * stride].
  void solve(const double* f, double* m, std::size_t stride) const {
    const auto F = [&](std::size_t k) { return f[k * stride]; };
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      double rhs;
      if (i == 0) {
        rhs = (-5.0 * F(0) + 4.0 * F(1) + F(2)) / (2.0 * h_);
      } else if (i == n - 1) {
        rhs = (5.0 * F(n - 1) - 4.0 * F(n - 2) - F(n - 3)) / (2.0 * h_);
      } else {
        rhs = 3.0 * (F(i + 1) - F(i - 1)) / h_;
      }
      const double prev = i == 0 ? 0.0 : m[(i - 1) * stride];
      m[i * stride] = (rhs - lower_[i] * prev) * inv_pivot_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) m[i * stride] -= upper_[i] * m[(i + 1) * stride];
  }

 private:
  std::size_t n_;
  double h_;
  std::vector<double> upper_, inv_pivot_, lower_;
};

}  // namespace

SplineInterpolant::SplineInterpolant(std::shared_ptr<const SpatialGrid> grid, std::size_t components,
                                     Extrapolation policy)
    : grid_(std::move(grid)),
      components_(components),
      policy_(policy),
      stride_(components * (grid_->dim() == 1 ? 2 : 4)),
      data_(grid_->size() * stride_, 0.0) {}

SplineInterpolant fit(const GridField& field, Extrapolation policy) {
  const SpatialGrid& g = *field.grid();
  for (int i = 0; i < g.dim(); ++i) {
    if (g.axis(i).count < 4) {
      throw Error(ErrorCode::TooFewNodes, "cubic spline needs at least 4 nodes per axis");
    }
  }
  SplineInterpolant s(field.grid(), field.components(), policy);
  const std::size_t nc = field.components();
  const std::size_t stride = s.stride_;
  double* d = s.data_.data();
  const std::size_t kinds = g.dim() == 1 ? 2 : 4;
  // slot(node, c, kind) = node * stride + c * kinds + kind
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (std::size_t c = 0; c < nc; ++c) d[node * stride + c * kinds] = field.at(node, c);
  }

  if (g.dim() == 1) {
    const NotAKnotSolver sx(g.axis(0).count, g.axis(0).step);
    for (std::size_t c = 0; c < nc; ++c) sx.solve(d + c * kinds, d + c * kinds + 1, stride);
    return s;
  }

  const std::size_t n0 = g.axis(0).count, n1 = g.axis(1).count;
  const NotAKnotSolver sx(n0, g.axis(0).step);
  const NotAKnotSolver sy(n1, g.axis(1).step);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t off = c * kinds;
    // f_y along axis 1 for every row i
    for (std::size_t i = 0; i < n0; ++i) {
      double* row = d + i * n1 * stride + off;
      sy.solve(row, row + 2, stride);
    }
    // f_x from f and f_xy from f_y along axis 0 for every column j
    for (std::size_t j = 0; j < n1; ++j) {
      double* col = d + j * stride + off;
      sx.solve(col, col + 1, n1 * stride);
      sx.solve(col + 2, col + 3, n1 * stride);
    }
  }
  return s;
}

SplineInterpolant::AxisWeights SplineInterpolant::axis_weights(int axis, double x) const {
  const Axis& ax = grid_->axis(axis);
  const double h = ax.step;
  const std::size_t last_cell = ax.count - 2;
  AxisWeights w{};
  if (x < ax.lo) {
    w.cell = 0;
    w.value[0] = 1.0;
    w.slope[0] = policy_ == Extrapolation::LinearBoundary ? x - ax.lo : 0.0;
    return w;
  }
  const double hi = ax.hi();
  if (x > hi) {
    w.cell = last_cell;
    w.value[1] = 1.0;
    w.slope[1] = policy_ == Extrapolation::LinearBoundary ? x - hi : 0.0;
    return w;
  }
  const double u = (x - ax.lo) / h;
  std::size_t cell = static_cast<std::size_t>(std::floor(u));
  if (cell > last_cell) cell = last_cell;
  const double t = u - static_cast<double>(cell);
  const double omt = 1.0 - t;
  w.cell = cell;
  w.value[0] = (1.0 + 2.0 * t) * omt * omt;
  w.slope[0] = h * t * omt * omt;
  w.value[1] = t * t * (3.0 - 2.0 * t);
  w.slope[1] = -h * t * t * omt;
  return w;
}

void SplineInterpolant::eval(const Vec& x, std::span<double> out) const {
  const double* d = data_.data();
  if (grid_->dim() == 1) {
    const AxisWeights wx = axis_weights(0, x(0));
    const double* p0 = d + wx.cell * stride_;
    const double* p1 = p0 + stride_;
    for (std::size_t c = 0; c < components_; ++c) {
      const std::size_t o = 2 * c;
      out[c] = wx.value[0] * p0[o] + wx.slope[0] * p0[o + 1] + wx.value[1] * p1[o] + wx.slope[1] * p1[o + 1];
    }
    return;
  }
  const AxisWeights wx = axis_weights(0, x(0));
  const AxisWeights wy = axis_weights(1, x(1));
  const std::size_t n1 = grid_->axis(1).count;
  for (std::size_t c = 0; c < components_; ++c) out[c] = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double* p = d + ((wx.cell + a) * n1 + wy.cell + b) * stride_;
      const double vv = wx.value[a] * wy.value[b];
      const double sv = wx.slope[a] * wy.value[b];
      const double vs = wx.value[a] * wy.slope[b];
      const double ss = wx.slope[a] * wy.slope[b];
      for (std::size_t c = 0; c < components_; ++c) {
        const double* q = p + 4 * c;
        out[c] += vv * q[0] + sv * q[1] + vs * q[2] + ss * q[3];
      }
    }
  }
}

double SplineInterpolant::eval(const Vec& x, std::size_t component) const {
  double buf[1 + kMaxDim * 4];
  std::vector<double> heap;
  std::span<double> out(buf, components_);
  if (components_ > std::size(buf)) {
    heap.resize(components_);
    out = heap;
  }
  eval(x, out);
  return out[component];
}

double eval(const SplineInterpolant& s, const Vec& x, std::size_t component) {
  return s.eval(x, component);
}

}  // namespace fbsde
