#include "fbsde/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "fbsde/error.hpp"
#include "fbsde/interp.hpp"

namespace fbsde {

namespace {

constexpr double kNoiseFloor = 1e-12;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string short_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// RFC 4180: quote fields holding a separator, quote or line break.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
  out << "\r\n";
}

RateFit fit_column(const std::vector<double>& errors, const std::vector<double>& dts) {
  RateFit fit;
  if (errors.size() < 2) return fit;
  const double largest = *std::max_element(errors.begin(), errors.end());
  const bool has_zero = std::any_of(errors.begin(), errors.end(), [](double e) { return e <= 0.0; });
  if (largest < kNoiseFloor || has_zero) {
    fit.noise = true;
    return fit;
  }
  fit.value = fit_rate(errors, dts);
  return fit;
}

std::string rate_text(const RateFit& r, bool scientific) {
  if (r.noise) return "noise";
  if (!r.value) return "";
  return scientific ? sci(*r.value) : fixed(*r.value, 3);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double fit_rate(std::span<const double> errors, std::span<const double> dts) {
  if (errors.size() < 2 || errors.size() != dts.size()) {
    throw Error(ErrorCode::InsufficientPoints, "rate fit needs at least two (error, dt) pairs of equal count");
  }
  const auto n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(dts[i] > 0.0) || !std::isfinite(errors[i]) || !std::isfinite(dts[i])) {
      throw Error(ErrorCode::NonPositiveError, "rate fit needs positive finite errors and steps");
    }
    sx += std::log(dts[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double lx = std::log(dts[i]) - mx;
    sxx += lx * lx;
    sxy += lx * (std::log(errors[i]) - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientPoints, "rate fit needs at least two distinct steps");
  return sxy / sxx;
}

ErrorNorm parse_error_norm(std::string_view s) {
  if (s == "point") return ErrorNorm::Point;
  if (s == "l2") return ErrorNorm::L2;
  throw Error(ErrorCode::InvalidConfig, "unknown error norm '" + std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "markdown") return Format::Markdown;
  throw Error(ErrorCode::InvalidConfig, "unknown format '" + std::string(s) + "'");
}

int nominal_time_order(const FbsdeProblem& problem, ForwardScheme forward) {
  if (forward == ForwardScheme::WeakTaylor2) return 2;
  if (problem.constant_drift && problem.constant_diffusion) return 2;
  return 1;
}

SolveResult solve(const FbsdeProblem& problem, const SchemeConfig& cfg, int n, const RunOptions& opts) {
  const Box box = opts.box.value_or(problem.default_box);
  const Vec x0 = opts.x0.value_or(problem.default_x0);
  if (x0.size() != problem.dim_x) throw Error(ErrorCode::InvalidConfig, "x0 dimension does not match the problem");
  const int p = opts.p_time.value_or(nominal_time_order(problem, cfg.forward));
  const SpaceTimeGrid grid(problem.horizon, n, box, p);

  SolveResult r{n, grid.dt(), x0, 0.0, RowVec(), {}, {}, 0.0, {}, march(problem, grid, cfg)};

  const int d = problem.dim_x;
  const SplineInterpolant level0 = fit_level(r.march.solution, cfg.extrapolation);
  double vals[1 + kMaxDim];
  level0.eval(x0, std::span<double>(vals, static_cast<std::size_t>(1 + d)));
  r.y0 = vals[0];
  r.z0 = RowVec(d);
  for (int c = 0; c < d; ++c) r.z0(c) = vals[1 + c];
  r.err_z.assign(static_cast<std::size_t>(d), 0.0);
  if (!problem.analytic) return r;

  r.y_exact = problem.analytic->y(0.0, x0);
  r.z_exact = problem.analytic->z(0.0, x0);
  if (opts.norm == ErrorNorm::Point) {
    r.err_y = std::abs(r.y0 - *r.y_exact);
    for (int c = 0; c < d; ++c) r.err_z[static_cast<std::size_t>(c)] = std::abs(r.z0(c) - (*r.z_exact)(c));
    return r;
  }

  // Root mean square over nodes in the middle half of the box, away from
  // the extrapolation region.
  const SpatialGrid& space = *grid.space();
  double sum_y = 0.0;
  std::vector<double> sum_z(static_cast<std::size_t>(d), 0.0);
  std::size_t count = 0;
  for (std::size_t node = 0; node < space.size(); ++node) {
    const Vec x = space.point(node);
    bool inner = true;
    for (int i = 0; i < d; ++i) {
      const Axis& ax = space.axis(i);
      const double quarter = 0.25 * (ax.hi() - ax.lo);
      inner = inner && x(i) >= ax.lo + quarter && x(i) <= ax.hi() - quarter;
    }
    if (!inner) continue;
    ++count;
    const double ey = r.march.solution.y.at(node) - problem.analytic->y(0.0, x);
    sum_y += ey * ey;
    const RowVec z = problem.analytic->z(0.0, x);
    for (int c = 0; c < d; ++c) {
      const double ez = r.march.solution.z.at(node, static_cast<std::size_t>(c)) - z(c);
      sum_z[static_cast<std::size_t>(c)] += ez * ez;
    }
  }
  if (count == 0) throw Error(ErrorCode::TooFewNodes, "no grid nodes in the inner region for the L2 norm");
  r.err_y = std::sqrt(sum_y / static_cast<double>(count));
  for (int c = 0; c < d; ++c) {
    r.err_z[static_cast<std::size_t>(c)] = std::sqrt(sum_z[static_cast<std::size_t>(c)] / static_cast<double>(count));
  }
  return r;
}

ConvergenceReport run_convergence(const FbsdeProblem& problem, const SchemeConfig& cfg, std::span<const int> ns,
                                  const RunOptions& opts) {
  if (!problem.analytic) throw Error(ErrorCode::InvalidConfig, "convergence runs need an analytic solution");
  ConvergenceReport rep;
  rep.problem = problem.id;
  rep.scheme = cfg.scheme;
  rep.forward = cfg.forward;
  rep.norm = opts.norm;
  rep.dim = problem.dim_x;
  rep.x0 = opts.x0.value_or(problem.default_x0);

  std::vector<int> sorted(ns.begin(), ns.end());
  std::sort(sorted.begin(), sorted.end());
  for (int n : sorted) {
    const SolveResult r = [&] {
      try {
        return solve(problem, cfg, n, opts);
      } catch (const Error& e) {
        throw Error(e.code(), "N = " + std::to_string(n) + ": " + e.what());
      }
    }();
    rep.rows.push_back({n, r.dt, r.err_y, r.err_z, r.march.total.picard_iters, r.march.total.wallclock});
  }

  const std::size_t d = static_cast<std::size_t>(problem.dim_x);
  rep.cr_z.resize(d);
  if (rep.rows.size() >= 2) {
    std::vector<double> dts, ey;
    for (const auto& row : rep.rows) {
      dts.push_back(row.dt);
      ey.push_back(row.err_y);
    }
    rep.cr_y = fit_column(ey, dts);
    for (std::size_t c = 0; c < d; ++c) {
      std::vector<double> ez;
      for (const auto& row : rep.rows) ez.push_back(row.err_z[c]);
      rep.cr_z[c] = fit_column(ez, dts);
    }
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].runtime_s < rep.rows[i - 1].runtime_s) {
      rep.warnings.push_back("runtime at N = " + std::to_string(rep.rows[i].n) + " is below that at N = " +
                             std::to_string(rep.rows[i - 1].n));
    }
  }
  return rep;
}

void emit(const ConvergenceReport& report, Format format, std::ostream& out, const EmitOptions& opts) {
  const std::size_t d = static_cast<std::size_t>(report.dim);
  if (format == Format::Csv) {
    std::vector<std::string> header{"N", "dt", "errY"};
    for (std::size_t c = 0; c < d; ++c) header.push_back("errZ_" + std::to_string(c + 1));
    header.insert(header.end(), {"picard_total", "runtime_s"});
    csv_line(out, header);
    for (const auto& row : report.rows) {
      std::vector<std::string> f{std::to_string(row.n), sci(row.dt), sci(row.err_y)};
      for (double e : row.err_z) f.push_back(sci(e));
      f.push_back(std::to_string(row.picard_total));
      f.push_back(opts.runtime ? sci(row.runtime_s) : "NA");
      csv_line(out, f);
    }
    if (report.rows.size() >= 2) {
      std::vector<std::string> f{"CR", "", rate_text(report.cr_y, true)};
      for (const auto& r : report.cr_z) f.push_back(rate_text(r, true));
      f.insert(f.end(), {"", ""});
      csv_line(out, f);
    }
    return;
  }

  out << "**" << report.problem << " / " << to_string(report.scheme) << " / " << to_string(report.forward)
      << "** (" << (report.norm == ErrorNorm::Point ? "point error at x0" : "inner-grid L2 error") << ")\n\n";
  out << "| N | dt | \\|Y0-Y^0\\|";
  for (std::size_t c = 0; c < d; ++c) out << " | \\|Z0_" << c + 1 << "-Z^0_" << c + 1 << "\\|";
  out << " | Picard | RT (s) |\n|---|---|---";
  for (std::size_t c = 0; c < d; ++c) out << "|---";
  out << "|---|---|\n";
  for (const auto& row : report.rows) {
    out << "| " << row.n << " | 1/" << row.n << " | " << short_sci(row.err_y);
    for (double e : row.err_z) out << " | " << short_sci(e);
    out << " | " << row.picard_total << " | " << (opts.runtime ? fixed(row.runtime_s, 3) : "NA") << " |\n";
  }
  if (report.rows.size() >= 2) {
    out << "| CR | | **" << rate_text(report.cr_y, false) << "**";
    for (const auto& r : report.cr_z) out << " | **" << rate_text(r, false) << "**";
    out << " | | |\n";
  }
}

void emit(const ConvergenceReport& report, Format format, const std::string& path, const EmitOptions& opts) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  emit(report, format, file, opts);
  file.flush();
  if (!file) throw Error(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

void emit_solve(const SolveResult& r, Format format, std::ostream& out, const EmitOptions& opts) {
  const auto d = static_cast<int>(r.z0.size());
  std::vector<std::pair<std::string, std::string>> kv{{"N", std::to_string(r.n)}, {"dt", sci(r.dt)}};
  for (int i = 0; i < d; ++i) kv.emplace_back("x0_" + std::to_string(i + 1), sci(r.x0(i)));
  kv.emplace_back("Y0", sci(r.y0));
  for (int c = 0; c < d; ++c) kv.emplace_back("Z0_" + std::to_string(c + 1), sci(r.z0(c)));
  if (r.y_exact) {
    kv.emplace_back("Y_exact", sci(*r.y_exact));
    for (int c = 0; c < d; ++c) kv.emplace_back("Z_exact_" + std::to_string(c + 1), sci((*r.z_exact)(c)));
    kv.emplace_back("errY", sci(r.err_y));
    for (int c = 0; c < d; ++c) kv.emplace_back("errZ_" + std::to_string(c + 1), sci(r.err_z[static_cast<std::size_t>(c)]));
  }
  kv.emplace_back("picard_total", std::to_string(r.march.total.picard_iters));
  kv.emplace_back("runtime_s", opts.runtime ? sci(r.march.total.wallclock) : "NA");

  if (format == Format::Csv) {
    std::vector<std::string> keys, vals;
    for (auto& [k, v] : kv) {
      keys.push_back(k);
      vals.push_back(v);
    }
    csv_line(out, keys);
    csv_line(out, vals);
    return;
  }
  out << "| quantity | value |\n|---|---|\n";
  for (auto& [k, v] : kv) out << "| " << k << " | " << v << " |\n";
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

int configure_threads() {
  const char* env = std::getenv("FBSDE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw Error(ErrorCode::InvalidConfig, "FBSDE_THREADS must be a non-negative integer");
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
  return static_cast<int>(n);
}

}  // namespace fbsde
