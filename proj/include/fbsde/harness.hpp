#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbsde/backward.hpp"
#include "fbsde/model.hpp"

namespace fbsde {

/// Least-squares slope of log(error) against log(dt).
/// InsufficientPoints for fewer than two pairs or mismatched lengths,
/// NonPositiveError for a non-positive or non-finite entry.
double fit_rate(std::span<const double> errors, std::span<const double> dts);

enum class ErrorNorm { Point, L2 };
enum class Format { Csv, Markdown };

ErrorNorm parse_error_norm(std::string_view s);
Format parse_format(std::string_view s);

/// Fitted convergence rate of one error column. `noise` marks columns whose
/// errors sit at round-off level, where a slope means nothing.
struct RateFit {
  std::optional<double> value;
  bool noise = false;
};

struct ConvergenceRow {
  int n = 0;
  double dt = 0.0;
  double err_y = 0.0;
  std::vector<double> err_z;
  long picard_total = 0;
  double runtime_s = 0.0;
};

struct ConvergenceReport {
  std::string problem;
  Scheme scheme = Scheme::S1;
  ForwardScheme forward = ForwardScheme::Euler;
  ErrorNorm norm = ErrorNorm::Point;
  int dim = 1;
  Vec x0;
  std::vector<ConvergenceRow> rows;  // ascending N
  RateFit cr_y;
  std::vector<RateFit> cr_z;
  std::vector<std::string> warnings;
};

struct RunOptions {
  std::optional<Vec> x0;     // problem default when empty
  std::optional<Box> box;    // problem default when empty
  std::optional<int> p_time; // nominal_time_order() when empty
  ErrorNorm norm = ErrorNorm::Point;
};

/// Nominal time order used for the spatial step: 2 for the weak order-2
/// forward scheme or when every forward scheme is exact, 1 otherwise.
int nominal_time_order(const FbsdeProblem& problem, ForwardScheme forward);

struct SolveResult {
  int n = 0;
  double dt = 0.0;
  Vec x0;
  double y0 = 0.0;
  RowVec z0;
  std::optional<double> y_exact;
  std::optional<RowVec> z_exact;
  double err_y = 0.0;
  std::vector<double> err_z;
  MarchResult march;
};

/// One solve at N steps; errors are filled when the problem has an oracle.
SolveResult solve(const FbsdeProblem& problem, const SchemeConfig& cfg, int n, const RunOptions& opts = {});

/// Solves for every N and fits a rate per error column. Errors raised by the
/// solver are re-thrown tagged with the N that failed.
ConvergenceReport run_convergence(const FbsdeProblem& problem, const SchemeConfig& cfg, std::span<const int> ns,
                                  const RunOptions& opts = {});

struct EmitOptions {
  bool runtime = true;  // false writes NA, for byte-comparable output
};

void emit(const ConvergenceReport& report, Format format, std::ostream& out, const EmitOptions& opts = {});
/// Writes to a file; IoFailure when it cannot be written.
void emit(const ConvergenceReport& report, Format format, const std::string& path, const EmitOptions& opts = {});

void emit_solve(const SolveResult& result, Format format, std::ostream& out, const EmitOptions& opts = {});

/// Flat key=value lines; '#' starts a comment, blank lines are skipped.
/// IoFailure if the file cannot be read, InvalidConfig on a malformed line.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Caps OpenMP workers from FBSDE_THREADS (0 or unset = runtime default).
/// Returns the cap applied, 0 for none.
int configure_threads();

}  // namespace fbsde
