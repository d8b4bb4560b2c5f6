// fbsde: single solves and convergence sweeps for the benchmark problems.
//
//   fbsde solve --problem heston --scheme s1 --forward wt2 --n 64
//   fbsde convergence --problem sine2d --scheme cn --ns 8,16,32 --format markdown
//
// --config FILE reads key=value lines named after the long flags; flags given
// on the command line win.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbsde/error.hpp"
#include "fbsde/harness.hpp"
#include "fbsde/problems.hpp"

namespace {

using namespace fbsde;

struct Options {
  std::string problem = "heston";
  std::string scheme = "s1";
  std::string forward = "euler";
  int n = 64;
  std::vector<int> ns{16, 32, 64, 128};
  int gh_order = 8;
  std::string box;
  std::string x0;
  double picard_tol = 1e-12;
  int picard_max = 50;
  bool s2_verbatim_weights = false;
  std::string cn_z_update = "amatrix";
  std::string extrapolation = "linear";
  std::string error_norm = "point";
  std::string format = "csv";
  std::string out;
  int p_time = 0;
  bool no_timing = false;
  bool direct_affine = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorCode::InvalidConfig, "not a number: '" + s + "'");
  return v;
}

// "lo:hi" per axis, axes separated by commas.
Box parse_box(const std::string& s) {
  Box box;
  for (const auto& axis : split(s, ',')) {
    const auto bounds = split(axis, ':');
    if (bounds.size() != 2) throw Error(ErrorCode::InvalidConfig, "box axis must be lo:hi, got '" + axis + "'");
    box.push_back({to_double(bounds[0]), to_double(bounds[1])});
  }
  return box;
}

Vec parse_point(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.empty() || parts.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::InvalidConfig, "x0 must have 1 or 2 coordinates");
  }
  Vec x(static_cast<int>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) x(static_cast<int>(i)) = to_double(parts[i]);
  return x;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--problem", o.problem, "heston | sine2d | linear")->check(CLI::IsMember({"heston", "sine2d", "linear"}));
  cmd->add_option("--scheme", o.scheme, "s1 | s2 | cn")->check(CLI::IsMember({"s1", "s2", "cn"}));
  cmd->add_option("--forward", o.forward, "euler | milstein | wt2")->check(CLI::IsMember({"euler", "milstein", "wt2"}));
  cmd->add_option("--gh-order", o.gh_order, "Gauss-Hermite points per dimension");
  cmd->add_option("--box", o.box, "truncation box, lo:hi per axis, comma separated");
  cmd->add_option("--x0", o.x0, "evaluation point, comma separated");
  cmd->add_option("--picard-tol", o.picard_tol, "absolute Picard tolerance (max norm)");
  cmd->add_option("--picard-max", o.picard_max, "Picard sweep cap per level");
  cmd->add_flag("--s2-verbatim-weights", o.s2_verbatim_weights, "use dt/2 weights in the S2 Y update");
  cmd->add_option("--cn-z-update", o.cn_z_update, "Z update of the CN reference: amatrix | malliavin")
      ->check(CLI::IsMember({"amatrix", "malliavin"}));
  cmd->add_option("--extrapolation", o.extrapolation, "linear | clamp")->check(CLI::IsMember({"linear", "clamp"}));
  cmd->add_option("--error-norm", o.error_norm, "point | l2")->check(CLI::IsMember({"point", "l2"}));
  cmd->add_option("--format", o.format, "csv | markdown")->check(CLI::IsMember({"csv", "markdown"}));
  cmd->add_option("--out", o.out, "output file (stdout when omitted)");
  cmd->add_option("--p-time", o.p_time, "override the nominal time order in the spatial step law (1 or 2)");
  cmd->add_flag("--direct-affine", o.direct_affine,
                "solve implicit steps that are affine in y in closed form instead of by Picard");
  cmd->add_flag("--no-timing", o.no_timing, "write NA instead of wallclock times");
}

// Config entries become "--key=value" arguments placed before the user's
// own flags, skipping keys the user already passed.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty() || rest.empty()) return rest;

  const auto given = [&](const std::string& key) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> merged{rest.front()};
  for (const auto& [key, value] : read_config_file(path)) {
    if (key == "config" || given(key)) continue;
    merged.push_back("--" + key + "=" + value);
  }
  merged.insert(merged.end(), rest.begin() + 1, rest.end());
  return merged;
}

SchemeConfig make_config(const Options& o) {
  SchemeConfig cfg;
  cfg.scheme = parse_scheme(o.scheme);
  cfg.forward = parse_forward(o.forward);
  cfg.gh_order = o.gh_order;
  cfg.picard_tol = o.picard_tol;
  cfg.picard_max = o.picard_max;
  cfg.s2_verbatim_weights = o.s2_verbatim_weights;
  cfg.direct_affine = o.direct_affine;
  cfg.cn_z_update = o.cn_z_update == "malliavin" ? CnZUpdate::Malliavin : CnZUpdate::AMatrix;
  cfg.extrapolation = o.extrapolation == "clamp" ? Extrapolation::Clamp : Extrapolation::LinearBoundary;
  return cfg;
}

RunOptions make_run_options(const Options& o) {
  RunOptions r;
  if (!o.box.empty()) r.box = parse_box(o.box);
  if (!o.x0.empty()) r.x0 = parse_point(o.x0);
  if (o.p_time != 0) r.p_time = o.p_time;
  r.norm = parse_error_norm(o.error_norm);
  return r;
}

template <class Write>
void write_output(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw Error(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating-split FBSDE solvers: single solves and convergence sweeps"};
  app.require_subcommand(1);

  Options solve_opts, conv_opts;
  auto* solve_cmd = app.add_subcommand("solve", "solve once and report (Y, Z) at x0");
  add_common(solve_cmd, solve_opts);
  solve_cmd->add_option("--n", solve_opts.n, "number of time steps (even)");

  auto* conv_cmd = app.add_subcommand("convergence", "sweep N and fit convergence rates");
  add_common(conv_cmd, conv_opts);
  conv_cmd->add_option("--ns", conv_opts.ns, "time step counts (even)")->delimiter(',');

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return 2;
  }

  try {
    configure_threads();
    if (solve_cmd->parsed()) {
      const auto problem = make_problem(solve_opts.problem);
      const auto result = solve(problem, make_config(solve_opts), solve_opts.n, make_run_options(solve_opts));
      const EmitOptions eo{!solve_opts.no_timing};
      write_output(solve_opts.out,
                   [&](std::ostream& os) { emit_solve(result, parse_format(solve_opts.format), os, eo); });
    } else {
      const auto problem = make_problem(conv_opts.problem);
      const auto report =
          run_convergence(problem, make_config(conv_opts), conv_opts.ns, make_run_options(conv_opts));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      const EmitOptions eo{!conv_opts.no_timing};
      write_output(conv_opts.out,
                   [&](std::ostream& os) { emit(report, parse_format(conv_opts.format), os, eo); });
    }
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
