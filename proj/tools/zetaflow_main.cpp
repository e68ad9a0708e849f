#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zetaflow/zetaflow.hpp"

namespace {

using namespace zetaflow;

// usage-class failures exit 2, numeric failures exit 3
int exit_code_for(const Error& e) {
  if (dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const NotPrime*>(&e) ||
      dynamic_cast<const NotSymmetric*>(&e) ||
      dynamic_cast<const NotInNullSpace*>(&e) ||
      dynamic_cast<const ConstructionUnvalidated*>(&e) ||
      dynamic_cast<const NoFlowParameter*>(&e) ||
      dynamic_cast<const WrongFlow*>(&e))
    return 2;
  return 3;
}

double tolerance_or(double fallback) {
  const char* env = std::getenv("ZETAFLOW_TOL");
  if (!env) return fallback;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0))
    throw InvalidArgument("ZETAFLOW_TOL must be a positive number");
  return v;
}

std::vector<double> parse_doubles(const std::string& text, std::size_t want,
                                  const char* what) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw InvalidArgument(std::string("bad number in ") + what + ": " +
                            token);
    out.push_back(v);
  }
  if (want != 0 && out.size() != want)
    throw InvalidArgument(std::string(what) + " needs " +
                          std::to_string(want) + " comma-separated values");
  if (out.empty())
    throw InvalidArgument(std::string(what) + " is empty");
  return out;
}

// selections look like "30..43", "5", or "1,3,5" (1-based)
std::vector<std::size_t> parse_selection(const std::string& text) {
  std::vector<std::size_t> out;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    const auto dots = token.find("..");
    auto to_index = [&](const std::string& part) -> std::size_t {
      char* end = nullptr;
      const long v = std::strtol(part.c_str(), &end, 10);
      if (end == part.c_str() || *end != '\0' || v < 1)
        throw InvalidArgument("bad zero selection: " + token);
      return static_cast<std::size_t>(v);
    };
    if (dots == std::string::npos) {
      out.push_back(to_index(token));
    } else {
      const std::size_t a = to_index(token.substr(0, dots));
      const std::size_t b = to_index(token.substr(dots + 2));
      if (b < a) throw InvalidArgument("bad zero selection: " + token);
      for (std::size_t k = a; k <= b; ++k) out.push_back(k);
    }
  }
  if (out.empty()) throw InvalidArgument("empty zero selection");
  return out;
}

CombinationSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open family spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("bad family spec JSON: " + std::string(e.what()));
  }
  return spec_from_json(j);
}

void print_eval(const EvalResult& r) {
  std::printf("%s %s %s\n", format_double(r.value.real()).c_str(),
              format_double(r.value.imag()).c_str(),
              format_double(r.est_abs_error).c_str());
}

int run_eval(const std::string& s_text, std::optional<double> alpha,
             const std::string& spec_path, const std::string& deriv) {
  const double tol = tolerance_or(kDefaultTolerance);
  const ComplexPoint s = parse_complex(s_text);
  if (alpha && !spec_path.empty())
    throw InvalidArgument("--alpha and --family-spec are exclusive");
  if (alpha) {
    if (deriv.empty())
      print_eval(hurwitz_zeta(s, *alpha, tol));
    else if (deriv == "s")
      print_eval(hurwitz_zeta_s_derivative(s, *alpha, tol));
    else if (deriv == "alpha" || deriv == "param")
      print_eval(hurwitz_zeta_alpha_derivative(s, *alpha, tol));
    else
      throw InvalidArgument("--deriv must be s, alpha, or param");
    return 0;
  }
  if (spec_path.empty())
    throw InvalidArgument("one of --alpha or --family-spec is required");
  const CombinationSpec spec = load_spec(spec_path);
  if (deriv.empty()) {
    print_eval(evaluate_combination(spec, s, tol));
  } else if (deriv == "s") {
    print_eval(make_target(spec, tol).df(s));
  } else if (deriv == "param" ||
             (deriv == "alpha" && spec.family.tag == FamilyTag::Hurwitz)) {
    print_eval(combination_param_derivative(spec, s, tol));
  } else {
    throw InvalidArgument("--deriv must be s, alpha, or param");
  }
  return 0;
}

TargetFunction make_cli_target(std::optional<double> alpha,
                               const std::string& spec_path, double tol) {
  if (alpha && !spec_path.empty())
    throw InvalidArgument("--alpha and --family-spec are exclusive");
  if (alpha) return make_target_hurwitz(*alpha, tol);
  if (spec_path.empty())
    throw InvalidArgument("one of --alpha or --family-spec is required");
  return make_target(load_spec(spec_path), tol);
}

int run_scan(const std::string& rect_text, std::optional<double> alpha,
             const std::string& spec_path, const std::string& out_path) {
  const double tol = tolerance_or(1e-9);
  const auto r = parse_doubles(rect_text, 4, "--rect");
  const Rectangle rect{r[0], r[1], r[2], r[3]};
  rect.validate();
  const TargetFunction target = make_cli_target(alpha, spec_path, tol);
  const auto zeros = find_zeros(target, rect);
  int winding = 0;
  for (const auto& z : zeros) winding += z.multiplicity;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidArgument("cannot open output file: " + out_path);
    write_zeros_csv(out, zeros);
  } else {
    write_zeros_csv(std::cout, zeros);
  }
  std::printf("%zu %d\n", zeros.size(), winding);
  return 0;
}

int run_count(double alpha, double tmax, bool sweep,
              const std::string& out_path) {
  const double tol = tolerance_or(1e-9);
  if (!(tmax > 0.0) || tmax > 500.0)
    throw InvalidArgument("--tmax must lie in (0, 500]");
  if (sweep) {
    std::ostringstream rows;
    rows << "tmax,predicted,actual,deviation\n";
    for (double T = 10.0; T <= tmax + 1e-9; T += 10.0) {
      const CountComparison c = compare_counts(alpha, T, tol);
      rows << format_double(T) << ',' << format_double(c.predicted) << ','
           << c.actual << ',' << format_double(c.deviation) << '\n';
    }
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw InvalidArgument("cannot open output file: " + out_path);
      out << rows.str();
    } else {
      std::cout << rows.str();
    }
    return 0;
  }
  const CountComparison c = compare_counts(alpha, tmax, tol);
  std::printf("predicted=%s actual=%d deviation=%s\n",
              format_double(c.predicted).c_str(), c.actual,
              format_double(c.deviation).c_str());
  return 0;
}

// smallest T whose formula count reaches the requested rank, then scan
std::vector<ZeroRecord> seed_scan_hurwitz(double alpha, std::size_t max_index,
                                          double tol) {
  const double want = static_cast<double>(max_index) + 2.0;
  double lo = 1.0, hi = 8.0;
  while (count_formula(hi, alpha) < want && hi < 4000.0) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (count_formula(mid, alpha) < want ? lo : hi) = mid;
  }
  const TargetFunction target = make_target_hurwitz(alpha, tol);
  double T = hi;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const Rectangle rect{-1.0, 3.0, 1e-4, T};
    auto zeros = find_zeros(target, rect);
    if (zeros.size() >= max_index) return zeros;
    T *= 1.2;
  }
  throw LostZero("seed scan found fewer zeros than requested");
}

int run_track(const std::string& family, std::optional<double> from_opt,
              std::optional<double> to_opt, const std::string& zeros_sel,
              int turns, const std::string& window_text, double epsilon,
              int p, const std::string& x_text, const std::string& out_path,
              const std::string& svg_path) {
  const double tol = tolerance_or(1e-9);
  StepControl ctrl;
  ctrl.eval_tol = tol;

  std::optional<ZeroFlow> flow;
  double from = 0.0, to = 0.0;
  if (family == "hurwitz") {
    flow = ZeroFlow::hurwitz();
    from = from_opt.value_or(1.0);
    to = to_opt.value_or(0.01);
    if (!(from > 0.0) || from > 1.0 || !(to > 0.0) || to > 1.0)
      throw InvalidArgument("alpha range must lie in (0, 1]");
  } else if (family == "psi5o") {
    flow = ZeroFlow::psi5_odd();
    from = from_opt.value_or(beta_circle_angle_plus_i());
    to = to_opt.value_or(from + 2.0 * std::numbers::pi * turns);
  } else if (family == "psie5") {
    flow = epsilon == 0.0 ? ZeroFlow::psi5_even_circle()
                          : ZeroFlow::psi5_even_perturbed(epsilon);
    from = from_opt.value_or(0.0);
    to = to_opt.value_or(from + 2.0 * std::numbers::pi * turns);
  } else if (family == "psip") {
    std::vector<double> x;
    if (!x_text.empty()) {
      x = parse_doubles(x_text, 0, "--X");
    } else {
      const SymmetryMatrix sym = symmetry_matrix(p);
      if (sym.nullity < 1) throw NotInNullSpace("null space is empty");
      x.assign(sym.null_basis.col(0).data(),
               sym.null_basis.col(0).data() + sym.null_basis.rows());
    }
    flow = ZeroFlow::psi_prime(p, epsilon, x);
    from = from_opt.value_or(0.0);
    to = to_opt.value_or(from + 2.0 * std::numbers::pi * turns);
  } else {
    throw InvalidArgument("--family must be hurwitz, psi5o, psie5, or psip");
  }

  // seeds come from a scan at the start parameter
  std::vector<ComplexPoint> seeds;
  if (family == "hurwitz") {
    if (zeros_sel.empty())
      throw InvalidArgument("--zeros is required for the hurwitz family");
    const auto indices = parse_selection(zeros_sel);
    std::size_t max_index = 0;
    for (const auto k : indices) max_index = std::max(max_index, k);
    const auto zeros = seed_scan_hurwitz(from, max_index, tol);
    for (const auto k : indices) {
      if (k > zeros.size()) throw LostZero("zero index beyond scanned range");
      seeds.push_back(zeros[k - 1].location);
    }
  } else {
    const auto win = parse_doubles(
        window_text.empty() ? "0,40" : window_text, 2, "--window");
    const Rectangle rect{-1.0, 2.0, std::max(win[0], 1e-4), win[1]};
    rect.validate();
    const TargetFunction target =
        make_target(*flow, ComplexPoint(from, 0.0), tol);
    auto zeros = find_zeros(target, rect);
    if (!zeros_sel.empty()) {
      for (const auto k : parse_selection(zeros_sel)) {
        if (k > zeros.size())
          throw LostZero("zero index beyond scanned range");
        seeds.push_back(zeros[k - 1].location);
      }
    } else {
      for (const auto& z : zeros) seeds.push_back(z.location);
    }
  }
  if (seeds.empty()) throw LostZero("no seed zeros in the requested window");

  std::vector<Trajectory> trajs;
  int lost = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      trajs.push_back(track_zero(*flow, seeds[i], from, to, ctrl));
    } catch (const LostZero& e) {
      std::fprintf(stderr, "trajectory %zu lost: %s\n", i, e.what());
      ++lost;
    }
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidArgument("cannot open output file: " + out_path);
    write_trajectories_csv(out, trajs);
    const auto dot = out_path.find_last_of('.');
    const std::string sidecar =
        (dot == std::string::npos ? out_path : out_path.substr(0, dot)) +
        ".events.json";
    std::ofstream ev(sidecar);
    if (!ev) throw InvalidArgument("cannot open output file: " + sidecar);
    ev << events_to_json(trajs).dump(2) << '\n';
  } else {
    write_trajectories_csv(std::cout, trajs);
  }
  if (!svg_path.empty()) {
    std::vector<SvgSeries> series;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      SvgSeries s;
      s.label = "zero" + std::to_string(i);
      for (const auto& sample : trajs[i].samples) {
        const double y =
            sample.scaled_t ? *sample.scaled_t : sample.z.imag();
        s.points.emplace_back(sample.param, y);
      }
      series.push_back(std::move(s));
    }
    std::ofstream svg(svg_path);
    if (!svg) throw InvalidArgument("cannot open output file: " + svg_path);
    const bool scaled = family == "hurwitz";
    write_svg(svg, series, flow->parameter_name(),
              scaled ? "scaled ordinate" : "t");
  }
  std::printf("tracked=%zu lost=%d\n", trajs.size(), lost);
  return lost > 0 ? 3 : 0;
}

int run_nullspace(std::optional<int> p_opt, std::optional<int> up_to,
                  bool basis) {
  if (!p_opt && !up_to)
    throw InvalidArgument("one of --p or --primes-up-to is required");
  std::vector<int> ps;
  if (p_opt) ps.push_back(*p_opt);
  if (up_to)
    for (int q = 5; q <= *up_to; ++q)
      if (zetaflow::detail::is_prime(q)) ps.push_back(q);
  for (const int q : ps) {
    const SymmetryMatrix sym = symmetry_matrix(q);
    const int order = (q - 1) / 2;
    std::printf("p=%d order=%d rank=%d nullity=%d p-4r=%d\n", q, order,
                sym.rank, sym.nullity, q - 4 * sym.rank);
    if (basis) {
      for (int j = 0; j < sym.nullity; ++j) {
        std::string line = "x";
        for (int k = 0; k < order; ++k)
          line += " " + format_double(sym.null_basis(k, j));
        std::printf("%s\n", line.c_str());
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hurwitz zeta evaluation, zero scanning, counting, and "
               "zero-trajectory tracking"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "evaluate a function at one point");
  std::string ev_s, ev_spec, ev_deriv;
  std::optional<double> ev_alpha;
  eval->add_option("--s", ev_s, "complex point a+bi")->required();
  eval->add_option("--alpha", ev_alpha, "Hurwitz parameter in (0,1]");
  eval->add_option("--family-spec", ev_spec, "combination spec JSON file");
  eval->add_option("--deriv", ev_deriv, "derivative: s, alpha, or param");

  auto* scan = app.add_subcommand("scan", "find all zeros in a rectangle");
  std::string sc_rect, sc_spec, sc_out;
  std::optional<double> sc_alpha;
  scan->add_option("--rect", sc_rect, "sigma_min,sigma_max,t_min,t_max")
      ->required();
  scan->add_option("--alpha", sc_alpha, "Hurwitz parameter in (0,1]");
  scan->add_option("--family-spec", sc_spec, "combination spec JSON file");
  scan->add_option("--out", sc_out, "CSV output path");

  auto* count = app.add_subcommand("count", "compare zero count to formula");
  double ct_alpha = 1.0, ct_tmax = 100.0;
  bool ct_sweep = false;
  std::string ct_out;
  count->add_option("--alpha", ct_alpha, "Hurwitz parameter in (0,1]")
      ->required();
  count->add_option("--tmax", ct_tmax, "top of the counting window (<=500)")
      ->required();
  count->add_flag("--sweep", ct_sweep, "emit one row per 10 units of height");
  count->add_option("--out", ct_out, "CSV output path for --sweep");

  auto* track = app.add_subcommand("track", "follow zeros along a flow");
  std::string tr_family = "hurwitz", tr_zeros, tr_window, tr_x, tr_out,
              tr_svg;
  std::optional<double> tr_from, tr_to;
  int tr_turns = 1, tr_p = 7;
  double tr_eps = 0.0;
  track->add_option("--family", tr_family, "hurwitz, psi5o, psie5, or psip")
      ->required();
  track->add_option("--from", tr_from, "start parameter");
  track->add_option("--to", tr_to, "end parameter");
  track->add_option("--zeros", tr_zeros, "selection like 30..43 or 1,3");
  track->add_option("--turns", tr_turns, "full parameter turns (families)");
  track->add_option("--window", tr_window, "t window a,b for seed scan");
  track->add_option("--epsilon", tr_eps, "perturbation strength");
  track->add_option("--p", tr_p, "prime modulus for psip");
  track->add_option("--X", tr_x, "null-space coefficients for psip");
  track->add_option("--out", tr_out, "trajectory CSV path");
  track->add_option("--svg", tr_svg, "polyline SVG path");

  auto* nullspace =
      app.add_subcommand("nullspace", "symmetry-matrix rank table");
  std::optional<int> ns_p, ns_up_to;
  bool ns_basis = false;
  nullspace->add_option("--p", ns_p, "single odd prime >= 5");
  nullspace->add_option("--primes-up-to", ns_up_to, "all primes 5..n");
  nullspace->add_flag("--basis", ns_basis, "print null-space basis vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eval->parsed()) return run_eval(ev_s, ev_alpha, ev_spec, ev_deriv);
    if (scan->parsed()) return run_scan(sc_rect, sc_alpha, sc_spec, sc_out);
    if (count->parsed()) return run_count(ct_alpha, ct_tmax, ct_sweep, ct_out);
    if (track->parsed())
      return run_track(tr_family, tr_from, tr_to, tr_zeros, tr_turns,
                       tr_window, tr_eps, tr_p, tr_x, tr_out, tr_svg);
    if (nullspace->parsed()) return run_nullspace(ns_p, ns_up_to, ns_basis);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 2;
}
