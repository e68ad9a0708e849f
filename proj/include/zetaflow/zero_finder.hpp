#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "zetaflow/combination.hpp"
#include "zetaflow/errors.hpp"
#include "zetaflow/families.hpp"
#include "zetaflow/format.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

struct Rectangle {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  void validate() const {
    if (!(sigma_min < sigma_max) || !(t_min < t_max))
      throw InvalidArgument("degenerate rectangle");
  }
  bool contains(ComplexPoint z, double margin = 0.0) const {
    return z.real() > sigma_min - margin && z.real() < sigma_max + margin &&
           z.imag() > t_min - margin && z.imag() < t_max + margin;
  }
  double width() const { return sigma_max - sigma_min; }
  double height() const { return t_max - t_min; }
  double diameter() const { return std::max(width(), height()); }
  ComplexPoint center() const {
    return {0.5 * (sigma_min + sigma_max), 0.5 * (t_min + t_max)};
  }
};

struct ZeroRecord {
  ComplexPoint location;
  int multiplicity = 1;
  double residual = 0.0;
  std::string function_id;
};

// Evaluable target for the argument-principle machinery. The pole-removed
// pair computes (s-1) times the function and stays analytic through s = 1.
struct TargetFunction {
  std::function<EvalResult(ComplexPoint)> f;
  std::function<EvalResult(ComplexPoint)> df;
  std::function<EvalResult(ComplexPoint)> f_rm;
  std::function<EvalResult(ComplexPoint)> df_rm;
  // combined value + derivative where one pass is cheaper than two
  std::function<std::pair<EvalResult, EvalResult>(ComplexPoint)> f_df;
  // second derivative, used to pin multiple zeros via Newton on f'
  std::function<EvalResult(ComplexPoint)> d2f;
  std::function<EvalResult(ComplexPoint)> d2f_rm;
  bool pole_at_one = false;
  std::string id = "f";

  std::pair<EvalResult, EvalResult> value_and_derivative(ComplexPoint z) const {
    if (f_df) return f_df(z);
    return {f(z), df(z)};
  }
};

inline TargetFunction make_target(const ZeroFlow& flow, ComplexPoint param,
                                  double tol = 1e-9) {
  TargetFunction target;
  target.id = family_tag_name(flow.tag());
  target.pole_at_one = std::abs(flow.pole_residue(param)) > 1e-12;
  target.f = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 0, false, false);
    return EvalResult{J.value, J.err_value};
  };
  target.df = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 1, false, false);
    return EvalResult{J.dz, J.err_dz};
  };
  target.f_rm = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 0, true, false);
    return EvalResult{J.value, J.err_value};
  };
  target.df_rm = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 1, true, false);
    return EvalResult{J.dz, J.err_dz};
  };
  target.f_df = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 1, false, false);
    return std::pair<EvalResult, EvalResult>{{J.value, J.err_value},
                                             {J.dz, J.err_dz}};
  };
  target.d2f = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 2, false, false);
    return EvalResult{J.dz2, J.err_dz};
  };
  target.d2f_rm = [flow, param, tol](ComplexPoint z) {
    const FlowJet J = flow.eval(z, param, tol, 2, true, false);
    return EvalResult{J.dz2, J.err_dz};
  };
  return target;
}

inline TargetFunction make_target_hurwitz(double alpha, double tol = 1e-9) {
  detail::check_alpha(alpha);
  return make_target(ZeroFlow::hurwitz(), {alpha, 0.0}, tol);
}

namespace detail {

struct ComboJet {
  ComplexPoint f{0.0, 0.0}, d1{0.0, 0.0}, d2{0.0, 0.0};
  double e0 = 0.0, e1 = 0.0;
};

inline ComboJet combination_jet(const CombinationSpec& spec, ComplexPoint s,
                                double tol, int order, bool pole_removed) {
  const double m = static_cast<double>(spec.modulus);
  const bool unscale =
      !pole_removed && !spec.has_pole() && std::abs(s - 1.0) < 1e-3;
  if (!pole_removed && spec.has_pole() &&
      std::abs(s - 1.0) < kPoleExclusionRadius)
    throw PoleAtOne("combination pole at s = 1");
  const bool removed = pole_removed || unscale;
  ComboJet G;
  for (const auto& t : spec.terms) {
    const Jet J =
        hurwitz_jet(s, ComplexPoint(t.l / m, 0.0), tol, order, removed);
    const double cmod = std::abs(t.c);
    G.f += t.c * J.f;
    G.d1 += t.c * J.d1;
    G.d2 += t.c * J.d2;
    G.e0 += cmod * J.e0 + std::numeric_limits<double>::epsilon() * cmod *
                              std::abs(J.f);
    G.e1 += cmod * J.e1;
  }
  if (unscale) {
    const ComplexPoint inv = 1.0 / (s - 1.0);
    const double imod = std::abs(inv);
    G.d2 = (G.d2 - 2.0 * G.d1 * inv + 2.0 * G.f * inv * inv) * inv;
    G.d1 = (G.d1 - G.f * inv) * inv;
    G.f *= inv;
    G.e1 = (G.e1 + G.e0 * imod) * imod;
    G.e0 *= imod;
  }
  if (spec.prefactor && spec.modulus > 1) {
    const double lnm = std::log(m);
    const ComplexPoint P = std::exp(-s * lnm);
    const double pmod = std::abs(P);
    G.d2 = P * (G.d2 - 2.0 * lnm * G.d1 + lnm * lnm * G.f);
    G.d1 = P * (G.d1 - lnm * G.f);
    G.e1 = pmod * (G.e1 + lnm * G.e0);
    G.f *= P;
    G.e0 *= pmod;
  }
  return G;
}

}  // namespace detail

inline TargetFunction make_target(const CombinationSpec& spec,
                                  double tol = 1e-9) {
  spec.validate();
  if (spec.family.tag != FamilyTag::Generic) {
    const ZeroFlow flow = ZeroFlow::from_family(spec.family);
    return make_target(flow, ZeroFlow::parameter_of(spec.family), tol);
  }
  TargetFunction target;
  target.id = "generic";
  target.pole_at_one = spec.has_pole();
  target.f = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 0, false);
    return EvalResult{J.f, J.e0};
  };
  target.df = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 1, false);
    return EvalResult{J.d1, J.e1};
  };
  target.f_rm = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 0, true);
    return EvalResult{J.f, J.e0};
  };
  target.df_rm = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 1, true);
    return EvalResult{J.d1, J.e1};
  };
  target.f_df = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 1, false);
    return std::pair<EvalResult, EvalResult>{{J.f, J.e0}, {J.d1, J.e1}};
  };
  target.d2f = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 2, false);
    return EvalResult{J.d2, J.e1};
  };
  target.d2f_rm = [spec, tol](ComplexPoint z) {
    const auto J = detail::combination_jet(spec, z, tol, 2, true);
    return EvalResult{J.d2, J.e1};
  };
  return target;
}

namespace detail {

// Phase accumulation along one boundary edge. Sampling starts at 64 panels
// and doubles locally until every step turns the phase by less than pi/2 and
// shows no sharp magnitude dip (the signature of zeros hugging the contour).
// A per-side sample budget bounds the refinement; exhausting it signals a
// zero on the boundary.
class EdgeWalker {
 public:
  EdgeWalker(const TargetFunction& target, bool removed)
      : target_(target), removed_(removed) {}

  ComplexPoint eval(ComplexPoint z) {
    EvalResult r;
    try {
      r = removed_ ? target_.f_rm(z) : target_.f(z);
    } catch (const PoleAtOne&) {
      throw PoleInside("pole of the target meets the contour");
    }
    const double mag = std::abs(r.value);
    if (!std::isfinite(mag) || mag == 0.0 || r.est_abs_error >= 0.5 * mag)
      throw BoundaryZero("zero on contour");
    --budget_;
    return r.value;
  }

  double walk(ComplexPoint a, ComplexPoint b) {
    constexpr int kSeed = 64;
    ComplexPoint z0 = a, f0 = eval(a);
    double total = 0.0;
    for (int i = 1; i <= kSeed; ++i) {
      const ComplexPoint z1 =
          a + (b - a) * (static_cast<double>(i) / kSeed);
      const ComplexPoint f1 = eval(z1);
      total += segment(z0, z1, f0, f1, 0);
      z0 = z1;
      f0 = f1;
    }
    return total;
  }

 private:
  // Each accepted step is validated against its own midpoint refinement:
  // a steady rotation near 2 pi per panel wraps into a small apparent step,
  // and only the midpoint comparison exposes the lost turn.
  double segment(ComplexPoint z0, ComplexPoint z1, ComplexPoint f0,
                 ComplexPoint f1, int depth) {
    if (depth >= 52 || budget_ <= 0)
      throw BoundaryZero("phase step unresolvable on contour");
    const double d = std::arg(f1 / f0);
    const double m0 = std::abs(f0), m1 = std::abs(f1);
    const bool spiky = std::max(m0, m1) > 8.0 * std::min(m0, m1);
    const ComplexPoint zm = 0.5 * (z0 + z1);
    const ComplexPoint fm = eval(zm);
    if (std::abs(d) >= 0.499 * std::numbers::pi || spiky) {
      return segment(z0, zm, f0, fm, depth + 1) +
             segment(zm, z1, fm, f1, depth + 1);
    }
    const double dl = std::arg(fm / f0);
    const double dr = std::arg(f1 / fm);
    if (std::abs(dl) >= 0.499 * std::numbers::pi ||
        std::abs(dr) >= 0.499 * std::numbers::pi ||
        std::abs(dl + dr - d) > 1e-9) {
      return segment(z0, zm, f0, fm, depth + 1) +
             segment(zm, z1, fm, f1, depth + 1);
    }
    return dl + dr;
  }

  const TargetFunction& target_;
  bool removed_;
  long budget_ = 1 << 16;
};

inline int winding_strict(const TargetFunction& target, const Rectangle& r,
                          bool removed) {
  const ComplexPoint c0{r.sigma_min, r.t_min};
  const ComplexPoint c1{r.sigma_max, r.t_min};
  const ComplexPoint c2{r.sigma_max, r.t_max};
  const ComplexPoint c3{r.sigma_min, r.t_max};
  double total = 0.0;
  for (const auto& [a, b] :
       {std::pair{c0, c1}, {c1, c2}, {c2, c3}, {c3, c0}}) {
    EdgeWalker walker(target, removed);
    total += walker.walk(a, b);
  }
  const double turns = total / (2.0 * std::numbers::pi);
  const int w = static_cast<int>(std::lround(turns));
  if (std::abs(turns - w) > 0.25)
    throw BoundaryZero("phase accumulation is not an integer turn");
  return w;
}

// Collision nudges keep 't in (lo, hi]' semantics: the bottom edge retreats
// upward, the other three edges grow outward.
inline Rectangle nudged(const Rectangle& r, int k) {
  if (k == 0) return r;
  const double d = 1e-4 * k;
  return {r.sigma_min - d, r.sigma_max + d, r.t_min + d, r.t_max + d};
}

struct WindingReport {
  int winding = 0;
  Rectangle effective;
  bool nudged = false;
  bool removed = false;
};

inline WindingReport winding_with_nudges(const TargetFunction& target,
                                         const Rectangle& rect, bool removed) {
  for (int k = 0; k <= 5; ++k) {
    const Rectangle r = nudged(rect, k);
    try {
      const int w = winding_strict(target, r, removed);
      if (w < 0)
        throw PoleInside("negative winding: enclosed pole");
      return {w, r, k > 0, removed};
    } catch (const BoundaryZero&) {
      if (k == 5) throw;
    }
  }
  throw BoundaryZero("nudging failed");
}

inline bool needs_pole_removal(const TargetFunction& target,
                               const Rectangle& rect) {
  return target.pole_at_one && rect.contains({1.0, 0.0}, 1e-3);
}

}  // namespace detail

inline detail::WindingReport winding_number_report(const TargetFunction& target,
                                                   const Rectangle& rect) {
  rect.validate();
  if (target.pole_at_one && rect.contains({1.0, 0.0}, 1e-9))
    throw PoleInside("pole at s = 1 inside the rectangle");
  return detail::winding_with_nudges(target, rect, false);
}

inline int winding_number(const TargetFunction& target, const Rectangle& rect) {
  return winding_number_report(target, rect).winding;
}

inline ZeroRecord newton_refine(const TargetFunction& target,
                                ComplexPoint z0) {
  ComplexPoint z = z0;
  for (int iter = 0; iter < 50; ++iter) {
    const auto [fv, dv] = target.value_and_derivative(z);
    if (std::abs(dv.value) <= 1e-12)
      throw NewtonDiverged("derivative vanished during refinement");
    const ComplexPoint step = fv.value / dv.value;
    z -= step;
    if (std::abs(step) < 1e-13) break;
  }
  const double residual = std::abs(target.f(z).value);
  if (!(residual <= 1e-8))
    throw NewtonDiverged("refinement residual exceeds 1e-8");
  return {z, 1, residual, target.id};
}

namespace detail {

struct Finder {
  const TargetFunction& target;
  bool removed;
  std::vector<ZeroRecord>* out;

  EvalResult value(ComplexPoint z) const {
    return removed ? target.f_rm(z) : target.f(z);
  }
  std::pair<EvalResult, EvalResult> value_pair(ComplexPoint z) const {
    if (removed) return {target.f_rm(z), target.df_rm(z)};
    return target.value_and_derivative(z);
  }

  // residual against the unscaled function; zeros of the removed form away
  // from s = 1 are zeros of the function itself
  double plain_residual(ComplexPoint z) const {
    return std::abs(target.f(z).value);
  }

  bool newton_in_cell(const Rectangle& cell, ZeroRecord& rec) const {
    ComplexPoint z = cell.center();
    for (int iter = 0; iter < 60; ++iter) {
      const auto [fv, dv] = value_pair(z);
      if (std::abs(dv.value) <= 1e-12) {
        // landed on a vanishing-derivative point: fine if it is the zero
        if (std::abs(fv.value) > 1e-10) return false;
        break;
      }
      const ComplexPoint step = fv.value / dv.value;
      z -= step;
      if (!cell.contains(z, 2.0 * cell.diameter() + 1.0)) return false;
      if (std::abs(step) < 1e-13) break;
    }
    if (!cell.contains(z, 1e-9)) return false;
    const double residual = plain_residual(z);
    if (!(residual <= 1e-8)) return false;
    rec = {z, 1, residual, target.id};
    return true;
  }

  // A cell with winding >= 2 holds a multiple zero (or an unresolvable
  // cluster). Newton on f' pins the location far more precisely than the
  // boundary phase can: near the zero |f| sinks below the evaluation noise
  // and contour subdivision stalls, while f' still has a clean simple root.
  bool refine_multiple(const Rectangle& cell, int w, ZeroRecord& rec) const {
    const auto second = removed ? target.d2f_rm : target.d2f;
    if (!second) return false;
    ComplexPoint z = cell.center();
    for (int iter = 0; iter < 60; ++iter) {
      const EvalResult dv = removed ? target.df_rm(z) : target.df(z);
      const EvalResult d2v = second(z);
      if (std::abs(d2v.value) <= 1e-12) return false;
      const ComplexPoint step = dv.value / d2v.value;
      z -= step;
      if (!cell.contains(z, 2.0 * cell.diameter())) return false;
      if (std::abs(step) < 1e-13) break;
    }
    if (!cell.contains(z, 1e-9)) return false;
    const double dmag = std::abs((removed ? target.df_rm : target.df)(z).value);
    const double residual = plain_residual(z);
    if (dmag >= 1e-6 || !(residual <= 1e-8)) return false;
    rec = {z, w, residual, target.id};
    return true;
  }

  void resolve(const Rectangle& cell, int w, int depth) const {
    if (w == 0) return;
    if (w == 1 && cell.diameter() < 0.75) {
      ZeroRecord rec;
      if (newton_in_cell(cell, rec)) {
        out->push_back(rec);
        return;
      }
      if (cell.diameter() < 1e-7)
        throw NewtonDiverged("cell with winding 1 failed to refine");
    }
    if (w >= 2 && cell.diameter() < 1e-3) {
      ZeroRecord rec;
      if (refine_multiple(cell, w, rec)) {
        out->push_back(rec);
        return;
      }
    }
    if (w >= 2 && cell.diameter() < 1e-6) {
      const ComplexPoint c = cell.center();
      out->push_back({c, w, plain_residual(c), target.id});
      return;
    }
    if (depth > 80) throw BoundaryZero("subdivision failed to converge");

    const bool split_t = cell.height() >= cell.width();
    const double len = split_t ? cell.height() : cell.width();
    // jittered cut: retried so no zero sits on the shared edge and the child
    // windings account for the parent exactly
    static constexpr double kJitter[] = {0.0,    0.013, -0.017, 0.029,
                                         -0.041, 0.053, -0.067, 0.079};
    for (const double j : kJitter) {
      const double cut = split_t
                             ? 0.5 * (cell.t_min + cell.t_max) + j * len
                             : 0.5 * (cell.sigma_min + cell.sigma_max) + j * len;
      Rectangle a = cell, b = cell;
      if (split_t) {
        a.t_max = cut;
        b.t_min = cut;
      } else {
        a.sigma_max = cut;
        b.sigma_min = cut;
      }
      int wa = 0, wb = 0;
      try {
        wa = winding_strict(target, a, removed);
        wb = winding_strict(target, b, removed);
      } catch (const BoundaryZero&) {
        continue;
      }
      if (wa + wb != w) continue;
      resolve(a, wa, depth + 1);
      resolve(b, wb, depth + 1);
      return;
    }
    if (w >= 2 && cell.diameter() < 1e-4) {
      // cluster below contour resolution: report via the derivative root
      ZeroRecord rec;
      if (refine_multiple(cell, w, rec)) {
        out->push_back(rec);
        return;
      }
    }
    throw BoundaryZero("no zero-free cut found for subdivision");
  }
};

}  // namespace detail

inline std::vector<ZeroRecord> find_zeros(const TargetFunction& target,
                                          const Rectangle& rect,
                                          bool* pole_substituted = nullptr) {
  rect.validate();
  const bool removed = detail::needs_pole_removal(target, rect);
  if (removed && !target.f_rm)
    throw PoleInside("target provides no pole-removed form");
  if (pole_substituted) *pole_substituted = removed;

  const auto report = detail::winding_with_nudges(target, rect, removed);
  std::vector<ZeroRecord> zeros;
  detail::Finder finder{target, removed, &zeros};
  finder.resolve(report.effective, report.winding, 0);
  std::sort(zeros.begin(), zeros.end(), [](const auto& a, const auto& b) {
    if (a.location.imag() != b.location.imag())
      return a.location.imag() < b.location.imag();
    return a.location.real() < b.location.real();
  });
  // coincident records from neighboring cells describe one zero; their
  // multiplicities are summed
  std::vector<ZeroRecord> merged;
  for (const auto& z : zeros) {
    if (!merged.empty() &&
        std::abs(z.location - merged.back().location) < 1e-9) {
      merged.back().multiplicity += z.multiplicity;
      if (z.residual < merged.back().residual) {
        merged.back().location = z.location;
        merged.back().residual = z.residual;
      }
    } else {
      merged.push_back(z);
    }
  }
  return merged;
}

inline double count_formula(double T, double alpha) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  detail::check_alpha(alpha);
  const double u = T / (2.0 * std::numbers::pi);
  return u * std::log(u) - u - u * std::log(alpha);
}

struct CountComparison {
  double T = 0.0;
  double alpha = 1.0;
  double predicted = 0.0;
  int actual = 0;
  double deviation = 0.0;
  Rectangle window;
  std::vector<ZeroRecord> zeros;
};

inline CountComparison compare_counts(const TargetFunction& target,
                                      double alpha, double T,
                                      int max_widenings = 6) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  detail::check_alpha(alpha);
  double lo = -1.0 + std::log(alpha) / (std::log(2.0 * std::numbers::pi) + 1.0);
  double hi = 3.0;
  CountComparison cmp;
  for (int pass = 0; pass <= max_widenings; ++pass) {
    const Rectangle window{lo, hi, 0.0, T};
    cmp.zeros = find_zeros(target, window);
    cmp.window = window;
    const bool crowded =
        std::any_of(cmp.zeros.begin(), cmp.zeros.end(), [&](const auto& z) {
          return z.location.real() < lo + 0.2 || z.location.real() > hi - 0.2;
        });
    if (!crowded || pass == max_widenings) break;
    const double c = 0.5 * (lo + hi), w = hi - lo;
    lo = c - w;
    hi = c + w;
  }
  cmp.T = T;
  cmp.alpha = alpha;
  cmp.predicted = count_formula(T, alpha);
  cmp.actual = 0;
  for (const auto& z : cmp.zeros) cmp.actual += z.multiplicity;
  cmp.deviation = cmp.predicted - cmp.actual;
  return cmp;
}

inline CountComparison compare_counts(double alpha, double T,
                                      double tol = 1e-9) {
  return compare_counts(make_target_hurwitz(alpha, tol), alpha, T);
}

inline void write_zeros_csv(std::ostream& os,
                            const std::vector<ZeroRecord>& zeros) {
  os << "sigma,t,multiplicity,residual\n";
  for (const auto& z : zeros) {
    os << format_double(z.location.real()) << ','
       << format_double(z.location.imag()) << ',' << z.multiplicity << ','
       << format_double(z.residual) << '\n';
  }
}

}  // namespace zetaflow
