#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zetaflow/errors.hpp"
#include "zetaflow/families.hpp"
#include "zetaflow/format.hpp"
#include "zetaflow/types.hpp"
#include "zetaflow/zero_finder.hpp"

#ifdef ZETAFLOW_TRACE
#include <cstdio>
#define ZF_TRACE(...) std::fprintf(stderr, __VA_ARGS__)
#else
#define ZF_TRACE(...)
#endif

namespace zetaflow {

enum class EventKind { MergeOnLine, SplitOffLine, NearMultiple };

inline const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::MergeOnLine: return "merge-on-line";
    case EventKind::SplitOffLine: return "split-off-line";
    default: return "near-multiple";
  }
}

struct BifurcationEvent {
  double param_value = 0.0;
  ComplexPoint location{0.0, 0.0};
  EventKind kind = EventKind::NearMultiple;
  double derivative_magnitude = 0.0;
};

struct TrajectorySample {
  double param = 0.0;
  ComplexPoint z{0.0, 0.0};
  double residual = 0.0;
  std::optional<double> scaled_t;
  bool event_flag = false;
};

struct Trajectory {
  std::string parameter_name;
  double param_from = 0.0;
  double param_to = 0.0;
  std::vector<TrajectorySample> samples;
  std::vector<BifurcationEvent> events;
  ComplexPoint regularization_offset{0.0, 0.0};
};

// Continuation settings. A step is accepted only when the Newton corrector
// lands back on the zero set within corrector_max_iterations.
struct StepControl {
  double initial_step = 1e-3;
  double max_step = 1e-2;
  double min_step = 1e-8;
  int corrector_max_iterations = 4;
  int max_halvings = 3;
  int grow_after_accepts = 10;
  double grow_factor = 1.5;
  double residual_tol = 1e-8;
  double eval_tol = 1e-9;
  double bifurcation_trigger = 1e-5;
  double bifurcation_release = 1e-4;
  double regularization_delta = 1e-6;
  double line_band = 1e-3;
};

namespace detail {

class FlowTracker {
 public:
  FlowTracker(const ZeroFlow& flow, const StepControl& ctrl)
      : flow_(&flow), ctrl_(ctrl) {}

  Trajectory run(ComplexPoint z_start, double from, double to) {
    traj_ = Trajectory{};
    traj_.parameter_name = flow_->parameter_name();
    traj_.param_from = from;
    traj_.param_to = to;
    p_ = from;
    const auto seed = correct(z_start, from, 3 * ctrl_.corrector_max_iterations);
    if (!seed)
      throw LostZero("start point is not a zero at the initial parameter");
    z_ = seed->z;
    record(*seed);
    if (from == to) return std::move(traj_);

    const double dir = (to > from) ? 1.0 : -1.0;
    double h = dir * std::min(ctrl_.initial_step, std::abs(to - from));
    int streak = 0;
    while ((to - p_) * dir > 0.0) {
      double h_try = h;
      if (regularized_) {
        // near a pinch the two offset zeros stay ~sqrt(delta) apart; the
        // predictor must not move farther than that in one step or it can
        // land in the partner's Newton basin
        try {
          const double speed = std::abs(velocity(z_, p_));
          const double move_cap =
              std::max(1e-4, 10.0 * ctrl_.regularization_delta);
          if (speed * std::abs(h_try) > move_cap)
            h_try = dir * std::max(move_cap / speed, ctrl_.min_step);
        } catch (const Stalled&) {
        }
      }
      double h_eff = h_try;
      double target = p_ + h_try;
      if (std::abs(to - p_) <= std::abs(h_try)) {
        h_eff = to - p_;
        target = to;
      }
      int halvings = 0;
      bool advanced = attempt_step(h_eff, target);
      while (!advanced && halvings < ctrl_.max_halvings) {
        ZF_TRACE("halve: p=%.9f h_eff=%.3e reg=%d z=(%.9f,%.9f)\n", p_, h_eff,
                 (int)regularized_, z_.real(), z_.imag());
        h_eff *= 0.5;
        h = h_eff;
        target = p_ + h_eff;
        ++halvings;
        streak = 0;
        if (std::abs(h_eff) < ctrl_.min_step)
          throw LostZero("step size underflow during continuation");
        advanced = attempt_step(h_eff, target);
      }
      if (!advanced) {
        recover(h_eff);
        streak = 0;
        continue;
      }
      if (++streak >= ctrl_.grow_after_accepts && !regularized_) {
        h = dir * std::min(std::abs(h) * ctrl_.grow_factor, ctrl_.max_step);
        streak = 0;
      }
    }
    return std::move(traj_);
  }

 private:
  struct Stalled {};

  struct Corrected {
    ComplexPoint z{0.0, 0.0};
    double residual = 0.0;
    double dz_abs = 0.0;
  };

  ComplexPoint param_point(double p) const {
    return ComplexPoint(p, 0.0) + offset_;
  }

  ComplexPoint velocity(ComplexPoint z, double p) const {
    FlowJet j;
    try {
      j = flow_->eval(z, param_point(p), ctrl_.eval_tol, 1, false, true);
    } catch (const Error&) {
      throw Stalled{};
    }
    if (!(std::abs(j.dz) > 1e-14)) throw Stalled{};
    return -j.dparam / j.dz;
  }

  ComplexPoint rk4(ComplexPoint z, double p, double h) const {
    const ComplexPoint k1 = velocity(z, p);
    const ComplexPoint k2 = velocity(z + 0.5 * h * k1, p + 0.5 * h);
    const ComplexPoint k3 = velocity(z + 0.5 * h * k2, p + 0.5 * h);
    const ComplexPoint k4 = velocity(z + h * k3, p + h);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Near a close pair the raw Newton step |f|/|f'| can dwarf the pair
  // separation; pinch-side callers pass a trust radius to clip it.
  static constexpr double kPinchTrust = 0.01;

  // Keeps iterating below the residual gate while Newton still improves:
  // returning the first gated point lets samples drift anywhere inside the
  // low-residual neighborhood surrounding a close pair, and the branch being
  // tracked is lost before the regularization can engage.
  std::optional<Corrected> correct(
      ComplexPoint z, double p, int max_iters,
      double trust = std::numeric_limits<double>::infinity()) const {
    std::optional<Corrected> best;
    for (int it = 0;; ++it) {
      FlowJet j;
      try {
        j = flow_->eval(z, param_point(p), ctrl_.eval_tol, 1, false, false);
      } catch (const Error&) {
        return best;
      }
      const double fv = std::abs(j.value);
      const double dv = std::abs(j.dz);
      if (fv <= ctrl_.residual_tol) {
        if (best && fv >= best->residual) return best;
        best = Corrected{z, fv, dv};
      }
      if (it >= max_iters || !(dv > 1e-14)) return best;
      ComplexPoint step = j.value / j.dz;
      if (best && std::abs(step) > kPinchTrust) return best;
      if (std::abs(step) > trust) step *= trust / std::abs(step);
      z -= step;
    }
  }

  void record(const Corrected& cor) {
    TrajectorySample s;
    s.param = p_;
    s.z = cor.z;
    s.residual = cor.residual;
    if (flow_->tag() == FamilyTag::Hurwitz && cor.z.imag() > 0.0)
      s.scaled_t = count_formula(cor.z.imag(), p_);
    s.event_flag = flag_next_;
    flag_next_ = false;
    traj_.samples.push_back(s);
  }

  bool attempt_step(double h, double target) {
    ComplexPoint pred;
    std::optional<Corrected> cor;
    try {
      pred = rk4(z_, p_, h);
      cor = correct(pred, target, ctrl_.corrector_max_iterations,
                    regularized_ ? kPinchTrust
                                 : std::numeric_limits<double>::infinity());
      if (cor) {
        const double moved = std::abs(pred - z_);
        if (std::abs(cor->z - pred) > std::max(0.05, moved)) cor.reset();
      }
    } catch (const Stalled&) {
      cor.reset();
    }
    if (!cor) return false;
    p_ = target;
    z_ = cor->z;
    record(*cor);
    update_regularization(*cor);
    return true;
  }

  void engage(double param_value, ComplexPoint location, double dmag,
              ComplexPoint z_before) {
    ZF_TRACE("engage: p=%.9f loc=(%.9f,%.9f) dmag=%.3e\n", param_value,
             location.real(), location.imag(), dmag);
    regularized_ = true;
    offset_ = ComplexPoint(0.0, ctrl_.regularization_delta);
    traj_.regularization_offset = offset_;
    line_before_ = std::abs(z_before.real() - 0.5) < ctrl_.line_band;
    pending_event_ = traj_.events.size();
    traj_.events.push_back(
        {param_value, location, EventKind::NearMultiple, dmag});
  }

  // A single Newton hop between the plain and offset flows can cross to the
  // partner branch while two zeros are nearly coincident; the offset is
  // walked in geometric stages so every hop stays inside the branch being
  // continued. The offset moves the pair by ~sqrt(delta), so the first
  // stage has to sit far below the separation at which the trigger fires.
  ComplexPoint step_offset(ComplexPoint z, double p, bool engaging) {
    static constexpr int kStages = 15;
    for (int i = 0; i <= kStages; ++i) {
      const int k = engaging ? i : kStages - i;
      const double f = k == 0 ? 0.0 : std::ldexp(1.0, k - kStages);
      offset_ = ComplexPoint(0.0, f * ctrl_.regularization_delta);
      auto c = correct(z, p, ctrl_.corrector_max_iterations, kPinchTrust);
      if (!c)
        c = correct(z, p, 3 * ctrl_.corrector_max_iterations, kPinchTrust);
      if (c) z = c->z;
    }
    return z;
  }

  void release() {
    ZF_TRACE("release: p=%.9f z=(%.9f,%.9f)\n", p_, z_.real(), z_.imag());
    regularized_ = false;
    z_ = step_offset(z_, p_, false);
    if (const auto cor = correct(z_, p_, 3 * ctrl_.corrector_max_iterations,
                                 kPinchTrust))
      z_ = cor->z;
    const bool line_after = std::abs(z_.real() - 0.5) < ctrl_.line_band;
    if (pending_event_ && *pending_event_ < traj_.events.size()) {
      auto& ev = traj_.events[*pending_event_];
      if (line_before_ && !line_after)
        ev.kind = EventKind::SplitOffLine;
      else if (!line_before_ && line_after)
        ev.kind = EventKind::MergeOnLine;
    }
    pending_event_.reset();
    if (!traj_.samples.empty()) traj_.samples.back().event_flag = true;
  }

  void update_regularization(const Corrected& cor) {
    if (!regularized_) {
      if (cor.dz_abs >= std::max(1e-3, 10.0 * ctrl_.bifurcation_trigger))
        return;
      FlowJet j2;
      try {
        j2 = flow_->eval(z_, param_point(p_), ctrl_.eval_tol, 2, false, false);
      } catch (const Error&) {
        return;
      }
      // release must stay above the trigger or the offset would flap
      const double trigger =
          std::min(ctrl_.bifurcation_trigger * (1.0 + std::abs(j2.dz2)),
                   0.9 * ctrl_.bifurcation_release);
      if (std::abs(j2.dz) < trigger) {
        engage(p_, z_, std::abs(j2.dz), z_);
        if (!traj_.samples.empty()) traj_.samples.back().event_flag = true;
        z_ = step_offset(z_, p_, true);
        if (const auto c = correct(z_, p_, 3 * ctrl_.corrector_max_iterations,
                                   kPinchTrust))
          z_ = c->z;
      }
    } else if (cor.dz_abs > ctrl_.bifurcation_release) {
      release();
    }
  }

  // The corrector failed at the smallest step. Rescan a box around the
  // predictor point: winding 2 means a near-multiple ahead (regularize and
  // push through), winding 1 means the zero is simply recaptured.
  void recover(double h) {
    const double target = p_ + h;
    ComplexPoint pred = z_;
    try {
      pred = rk4(z_, p_, h);
    } catch (const Stalled&) {
    }
    const double radius = std::max(
        {10.0 * std::abs(pred - z_), 10.0 * std::abs(h), 1e-4});
    const Rectangle box{pred.real() - radius, pred.real() + radius,
                        pred.imag() - radius, pred.imag() + radius};
    const TargetFunction fixed =
        make_target(*flow_, param_point(target), ctrl_.eval_tol);
    int w = 0;
    try {
      w = winding_number(fixed, box);
    } catch (const Error&) {
      w = 0;
    }
    ZF_TRACE("recover: p=%.9f h=%.3e w=%d reg=%d pred=(%.9f,%.9f)\n", p_, h,
             w, (int)regularized_, pred.real(), pred.imag());
    if (w >= 2) {
      if (!regularized_) {
        // pred sits between the colliding zeros, so continuing from it
        // would pick a branch at random; instead turn on the offset at the
        // current point, which is still on the incoming branch, and let the
        // main loop retry the step on the regularized flow
        double dmag = 0.0;
        try {
          dmag = std::abs(
              flow_->eval(pred, param_point(target), ctrl_.eval_tol, 1,
                          false, false)
                  .dz);
        } catch (const Error&) {
        }
        flag_next_ = true;
        engage(target, pred, dmag, z_);
        z_ = step_offset(z_, p_, true);
        if (const auto cor = correct(z_, p_,
                                     3 * ctrl_.corrector_max_iterations,
                                     kPinchTrust))
          z_ = cor->z;
        return;
      }
      if (const auto cor = correct(pred, target,
                                   3 * ctrl_.corrector_max_iterations,
                                   kPinchTrust)) {
        p_ = target;
        z_ = cor->z;
        record(*cor);
        return;
      }
      throw LostZero("regularized corrector failed near a multiple zero");
    }
    if (w == 1) {
      try {
        const auto zeros = find_zeros(fixed, box);
        if (zeros.size() == 1) {
          p_ = target;
          z_ = zeros.front().location;
          Corrected cor{z_, zeros.front().residual, 0.0};
          try {
            cor.dz_abs = std::abs(
                flow_->eval(z_, param_point(target), ctrl_.eval_tol, 1, false,
                            false)
                    .dz);
          } catch (const Error&) {
          }
          record(cor);
          update_regularization(cor);
          return;
        }
      } catch (const Error&) {
      }
    }
    throw LostZero("zero lost after step halvings exhausted");
  }

  const ZeroFlow* flow_;
  StepControl ctrl_;
  Trajectory traj_;
  double p_ = 0.0;
  ComplexPoint z_{0.0, 0.0};
  ComplexPoint offset_{0.0, 0.0};
  bool regularized_ = false;
  bool line_before_ = false;
  bool flag_next_ = false;
  std::optional<std::size_t> pending_event_;
};

}  // namespace detail

inline Trajectory track_zero(const ZeroFlow& flow, ComplexPoint z_start,
                             double param_from, double param_to,
                             const StepControl& ctrl = {}) {
  detail::FlowTracker tracker(flow, ctrl);
  return tracker.run(z_start, param_from, param_to);
}

inline Trajectory track_hurwitz_zero(ComplexPoint z_start, double alpha_from,
                                     double alpha_to,
                                     const StepControl& ctrl = {}) {
  if (!(alpha_from > 0.0) || !(alpha_to > 0.0) || alpha_from > 1.0 ||
      alpha_to > 1.0)
    throw InvalidArgument("alpha range must lie in (0, 1]");
  return track_zero(ZeroFlow::hurwitz(), z_start, alpha_from, alpha_to, ctrl);
}

inline Trajectory track_family_zero(const FamilyInfo& family,
                                    ComplexPoint z_start, double param_from,
                                    double param_to,
                                    const StepControl& ctrl = {}) {
  return track_zero(ZeroFlow::from_family(family), z_start, param_from,
                    param_to, ctrl);
}

inline std::vector<std::pair<double, double>> scaled_spectrum(
    const Trajectory& traj) {
  if (traj.parameter_name != "alpha")
    throw WrongFlow("scaled spectrum requires an alpha flow");
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    if (s.scaled_t) out.emplace_back(s.param, *s.scaled_t);
  return out;
}

enum class FlowShape { Line, CycleCCW, CycleCW };

inline const char* flow_shape_name(FlowShape shape) {
  switch (shape) {
    case FlowShape::Line: return "line";
    case FlowShape::CycleCCW: return "cycle-ccw";
    default: return "cycle-cw";
  }
}

struct LinearizedFlowResult {
  ComplexPoint z_infinity{0.0, 0.0};
  std::vector<std::pair<double, ComplexPoint>> path;
  FlowShape classification = FlowShape::Line;
  double angular_spread = 0.0;
  double winding = 0.0;
};

// First-order motion of a small offset w around a stationary zero:
// w' = i w (E - 1)/(E + 1) with E = e^{2 i phi} p^{1/2 - z_inf}. The
// coefficient is real exactly when |E| = 1, which pins Re z_inf = 1/2.
inline LinearizedFlowResult linearized_flow(ComplexPoint z_infinity,
                                            ComplexPoint dz0, int p_base,
                                            double phi_from, double phi_to) {
  if (p_base < 2) throw InvalidArgument("base must be at least 2");
  if (!(std::abs(dz0) > 0.0)) throw InvalidArgument("offset seed is zero");
  if (!(phi_to > phi_from)) throw InvalidArgument("empty flow interval");
  const double lp = std::log(static_cast<double>(p_base));
  const ComplexPoint amp = std::exp((0.5 - z_infinity) * lp);
  const ComplexPoint iu{0.0, 1.0};
  if (std::abs(std::abs(amp) - 1.0) < 1e-12) {
    // |E| = 1: one coefficient pole per half-turn, located analytically
    const double base = 0.5 * (std::numbers::pi - std::arg(amp));
    const double k0 =
        std::ceil((phi_from - base) / std::numbers::pi - 1e-12);
    const double cross = base + k0 * std::numbers::pi;
    if (cross <= phi_to + 1e-12)
      throw CoefficientPole("coefficient pole at phi = " +
                            format_double(cross));
  }
  const auto coeff = [&](double phi) {
    const ComplexPoint e = std::exp(2.0 * iu * phi) * amp;
    if (std::abs(e + 1.0) < 1e-8)
      throw CoefficientPole("coefficient pole at phi = " +
                            format_double(phi));
    return iu * (e - 1.0) / (e + 1.0);
  };

  const double range = phi_to - phi_from;
  const auto n = static_cast<std::size_t>(
      std::max(20000.0, std::ceil(8000.0 * range)));
  const double h = range / static_cast<double>(n);
  LinearizedFlowResult res;
  res.z_infinity = z_infinity;
  const std::size_t stride = std::max<std::size_t>(1, n / 2048);
  res.path.reserve(n / stride + 2);
  ComplexPoint w = dz0;
  res.path.emplace_back(phi_from, w);
  double cum = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = phi_from + static_cast<double>(k) * h;
    const ComplexPoint k1 = coeff(phi) * w;
    const ComplexPoint k2 = coeff(phi + 0.5 * h) * (w + 0.5 * h * k1);
    const ComplexPoint k3 = coeff(phi + 0.5 * h) * (w + 0.5 * h * k2);
    const ComplexPoint k4 = coeff(phi + h) * (w + h * k3);
    const ComplexPoint w_next =
        w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(std::abs(w_next) > 0.0))
      throw CoefficientPole("offset collapsed at phi = " +
                            format_double(phi + h));
    cum += std::arg(w_next / w);
    spread = std::max(spread, std::abs(cum));
    w = w_next;
    if ((k + 1) % stride == 0 || k + 1 == n)
      res.path.emplace_back(phi + h, w);
  }
  res.angular_spread = spread;
  res.winding = cum / (2.0 * std::numbers::pi);
  if (spread < 1e-6)
    res.classification = FlowShape::Line;
  else
    res.classification = cum < 0.0 ? FlowShape::CycleCW : FlowShape::CycleCCW;
  return res;
}

inline void write_trajectories_csv(std::ostream& os,
                                   const std::vector<Trajectory>& trajs) {
  os << "zero_id,param,sigma,t,residual,scaled_t,event_flag\n";
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    for (const auto& s : trajs[id].samples) {
      os << id << ',' << format_double(s.param) << ','
         << format_double(s.z.real()) << ',' << format_double(s.z.imag())
         << ',' << format_double(s.residual) << ',';
      if (s.scaled_t) os << format_double(*s.scaled_t);
      os << ',' << (s.event_flag ? 1 : 0) << '\n';
    }
  }
}

inline nlohmann::json events_to_json(const std::vector<Trajectory>& trajs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& traj : trajs)
    for (const auto& ev : traj.events)
      arr.push_back({{"param", ev.param_value},
                     {"sigma", ev.location.real()},
                     {"t", ev.location.imag()},
                     {"kind", event_kind_name(ev.kind)}});
  return arr;
}

}  // namespace zetaflow
