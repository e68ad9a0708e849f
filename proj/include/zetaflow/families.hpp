#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zetaflow/characters.hpp"
#include "zetaflow/combination.hpp"
#include "zetaflow/errors.hpp"
#include "zetaflow/hurwitz.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

inline double golden_ratio() { return 0.5 * (1.0 + std::sqrt(5.0)); }

// --- odd m = 5 family --------------------------------------------------------

// The self-conjugacy condition for the odd combination confines beta to a
// circle; center and radius follow from completing the square in Re/Im beta.
inline ComplexPoint beta_circle_center_5odd() {
  return {-golden_ratio(), 0.0};
}

inline double beta_circle_radius_5odd() {
  return std::sqrt(0.5 * (5.0 + std::sqrt(5.0)));
}

inline ComplexPoint beta_circle_5odd(ComplexPoint angle) {
  return beta_circle_center_5odd() +
         beta_circle_radius_5odd() * std::exp(ComplexPoint(0.0, 1.0) * angle);
}

// Circle angles carrying beta = +i and beta = -i (the two L-function points).
inline double beta_circle_angle_plus_i() {
  return std::atan2(1.0, golden_ratio());
}

inline double beta_circle_angle_minus_i() {
  return 2.0 * std::numbers::pi - std::atan2(1.0, golden_ratio());
}

inline double psi5_odd_symmetry_residual(ComplexPoint beta) {
  const double s1 = std::sin(2.0 * std::numbers::pi / 5.0);
  const double s2 = std::sin(4.0 * std::numbers::pi / 5.0);
  return std::abs(s2 - beta * s1 - std::conj(beta) * (s1 + beta * s2));
}

// --- even m = 5 family -------------------------------------------------------

// Both self-conjugacy equations for the even combination with free
// coefficients (beta, gamma); returns the two residual magnitudes.
inline std::pair<double, double> psi5_even_symmetry_residuals(
    ComplexPoint beta, ComplexPoint gamma) {
  const double c1 = std::cos(2.0 * std::numbers::pi / 5.0);
  const double c2 = std::cos(4.0 * std::numbers::pi / 5.0);
  const ComplexPoint common = c1 + beta * c2 + 0.5 * gamma;
  const double r1 =
      std::abs(c2 + beta * c1 + 0.5 * gamma - std::conj(beta) * common);
  const double r2 = std::abs(1.0 + beta + 0.5 * gamma - std::conj(gamma) * common);
  return {r1, r2};
}

// Solution branch beta = 1 + eps e^{i phi}.
inline ComplexPoint gamma_from_beta_even5(double epsilon, double phi) {
  const ComplexPoint e1 = std::exp(ComplexPoint(0.0, phi));
  const ComplexPoint e2 = std::exp(ComplexPoint(0.0, 2.0 * phi));
  return 1.0 + std::sqrt(5.0) * e2 + epsilon * golden_ratio() * e1;
}

// --- symmetry matrix for general odd prime p ---------------------------------

struct SymmetryMatrix {
  int p = 0;
  Eigen::MatrixXd M;
  int rank = 0;
  int nullity = 0;
  Eigen::MatrixXd null_basis;  // order x nullity, orthonormal columns
};

inline SymmetryMatrix symmetry_matrix(int p) {
  if (p < 3 || !detail::is_prime(p)) throw NotPrime("p must be an odd prime");
  const int order = (p - 1) / 2;
  SymmetryMatrix out;
  out.p = p;
  out.M.resize(order, order);
  for (int j = 1; j <= order; ++j) {
    for (int k = 1; k <= order - 1; ++k) {
      int m = (j * (k + 1)) % p;
      m = std::min(m, p - m);
      double v = std::cos(2.0 * std::numbers::pi * m / p);
      if (j == k + 1) v -= 0.5 * std::sqrt(static_cast<double>(p));
      out.M(j - 1, k - 1) = v;
    }
    out.M(j - 1, order - 1) = 0.5;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10) ++rank;
  out.rank = rank;
  out.nullity = order - rank;
  out.null_basis = svd.matrixV().rightCols(out.nullity);
  for (int c = 0; c < out.nullity; ++c) {
    int imax = 0;
    for (int i = 1; i < order; ++i)
      if (std::abs(out.null_basis(i, c)) > std::abs(out.null_basis(imax, c)))
        imax = i;
    if (out.null_basis(imax, c) < 0.0) out.null_basis.col(c) *= -1.0;
  }
  if (p != 4 * rank + 1 && p != 4 * rank - 1)
    throw ConstructionUnvalidated("rank does not match p = 4r +- 1");
  for (int c = 0; c < out.nullity; ++c) {
    if ((out.M * out.null_basis.col(c)).norm() > 1e-9)
      throw ConstructionUnvalidated("null basis residual too large");
  }
  return out;
}

// --- builders -----------------------------------------------------------------

inline CombinationSpec build_psi5_odd(ComplexPoint beta) {
  if (psi5_odd_symmetry_residual(beta) > 1e-9)
    throw NotSymmetric("beta is off the symmetry circle");
  CombinationSpec spec;
  spec.modulus = 5;
  spec.prefactor = true;
  spec.terms = {{1, {1.0, 0.0}}, {2, beta}, {3, -beta}, {4, {-1.0, 0.0}}};
  spec.family.tag = FamilyTag::Psi5Odd;
  spec.family.beta = beta;
  return spec;
}

inline CombinationSpec build_psi_even5_circle(double theta) {
  CombinationSpec spec;
  spec.modulus = 5;
  spec.prefactor = true;
  const ComplexPoint gamma =
      1.0 + std::sqrt(5.0) * std::exp(ComplexPoint(0.0, theta));
  spec.terms = {{1, {1.0, 0.0}},
                {2, {1.0, 0.0}},
                {3, {1.0, 0.0}},
                {4, {1.0, 0.0}},
                {5, gamma}};
  spec.family.tag = FamilyTag::Psi5EvenCircle;
  spec.family.theta = theta;
  return spec;
}

inline CombinationSpec build_psi_even5(double epsilon, double phi) {
  const ComplexPoint beta = 1.0 + epsilon * std::exp(ComplexPoint(0.0, phi));
  const ComplexPoint gamma = gamma_from_beta_even5(epsilon, phi);
  const auto [r1, r2] = psi5_even_symmetry_residuals(beta, gamma);
  if (r1 > 1e-9 || r2 > 1e-9)
    throw NotSymmetric("even coefficients violate the symmetry equations");
  CombinationSpec spec;
  spec.modulus = 5;
  spec.prefactor = true;
  spec.terms = {
      {1, {1.0, 0.0}}, {2, beta}, {3, beta}, {4, {1.0, 0.0}}, {5, gamma}};
  spec.family.tag = FamilyTag::Psi5EvenPerturbed;
  spec.family.epsilon = epsilon;
  spec.family.phi = phi;
  return spec;
}

// General even family: (1 + e^{2 i phi} p^{1/2 - s}) zeta(s)
//                      + eps e^{i phi} p^{-s} g_p(s)
// with g_p built from a unit null-space direction x of the symmetry matrix.
inline CombinationSpec build_psi_prime(int p, double epsilon, double phi,
                                       const std::vector<double>& x) {
  const SymmetryMatrix sym = symmetry_matrix(p);
  const int order = (p - 1) / 2;
  if (static_cast<int>(x.size()) != order)
    throw InvalidArgument("direction has wrong dimension");
  Eigen::VectorXd xv(order);
  for (int i = 0; i < order; ++i) xv(i) = x[i];
  if (std::abs(xv.norm() - 1.0) > 1e-8)
    throw InvalidArgument("direction must have unit norm");
  if ((sym.M * xv).norm() > 1e-9)
    throw NotInNullSpace("direction is not annihilated by the symmetry matrix");

  const ComplexPoint e1 = epsilon * std::exp(ComplexPoint(0.0, phi));
  const ComplexPoint e2 =
      std::sqrt(static_cast<double>(p)) * std::exp(ComplexPoint(0.0, 2.0 * phi));
  CombinationSpec spec;
  spec.modulus = p;
  spec.prefactor = true;
  spec.terms.reserve(p);
  for (int l = 1; l <= p; ++l) spec.terms.push_back({l, {1.0, 0.0}});
  for (int k = 1; k <= (p - 3) / 2; ++k) {
    spec.terms[k].c += e1 * x[k - 1];          // l = k + 1
    spec.terms[p - k - 2].c += e1 * x[k - 1];  // l = p - k - 1
  }
  spec.terms[p - 1].c += e2 + e1 * x[order - 1];  // l = p carries zeta(s, 1)
  spec.family.tag = FamilyTag::PsiPrime;
  spec.family.p = p;
  spec.family.epsilon = epsilon;
  spec.family.phi = phi;
  spec.family.x = x;
  return spec;
}

// --- closed-form flow evaluation ----------------------------------------------

struct FlowJet {
  ComplexPoint value{0.0, 0.0};
  ComplexPoint dz{0.0, 0.0};
  ComplexPoint dz2{0.0, 0.0};
  ComplexPoint dparam{0.0, 0.0};
  double err_value = 0.0;
  double err_dz = 0.0;
  double err_dparam = 0.0;
};

// One-parameter zero flow: evaluates the family and its derivatives in z and
// in the flow parameter from a handful of Hurwitz series instead of the full
// term sum. The parameter may be complexified (used to regularize steps near
// bifurcation points).
class ZeroFlow {
 public:
  static ZeroFlow hurwitz() { return ZeroFlow(FamilyTag::Hurwitz); }
  static ZeroFlow psi5_odd() { return ZeroFlow(FamilyTag::Psi5Odd); }
  static ZeroFlow psi5_even_circle() {
    return ZeroFlow(FamilyTag::Psi5EvenCircle);
  }
  static ZeroFlow psi5_even_perturbed(double epsilon) {
    ZeroFlow f(FamilyTag::Psi5EvenPerturbed);
    f.epsilon_ = epsilon;
    f.p_ = 5;
    f.x_ = {1.0, golden_ratio()};
    return f;
  }
  static ZeroFlow psi_prime(int p, double epsilon,
                            const std::vector<double>& x) {
    build_psi_prime(p, epsilon, 0.0, x);  // reuse its validation
    ZeroFlow f(FamilyTag::PsiPrime);
    f.epsilon_ = epsilon;
    f.p_ = p;
    f.x_ = x;
    return f;
  }

  static ZeroFlow from_family(const FamilyInfo& fam) {
    switch (fam.tag) {
      case FamilyTag::Hurwitz: return hurwitz();
      case FamilyTag::Psi5Odd: return psi5_odd();
      case FamilyTag::Psi5EvenCircle: return psi5_even_circle();
      case FamilyTag::Psi5EvenPerturbed:
        return psi5_even_perturbed(fam.epsilon);
      case FamilyTag::PsiPrime: return psi_prime(fam.p, fam.epsilon, fam.x);
      case FamilyTag::Generic: break;
    }
    throw NoFlowParameter("family has no flow parameter");
  }

  // The flow parameter value recorded in a family descriptor.
  static ComplexPoint parameter_of(const FamilyInfo& fam) {
    switch (fam.tag) {
      case FamilyTag::Hurwitz: return {fam.alpha, 0.0};
      case FamilyTag::Psi5Odd: {
        const ComplexPoint d = fam.beta - beta_circle_center_5odd();
        return {std::atan2(d.imag(), d.real()), 0.0};
      }
      case FamilyTag::Psi5EvenCircle: return {fam.theta, 0.0};
      case FamilyTag::Psi5EvenPerturbed: return {fam.phi, 0.0};
      case FamilyTag::PsiPrime: return {fam.phi, 0.0};
      case FamilyTag::Generic: break;
    }
    throw NoFlowParameter("family has no flow parameter");
  }

  FamilyTag tag() const { return tag_; }

  const char* parameter_name() const {
    switch (tag_) {
      case FamilyTag::Hurwitz: return "alpha";
      case FamilyTag::Psi5Odd: return "angle";
      case FamilyTag::Psi5EvenCircle: return "theta";
      default: return "phi";
    }
  }

  bool pole_possible() const { return tag_ != FamilyTag::Psi5Odd; }

  ComplexPoint pole_residue(ComplexPoint param) const {
    const ComplexPoint i{0.0, 1.0};
    switch (tag_) {
      case FamilyTag::Hurwitz: return {1.0, 0.0};
      case FamilyTag::Psi5Odd: return {0.0, 0.0};
      case FamilyTag::Psi5EvenCircle:
        return 1.0 + std::exp(i * param) / std::sqrt(5.0);
      default: {
        const double p = static_cast<double>(p_);
        double xsum = 0.0;
        for (size_t k = 0; k + 1 < x_.size(); ++k) xsum += 2.0 * x_[k];
        xsum += x_.back();
        return 1.0 + std::exp(2.0 * i * param) / std::sqrt(p) +
               epsilon_ * std::exp(i * param) * xsum / p;
      }
    }
  }

  CombinationSpec spec_at(double param) const {
    switch (tag_) {
      case FamilyTag::Hurwitz: {
        CombinationSpec spec;
        spec.family.tag = FamilyTag::Hurwitz;
        spec.family.alpha = param;
        return spec;
      }
      case FamilyTag::Psi5Odd:
        return build_psi5_odd(beta_circle_5odd({param, 0.0}));
      case FamilyTag::Psi5EvenCircle: return build_psi_even5_circle(param);
      case FamilyTag::Psi5EvenPerturbed:
        return build_psi_even5(epsilon_, param);
      default: return build_psi_prime(p_, epsilon_, param, x_);
    }
  }

  FlowJet eval(ComplexPoint z, ComplexPoint param, double tol, int order,
               bool pole_removed = false, bool want_dparam = true) const {
    switch (tag_) {
      case FamilyTag::Hurwitz:
        return eval_hurwitz(z, param, tol, order, pole_removed, want_dparam);
      case FamilyTag::Psi5Odd:
        return eval_odd(z, param, tol, order, pole_removed, want_dparam);
      case FamilyTag::Psi5EvenCircle:
        return eval_even_circle(z, param, tol, order, pole_removed,
                                want_dparam);
      default:
        return eval_even_perturbed(z, param, tol, order, pole_removed,
                                   want_dparam);
    }
  }

 private:
  explicit ZeroFlow(FamilyTag tag) : tag_(tag) {}

  FlowJet eval_hurwitz(ComplexPoint z, ComplexPoint a, double tol, int order,
                       bool pole_removed, bool want_dparam) const {
    if (a.imag() == 0.0) {
      detail::check_alpha(a.real());
    } else if (a.real() <= 0.0 || a.real() > 1.0) {
      throw InvalidArgument("complexified alpha must keep Re in (0, 1]");
    }
    const detail::Jet J = detail::hurwitz_jet(z, a, tol, order, pole_removed);
    FlowJet out;
    out.value = J.f;
    out.dz = J.d1;
    out.dz2 = J.d2;
    out.err_value = J.e0;
    out.err_dz = J.e1;
    if (want_dparam) {
      // d/da zeta(z, a) = -z zeta(z+1, a), which equals minus the
      // pole-removed series at z + 1 and so stays finite through z = 0
      const detail::Jet Jp = detail::hurwitz_jet(z + 1.0, a, tol, 0, true);
      out.dparam = -Jp.f;
      out.err_dparam = Jp.e0;
      if (pole_removed) {
        out.dparam *= (z - 1.0);
        out.err_dparam *= std::abs(z - 1.0);
      }
    }
    return out;
  }

  FlowJet eval_odd(ComplexPoint z, ComplexPoint angle, double tol, int order,
                   bool pole_removed, bool want_dparam) const {
    const ComplexPoint i{0.0, 1.0};
    const ComplexPoint rot =
        beta_circle_radius_5odd() * std::exp(i * angle);
    const ComplexPoint beta = beta_circle_center_5odd() + rot;
    const double ln5 = std::log(5.0);
    // individual terms pole at s = 1 although the combination does not; the
    // scaled series keeps the cancellation stable near the pole
    const bool removed = pole_removed || std::abs(z - 1.0) < 1e-3;
    detail::Jet J[4];
    for (int l = 1; l <= 4; ++l)
      J[l - 1] = detail::hurwitz_jet(z, ComplexPoint(l / 5.0, 0.0), tol, order,
                                     removed);
    detail::Jet G;
    G.f = J[0].f - J[3].f + beta * (J[1].f - J[2].f);
    G.d1 = J[0].d1 - J[3].d1 + beta * (J[1].d1 - J[2].d1);
    G.d2 = J[0].d2 - J[3].d2 + beta * (J[1].d2 - J[2].d2);
    const double bmod = std::abs(beta);
    G.e0 = J[0].e0 + J[3].e0 + bmod * (J[1].e0 + J[2].e0) +
           std::numeric_limits<double>::epsilon() *
               (std::abs(J[0].f) + std::abs(J[3].f) +
                bmod * (std::abs(J[1].f) + std::abs(J[2].f)));
    G.e1 = J[0].e1 + J[3].e1 + bmod * (J[1].e1 + J[2].e1);
    ComplexPoint dG{0.0, 0.0};
    double edG = 0.0;
    if (want_dparam) {
      dG = (J[1].f - J[2].f) * i * rot;
      edG = (J[1].e0 + J[2].e0) * std::abs(rot);
    }
    if (removed && !pole_removed) {
      // undo the (s - 1) scaling
      const ComplexPoint inv = 1.0 / (z - 1.0);
      const double imod = std::abs(inv);
      G.d2 = (G.d2 - 2.0 * G.d1 * inv + 2.0 * G.f * inv * inv) * inv;
      G.d1 = (G.d1 - G.f * inv) * inv;
      G.f *= inv;
      dG *= inv;
      G.e1 = (G.e1 + G.e0 * imod) * imod;
      G.e0 *= imod;
      edG *= imod;
    }
    return apply_exponential_prefactor(z, ln5, G, dG, edG, want_dparam);
  }

  FlowJet eval_even_circle(ComplexPoint z, ComplexPoint theta, double tol,
                           int order, bool pole_removed,
                           bool want_dparam) const {
    const ComplexPoint i{0.0, 1.0};
    const double lnp = std::log(5.0);
    const ComplexPoint E =
        std::exp(i * theta) * std::sqrt(5.0) * std::exp(-z * lnp);
    const detail::Jet Z =
        detail::hurwitz_jet(z, {1.0, 0.0}, tol, order, pole_removed);
    const ComplexPoint F = 1.0 + E;
    const double emod = std::abs(E);
    FlowJet out;
    out.value = F * Z.f;
    out.dz = F * Z.d1 - lnp * E * Z.f;
    out.dz2 = F * Z.d2 - 2.0 * lnp * E * Z.d1 + lnp * lnp * E * Z.f;
    out.err_value = std::abs(F) * Z.e0;
    out.err_dz = std::abs(F) * Z.e1 + lnp * emod * Z.e0;
    if (want_dparam) {
      out.dparam = i * E * Z.f;
      out.err_dparam = emod * Z.e0;
    }
    return out;
  }

  FlowJet eval_even_perturbed(ComplexPoint z, ComplexPoint phi, double tol,
                              int order, bool pole_removed,
                              bool want_dparam) const {
    const ComplexPoint i{0.0, 1.0};
    const double p = static_cast<double>(p_);
    const double lnp = std::log(p);
    const ComplexPoint pmz = std::exp(-z * lnp);
    const ComplexPoint E = std::exp(2.0 * i * phi) * std::sqrt(p) * pmz;
    const ComplexPoint H = epsilon_ * std::exp(i * phi) * pmz;
    const detail::Jet Z =
        detail::hurwitz_jet(z, {1.0, 0.0}, tol, order, pole_removed);
    detail::Jet G;
    const int pairs = (p_ - 3) / 2;
    for (int k = 1; k <= pairs; ++k) {
      const double xk = x_[k - 1];
      for (const int l : {k + 1, p_ - k - 1}) {
        const detail::Jet Jl =
            detail::hurwitz_jet(z, ComplexPoint(l / p, 0.0), tol, order,
                                pole_removed);
        G.f += xk * Jl.f;
        G.d1 += xk * Jl.d1;
        G.d2 += xk * Jl.d2;
        G.e0 += std::abs(xk) * Jl.e0;
        G.e1 += std::abs(xk) * Jl.e1;
      }
    }
    const double xl = x_.back();
    G.f += xl * Z.f;
    G.d1 += xl * Z.d1;
    G.d2 += xl * Z.d2;
    G.e0 += std::abs(xl) * Z.e0;
    G.e1 += std::abs(xl) * Z.e1;

    const ComplexPoint F = 1.0 + E;
    const double fmod = std::abs(F), emod = std::abs(E), hmod = std::abs(H);
    FlowJet out;
    out.value = F * Z.f + H * G.f;
    out.dz = F * Z.d1 - lnp * E * Z.f + H * G.d1 - lnp * H * G.f;
    out.dz2 = F * Z.d2 - 2.0 * lnp * E * Z.d1 + lnp * lnp * E * Z.f +
              H * G.d2 - 2.0 * lnp * H * G.d1 + lnp * lnp * H * G.f;
    out.err_value = fmod * Z.e0 + hmod * G.e0;
    out.err_dz = fmod * Z.e1 + lnp * emod * Z.e0 + hmod * G.e1 +
                 lnp * hmod * G.e0;
    if (want_dparam) {
      out.dparam = 2.0 * i * E * Z.f + i * H * G.f;
      out.err_dparam = 2.0 * emod * Z.e0 + hmod * G.e0;
    }
    return out;
  }

  // value = p^{-z} G with the 5-cycle prefactor folded into the jets
  FlowJet apply_exponential_prefactor(ComplexPoint z, double lnp,
                                      const detail::Jet& G, ComplexPoint dG,
                                      double edG, bool want_dparam) const {
    const ComplexPoint F = std::exp(-z * lnp);
    const double fmod = std::abs(F);
    FlowJet out;
    out.value = F * G.f;
    out.dz = F * (G.d1 - lnp * G.f);
    out.dz2 = F * (G.d2 - 2.0 * lnp * G.d1 + lnp * lnp * G.f);
    out.err_value = fmod * G.e0;
    out.err_dz = fmod * (G.e1 + lnp * G.e0);
    if (want_dparam) {
      out.dparam = F * dG;
      out.err_dparam = fmod * edG;
    }
    return out;
  }

  FamilyTag tag_;
  double epsilon_ = 0.0;
  int p_ = 5;
  std::vector<double> x_;
};

// Derivative of the combination in its family flow parameter.
inline EvalResult combination_param_derivative(const CombinationSpec& spec,
                                               ComplexPoint s,
                                               double tol = kDefaultTolerance) {
  const ZeroFlow flow = ZeroFlow::from_family(spec.family);
  const ComplexPoint param = ZeroFlow::parameter_of(spec.family);
  if (spec.family.tag == FamilyTag::Hurwitz &&
      std::abs(s - 1.0) < kPoleExclusionRadius)
    throw PoleAtOne("parameter derivative undefined at the pole");
  const FlowJet J = flow.eval(s, param, tol, 0, false, true);
  return {J.dparam, J.err_dparam};
}

}  // namespace zetaflow
