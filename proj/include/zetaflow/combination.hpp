#pragma once

#include <cmath>
#include <complex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "zetaflow/errors.hpp"
#include "zetaflow/hurwitz.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

enum class FamilyTag {
  Generic,
  Hurwitz,
  Psi5Odd,
  Psi5EvenCircle,
  Psi5EvenPerturbed,
  PsiPrime,
};

inline const char* family_tag_name(FamilyTag t) {
  switch (t) {
    case FamilyTag::Generic: return "generic";
    case FamilyTag::Hurwitz: return "hurwitz";
    case FamilyTag::Psi5Odd: return "psi5_odd";
    case FamilyTag::Psi5EvenCircle: return "psi5_even_circle";
    case FamilyTag::Psi5EvenPerturbed: return "psi5_even_perturbed";
    case FamilyTag::PsiPrime: return "psi_prime";
  }
  return "generic";
}

struct FamilyInfo {
  FamilyTag tag = FamilyTag::Generic;
  double alpha = 1.0;              // Hurwitz
  ComplexPoint beta{0.0, 1.0};     // Psi5Odd
  double theta = 0.0;              // Psi5EvenCircle
  double epsilon = 0.0;            // perturbed families
  double phi = 0.0;
  int p = 5;                       // PsiPrime
  std::vector<double> x;           // PsiPrime null-space direction
};

struct CombinationTerm {
  int l;           // alpha_l = l / modulus
  ComplexPoint c;
};

struct CombinationSpec {
  int modulus = 1;
  bool prefactor = false;  // overall modulus^{-s} factor
  std::vector<CombinationTerm> terms;
  FamilyInfo family;

  // Residue of the simple pole at s = 1 (each zeta term contributes its
  // coefficient; the prefactor contributes modulus^{-1}).
  ComplexPoint pole_residue() const {
    if (family.tag == FamilyTag::Hurwitz) return {1.0, 0.0};
    ComplexPoint sum{0.0, 0.0};
    for (const auto& t : terms) sum += t.c;
    return prefactor ? sum / static_cast<double>(modulus) : sum;
  }

  bool has_pole() const { return std::abs(pole_residue()) > 1e-12; }

  void validate() const {
    if (modulus < 1) throw InvalidArgument("modulus must be >= 1");
    std::set<int> seen;
    for (const auto& t : terms) {
      if (t.l < 1 || t.l > modulus)
        throw InvalidArgument("term index out of range");
      if (!seen.insert(t.l).second)
        throw InvalidArgument("duplicate term index");
    }
  }
};

namespace detail {

inline ComplexPoint modulus_prefactor(const CombinationSpec& spec,
                                      ComplexPoint s) {
  if (!spec.prefactor || spec.modulus == 1) return {1.0, 0.0};
  return std::exp(-s * std::log(static_cast<double>(spec.modulus)));
}

}  // namespace detail

// Sum of the spec's terms: modulus^{-s} * sum c_l * zeta(s, l/m). Zero-residue
// combinations stay evaluable arbitrarily close to s = 1 through the
// pole-removed form; s exactly at (or a spec with a genuine pole near) the
// pole raises PoleAtOne.
inline EvalResult evaluate_combination(const CombinationSpec& spec,
                                       ComplexPoint s,
                                       double tol = kDefaultTolerance) {
  spec.validate();
  if (spec.family.tag == FamilyTag::Hurwitz) {
    return hurwitz_zeta(s, spec.family.alpha, tol);
  }
  const double pole_dist = std::abs(s - 1.0);
  const bool near_pole = pole_dist < kPoleExclusionRadius;
  if (near_pole && (spec.has_pole() || s == ComplexPoint(1.0, 0.0)))
    throw PoleAtOne("combination pole at s = 1");

  const ComplexPoint pre = detail::modulus_prefactor(spec, s);
  const double m = static_cast<double>(spec.modulus);
  // within this distance of the pole the cancellation between terms is
  // evaluated through (s-1)-scaled series for stability
  const bool removed_path = pole_dist < 1e-3 && !spec.has_pole();

  ComplexPoint sum{0.0, 0.0};
  double err = 0.0;
  for (const auto& t : spec.terms) {
    const detail::Jet J =
        detail::hurwitz_jet(s, ComplexPoint(t.l / m, 0.0), tol, 0, removed_path);
    sum += t.c * J.f;
    err += std::abs(t.c) * J.e0;
  }
  if (removed_path) {
    const ComplexPoint inv = 1.0 / (s - 1.0);
    sum *= inv;
    err = (err + std::numeric_limits<double>::epsilon() * std::abs(sum)) *
          std::abs(inv);
  }
  const double premod = std::abs(pre);
  return {pre * sum, err * premod +
                         std::numeric_limits<double>::epsilon() * premod *
                             std::abs(sum)};
}

// (s-1) * combination: entire, usable across s = 1 by winding contours.
inline EvalResult evaluate_combination_pole_removed(
    const CombinationSpec& spec, ComplexPoint s,
    double tol = kDefaultTolerance) {
  spec.validate();
  if (spec.family.tag == FamilyTag::Hurwitz)
    return hurwitz_zeta_pole_removed(s, spec.family.alpha, tol);
  const ComplexPoint pre = detail::modulus_prefactor(spec, s);
  const double m = static_cast<double>(spec.modulus);
  ComplexPoint sum{0.0, 0.0};
  double err = 0.0;
  for (const auto& t : spec.terms) {
    const detail::Jet J =
        detail::hurwitz_jet(s, ComplexPoint(t.l / m, 0.0), tol, 0, true);
    sum += t.c * J.f;
    err += std::abs(t.c) * J.e0;
  }
  const double premod = std::abs(pre);
  return {pre * sum, err * premod +
                         std::numeric_limits<double>::epsilon() * premod *
                             std::abs(sum)};
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const CombinationSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : spec.terms)
    terms.push_back({{"l", t.l}, {"c_re", t.c.real()}, {"c_im", t.c.imag()}});
  nlohmann::json params;
  const FamilyInfo& f = spec.family;
  switch (f.tag) {
    case FamilyTag::Generic: params = nlohmann::json::object(); break;
    case FamilyTag::Hurwitz: params = {{"alpha", f.alpha}}; break;
    case FamilyTag::Psi5Odd:
      params = {{"beta_re", f.beta.real()}, {"beta_im", f.beta.imag()}};
      break;
    case FamilyTag::Psi5EvenCircle: params = {{"theta", f.theta}}; break;
    case FamilyTag::Psi5EvenPerturbed:
      params = {{"epsilon", f.epsilon}, {"phi", f.phi}};
      break;
    case FamilyTag::PsiPrime:
      params = {{"p", f.p},
                {"epsilon", f.epsilon},
                {"phi", f.phi},
                {"x", f.x}};
      break;
  }
  return {{"modulus", spec.modulus},
          {"prefactor", spec.prefactor},
          {"terms", terms},
          {"family", {{"tag", family_tag_name(f.tag)}, {"params", params}}}};
}

inline CombinationSpec spec_from_json(const nlohmann::json& j) {
  CombinationSpec spec;
  spec.modulus = j.at("modulus").get<int>();
  spec.prefactor = j.at("prefactor").get<bool>();
  for (const auto& t : j.at("terms")) {
    spec.terms.push_back(
        {t.at("l").get<int>(),
         {t.at("c_re").get<double>(), t.at("c_im").get<double>()}});
  }
  const auto& fam = j.at("family");
  const std::string tag = fam.at("tag").get<std::string>();
  const auto& params = fam.at("params");
  FamilyInfo& f = spec.family;
  if (tag == "generic") {
    f.tag = FamilyTag::Generic;
  } else if (tag == "hurwitz") {
    f.tag = FamilyTag::Hurwitz;
    f.alpha = params.at("alpha").get<double>();
  } else if (tag == "psi5_odd") {
    f.tag = FamilyTag::Psi5Odd;
    f.beta = {params.at("beta_re").get<double>(),
              params.at("beta_im").get<double>()};
  } else if (tag == "psi5_even_circle") {
    f.tag = FamilyTag::Psi5EvenCircle;
    f.theta = params.at("theta").get<double>();
  } else if (tag == "psi5_even_perturbed") {
    f.tag = FamilyTag::Psi5EvenPerturbed;
    f.epsilon = params.at("epsilon").get<double>();
    f.phi = params.at("phi").get<double>();
  } else if (tag == "psi_prime") {
    f.tag = FamilyTag::PsiPrime;
    f.p = params.at("p").get<int>();
    f.epsilon = params.at("epsilon").get<double>();
    f.phi = params.at("phi").get<double>();
    f.x = params.at("x").get<std::vector<double>>();
  } else {
    throw InvalidArgument("unknown family tag: " + tag);
  }
  spec.validate();
  return spec;
}

}  // namespace zetaflow
