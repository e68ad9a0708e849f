#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "zetaflow/zero_finder.hpp"
#include "oracle.hpp"

using namespace zetaflow;

namespace {

TargetFunction toy(std::function<ComplexPoint(ComplexPoint)> f,
                   std::function<ComplexPoint(ComplexPoint)> df,
                   std::function<ComplexPoint(ComplexPoint)> d2f) {
  auto wrap = [](std::function<ComplexPoint(ComplexPoint)> fn) {
    return [fn](ComplexPoint z) {
      const ComplexPoint v = fn(z);
      return EvalResult{
          v, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
    };
  };
  TargetFunction t;
  t.id = "toy";
  t.f = wrap(f);
  t.df = wrap(df);
  t.d2f = wrap(std::move(d2f));
  t.f_rm = t.f;
  t.df_rm = t.df;
  t.d2f_rm = t.d2f;
  return t;
}

constexpr double kFirstOrdinate = 14.134725141734693;
constexpr double kSecondOrdinate = 21.0220396387723;
constexpr double kThirdOrdinate = 25.0108575801457;

}  // namespace

TEST_CASE("winding of polynomial toys", "[zero_finder]") {
  const ComplexPoint z0{0.3, 0.7};
  const TargetFunction lin = toy(
      [z0](ComplexPoint z) { return z - z0; },
      [](ComplexPoint) { return ComplexPoint{1.0, 0.0}; },
      [](ComplexPoint) { return ComplexPoint{0.0, 0.0}; });
  CHECK(winding_number(lin, {0.0, 1.0, 0.0, 1.0}) == 1);
  CHECK(winding_number(lin, {2.0, 3.0, 0.0, 1.0}) == 0);

  const TargetFunction dbl = toy(
      [z0](ComplexPoint z) { return (z - z0) * (z - z0); },
      [z0](ComplexPoint z) { return 2.0 * (z - z0); },
      [](ComplexPoint) { return ComplexPoint{2.0, 0.0}; });
  CHECK(winding_number(dbl, {0.0, 1.0, 0.0, 1.0}) == 2);
}

TEST_CASE("half open window convention", "[zero_finder]") {
  // a zero sitting on the bottom edge is excluded, on the top edge included
  auto at = [](ComplexPoint z0) {
    return toy([z0](ComplexPoint z) { return z - z0; },
               [](ComplexPoint) { return ComplexPoint{1.0, 0.0}; },
               [](ComplexPoint) { return ComplexPoint{0.0, 0.0}; });
  };
  CHECK(find_zeros(at({0.5, 0.0}), {0.0, 1.0, 0.0, 1.0}).empty());
  const auto top = find_zeros(at({0.5, 1.0}), {0.0, 1.0, 0.0, 1.0});
  REQUIRE(top.size() == 1);
  CHECK(std::abs(top[0].location - ComplexPoint{0.5, 1.0}) < 1e-9);
  // side edges also grow outward, keeping their zeros
  const auto side = find_zeros(at({0.0, 0.5}), {0.0, 1.0, 0.0, 1.0});
  REQUIRE(side.size() == 1);
}

TEST_CASE("multiple zero resolution", "[zero_finder]") {
  const ComplexPoint z0{0.3, 0.7};
  const TargetFunction dbl = toy(
      [z0](ComplexPoint z) { return (z - z0) * (z - z0); },
      [z0](ComplexPoint z) { return 2.0 * (z - z0); },
      [](ComplexPoint) { return ComplexPoint{2.0, 0.0}; });
  const auto zeros = find_zeros(dbl, {0.0, 1.0, 0.0, 1.0});
  REQUIRE(zeros.size() == 1);
  CHECK(zeros[0].multiplicity == 2);
  CHECK(std::abs(zeros[0].location - z0) < 1e-6);

  const ComplexPoint z1{0.75, 0.6};
  const TargetFunction two = toy(
      [z0, z1](ComplexPoint z) { return (z - z0) * (z - z1); },
      [z0, z1](ComplexPoint z) { return 2.0 * z - z0 - z1; },
      [](ComplexPoint) { return ComplexPoint{2.0, 0.0}; });
  const auto pair = find_zeros(two, {0.0, 1.0, 0.0, 1.0});
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].multiplicity == 1);
  CHECK(pair[1].multiplicity == 1);
  // records sort by ordinate first
  CHECK(std::abs(pair[0].location - z1) < 1e-9);
  CHECK(std::abs(pair[1].location - z0) < 1e-9);
}

TEST_CASE("newton refinement", "[zero_finder]") {
  const TargetFunction zeta = make_target_hurwitz(1.0);
  const ZeroRecord first = newton_refine(zeta, {0.5, 14.1});
  CHECK(std::abs(first.location - ComplexPoint{0.5, kFirstOrdinate}) < 1e-9);
  CHECK(first.residual <= 1e-8);
  CHECK(first.function_id == "hurwitz");

  const ZeroRecord trivial = newton_refine(zeta, {-1.9, 0.0});
  CHECK(std::abs(trivial.location - ComplexPoint{-2.0, 0.0}) < 1e-9);

  const TargetFunction flat = toy(
      [](ComplexPoint) { return ComplexPoint{1.0, 0.0}; },
      [](ComplexPoint) { return ComplexPoint{0.0, 0.0}; },
      [](ComplexPoint) { return ComplexPoint{0.0, 0.0}; });
  CHECK_THROWS_AS(newton_refine(flat, {0.0, 0.0}), NewtonDiverged);

  // real Newton orbit can never reach the complex pair +-1000i
  const TargetFunction offaxis = toy(
      [](ComplexPoint z) { return z * z + 1e6; },
      [](ComplexPoint z) { return 2.0 * z; },
      [](ComplexPoint) { return ComplexPoint{2.0, 0.0}; });
  CHECK_THROWS_AS(newton_refine(offaxis, {1.0, 0.0}), NewtonDiverged);
}

TEST_CASE("riemann zeros in the strip", "[zero_finder]") {
  const TargetFunction zeta = make_target_hurwitz(1.0);
  bool substituted = false;
  const auto zeros = find_zeros(zeta, {-1.0, 2.0, 1e-4, 30.0}, &substituted);
  CHECK(substituted);  // t_min almost touches the pole ordinate
  REQUIRE(zeros.size() == 3);
  CHECK(std::abs(zeros[0].location - ComplexPoint{0.5, kFirstOrdinate}) <
        1e-9);
  CHECK(std::abs(zeros[1].location - ComplexPoint{0.5, kSecondOrdinate}) <
        1e-9);
  CHECK(std::abs(zeros[2].location - ComplexPoint{0.5, kThirdOrdinate}) <
        1e-9);
  for (const auto& z : zeros) CHECK(z.residual <= 1e-8);

  // independent grid sweep over a wider window; stray orbits that leave the
  // evaluable region just disqualify their start point
  auto f = [&](oracle::CD z) -> oracle::CD {
    try {
      return zeta.f(z).value;
    } catch (const Error&) {
      return {1e30, 0.0};
    }
  };
  auto df = [&](oracle::CD z) -> oracle::CD {
    try {
      return zeta.df(z).value;
    } catch (const Error&) {
      return {1e30, 0.0};
    }
  };
  const auto swept = oracle::newton_sweep(f, df, 0.0, 1.0, 10.0, 32.0);
  const auto found = find_zeros(zeta, {0.0, 1.0, 10.0, 32.0});
  REQUIRE(swept.size() == found.size());
  for (size_t i = 0; i < swept.size(); ++i)
    CHECK(std::abs(swept[i] - found[i].location) < 1e-8);
}

TEST_CASE("pole handling inside contours", "[zero_finder]") {
  const TargetFunction zeta = make_target_hurwitz(1.0);
  CHECK_THROWS_AS(winding_number(zeta, {-1.0, 2.0, -0.5, 0.5}), PoleInside);

  // the scaled form substitutes automatically and has no zero at s = 1
  bool substituted = false;
  const auto none = find_zeros(zeta, {0.5, 1.5, -0.5, 0.5}, &substituted);
  CHECK(substituted);
  CHECK(none.empty());

  TargetFunction crippled = zeta;
  crippled.f_rm = nullptr;
  CHECK_THROWS_AS(find_zeros(crippled, {0.5, 1.5, -0.5, 0.5}), PoleInside);

  CHECK_THROWS_AS(find_zeros(zeta, {0.5, 0.5, 0.0, 1.0}), InvalidArgument);
}

TEST_CASE("winding agrees with dense sweep and is additive", "[zero_finder]") {
  const TargetFunction zeta = make_target_hurwitz(1.0);
  auto frm = [&](oracle::CD z) { return zeta.f_rm(z).value; };
  const double dense = oracle::winding_dense(frm, -1.0, 2.0, 1e-4, 50.0, 4000);
  CHECK(std::lround(dense) == 10);

  bool substituted = false;
  const auto zeros = find_zeros(zeta, {-1.0, 2.0, 1e-4, 50.0}, &substituted);
  CHECK(substituted);  // margin around t = 0 pulls the pole into play
  CHECK(zeros.size() == 10);

  const int whole = winding_number(zeta, {-1.0, 2.0, 1.0, 30.0});
  CHECK(whole == 3);
  int parts = winding_number(zeta, {-1.0, 2.0, 1.0, 10.0});
  parts += winding_number(zeta, {-1.0, 2.0, 10.0, 18.0});
  parts += winding_number(zeta, {-1.0, 2.0, 18.0, 22.0});
  parts += winding_number(zeta, {-1.0, 2.0, 22.0, 30.0});
  CHECK(parts == whole);
  const int left = winding_number(zeta, {-1.0, 0.45, 1.0, 30.0});
  const int right = winding_number(zeta, {0.45, 2.0, 1.0, 30.0});
  CHECK(left + right == whole);
}

TEST_CASE("density prediction", "[zero_finder]") {
  const double u = 100.0 / (2.0 * std::numbers::pi);
  CHECK(count_formula(100.0, 1.0) ==
        Catch::Approx(28.127343587325348).epsilon(1e-13));
  CHECK(count_formula(100.0, 0.5) ==
        Catch::Approx(39.159123594957928).epsilon(1e-13));
  CHECK(count_formula(2.0 * std::numbers::pi, 0.5) ==
        Catch::Approx(-1.0 + std::log(2.0)).epsilon(1e-13));
  CHECK(count_formula(100.0, 1.0) ==
        Catch::Approx(u * std::log(u) - u).epsilon(1e-15));
  CHECK_THROWS_AS(count_formula(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(count_formula(10.0, 0.0), InvalidArgument);
}

TEST_CASE("count comparison for the classical case", "[zero_finder]") {
  const CountComparison cmp = compare_counts(1.0, 100.0);
  CHECK(cmp.actual == 29);
  CHECK(std::abs(cmp.deviation) < 1.2);
  CHECK(cmp.window.sigma_min == Catch::Approx(-1.0));
  CHECK(cmp.window.sigma_max == Catch::Approx(3.0));
  CHECK(cmp.zeros.size() == 29);
  for (const auto& z : cmp.zeros) {
    CHECK(std::abs(z.location.real() - 0.5) < 1e-9);
    CHECK(z.multiplicity == 1);
  }
}

TEST_CASE("halved parameter splits off a vertical zero ladder",
          "[zero_finder]") {
  const CountComparison cmp = compare_counts(0.5, 40.0);
  CHECK(cmp.actual == 10);
  CHECK(std::abs(cmp.deviation) < 1.0);
  std::vector<double> ladder;
  for (const auto& z : cmp.zeros)
    if (std::abs(z.location.real()) < 1e-3) {
      CHECK(std::abs(z.location.real()) < 1e-8);
      ladder.push_back(z.location.imag());
    }
  const double spacing = 2.0 * std::numbers::pi / std::log(2.0);
  REQUIRE(ladder.size() == 4);
  CHECK(std::abs(ladder[0] - spacing) < 1e-8);
  for (size_t i = 1; i < ladder.size(); ++i)
    CHECK(std::abs(ladder[i] - ladder[i - 1] - spacing) < 1e-6);
}

TEST_CASE("csv output", "[zero_finder]") {
  std::ostringstream os;
  write_zeros_csv(os, {{{0.5, 14.25}, 1, 1e-10, "f"},
                       {{-0.125, 3.5}, 2, 0.0, "f"}});
  CHECK(os.str() ==
        "sigma,t,multiplicity,residual\n"
        "0.5,14.25,1,1e-10\n"
        "-0.125,3.5,2,0\n");
}
