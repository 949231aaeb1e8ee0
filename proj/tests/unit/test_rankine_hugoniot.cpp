#include "iashock/error.hpp"
#include "iashock/rankine_hugoniot.hpp"

#include <doctest.h>

#include <cmath>

using namespace iashock;

TEST_SUITE("rankine_hugoniot")
{
  TEST_CASE("sound speed")
  {
    CHECK(sound_speed(0.0) == 1.0);
    CHECK(sound_speed(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sound_speed(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(sound_speed(-0.1), SolverError);
  }

  TEST_CASE("downstream state at T = 0, eps = 0.1")
  {
    Downstream const d = parametrize_downstream(0.0, 0.1);
    CHECK(d.s == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(d.state.n == doctest::Approx(0.81).epsilon(1e-15));
    // u+ = -eps (2 + eps / s) for T = 0
    CHECK(d.state.u == doctest::Approx(-0.1 * (2.0 + 0.1 / 0.9)).epsilon(1e-14));
    CHECK(d.state.phi == doctest::Approx(std::log(0.81)).epsilon(1e-14));
    CHECK(d.a_eps == doctest::Approx(20.0 * std::log(0.9) + 2.0).epsilon(1e-12));
    CHECK(std::abs(d.a_eps + 0.1) < 0.1 * 0.1);
  }

  TEST_CASE("small amplitude limit")
  {
    for (double T : {0.0, 1.0, 3.0}) {
      Downstream const d = parametrize_downstream(T, 1e-8);
      CHECK(std::abs(d.s - std::sqrt(T + 1.0)) < 1e-7);
      CHECK(std::abs(d.state.n - 1.0) < 1e-7);
      CHECK(std::abs(d.state.u) < 1e-7);
      CHECK(std::abs(d.state.phi) < 1e-7);
      CHECK(std::abs(d.a_eps + 1e-8 / (T + 1.0)) < 1e-12);
    }
  }

  TEST_CASE("a_eps approaches -eps/(T+1) at second order")
  {
    for (double T : {0.0, 1.0, 3.0}) {
      double const e1 = std::abs(parametrize_downstream(T, 0.02).a_eps + 0.02 / (T + 1.0));
      double const e2 = std::abs(parametrize_downstream(T, 0.01).a_eps + 0.01 / (T + 1.0));
      CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
  }

  TEST_CASE("residuals vanish on the parametrized jump")
  {
    EquilibriumState const left{1.0, 0.0, 0.0};
    for (double T : {0.0, 0.5, 1.0, 3.0}) {
      for (double eps : {0.01, 0.05, 0.1, 0.2}) {
        Downstream const d = parametrize_downstream(T, eps);
        auto const r = rh_residual_eulerian(left, d.state, d.s, T);
        CHECK(std::abs(r[0]) < 1e-12);
        CHECK(std::abs(r[1]) < 1e-12);
        auto const rl = rh_residual_lagrangian(eulerian_to_lagrangian(left), eulerian_to_lagrangian(d.state), d.s, T);
        CHECK(std::abs(rl[0]) < 1e-12);
        CHECK(std::abs(rl[1]) < 1e-12);
        CHECK(d.state.n < 1.0);
        CHECK(d.s < std::sqrt(T + 1.0));
        CHECK(std::abs(d.state.phi - std::log(d.state.n)) == 0.0);
      }
    }
  }

  TEST_CASE("residuals detect jumps off the locus")
  {
    EquilibriumState const left{1.0, 0.0, 0.0};
    auto const same = rh_residual_eulerian(left, left, 0.7, 0.0);
    CHECK(same[0] == 0.0);
    CHECK(same[1] == 0.0);
    auto const off = rh_residual_eulerian(left, EquilibriumState{0.81, -0.2, 0.0}, 0.9, 0.0);
    CHECK(std::abs(off[1]) > 1e-3);
  }

  TEST_CASE("lagrangian residual sign")
  {
    // with v+ > v- and u+ < u-, the mass residual vanishes only for s > 0
    LagrangianEquilibrium const l{1.0, 0.0, 0.0}, r{1.2, -0.1, 0.0};
    double const s = -(r.u - l.u) / (r.v - l.v);
    CHECK(s > 0.0);
    CHECK(std::abs(rh_residual_lagrangian(l, r, s, 0.0)[0]) < 1e-15);
  }

  TEST_CASE("coordinate transform")
  {
    LagrangianEquilibrium const a = eulerian_to_lagrangian({1.0, 0.0, 0.0});
    CHECK(a.v == 1.0);
    Downstream const d = parametrize_downstream(0.0, 0.1);
    LagrangianEquilibrium const b = eulerian_to_lagrangian(d.state);
    CHECK(b.v == doctest::Approx(1.0 / 0.81).epsilon(1e-15));
    CHECK(b.u == d.state.u);
    CHECK(b.phi == d.state.phi);
    EquilibriumState const back = lagrangian_to_eulerian(b);
    CHECK(back.n == doctest::Approx(d.state.n).epsilon(1e-15));
    CHECK(back.u == d.state.u);
    CHECK_THROWS_AS(eulerian_to_lagrangian({0.0, 0.0, 0.0}), SolverError);
  }

  TEST_CASE("amplitude range")
  {
    CHECK_THROWS_AS(parametrize_downstream(0.0, 0.0), SolverError);
    CHECK_THROWS_AS(parametrize_downstream(0.0, 0.6), SolverError);
    CHECK_NOTHROW(parametrize_downstream(0.0, 0.6, 0.9));
  }
}
