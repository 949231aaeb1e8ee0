#include "iashock/approximation.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace iashock;

namespace {

struct Setup
{
  ScaledProfile   exact;
  KdvbTriple      modified;
  KdvbProfile     n1;
  RemainderFields direct;
};

Setup setup(double eps, double delta, int nodes, double L = 60.0, double T = 0.0)
{
  GridSpec const g{L, nodes};
  Setup s;
  s.exact = build_scaled_profile(ScalingParams::from_delta(eps, delta), T, g);
  KdvbOptions ko;
  ko.grid = g;
  s.modified = solve_kdvb_triple(T, delta, KdvbVariant::modified_for(T, eps), ko);
  s.n1 = solve_kdvb(T, delta, KdvbKind::N1, KdvbVariant::classic(), ko);
  s.direct = compute_remainder_direct(s.exact, s.modified, eps);
  return s;
}

KdvbProfile classic_n1(double delta, int nodes, double L)
{
  KdvbOptions ko;
  ko.grid = GridSpec{L, nodes};
  return solve_kdvb(0.0, delta, KdvbKind::N1, KdvbVariant::classic(), ko);
}

// n* = z e^{-z^2/4}, phi* = e^{-z^2/4} / 2 and their sources
struct Manufactured
{
  Vec n, phi, h1, h2;
};

Manufactured manufactured(const KdvbProfile &n1, double eps, double delta)
{
  Vec const A = remainder_coefficient(n1);
  double const c = std::sqrt(n1.T + 1.0);
  Eigen::Index const N = n1.z.size();
  Manufactured m{Vec(N), Vec(N), Vec(N), Vec(N)};
  for (Eigen::Index i = 0; i < N; ++i) {
    double const z = n1.z[i], g = std::exp(-z * z / 4.0);
    double const n = z * g, dn = (1.0 - z * z / 2.0) * g;
    double const p = 0.5 * g, d2p = 0.5 * (z * z / 4.0 - 0.5) * g;
    m.n[i] = n;
    m.phi[i] = p;
    m.h1[i] = dn - A[i] * n - delta / c * d2p;
    m.h2[i] = -eps * delta * d2p - n + p;
  }
  return m;
}

} // namespace

TEST_SUITE("approximation")
{
  TEST_CASE("scaled profile identities")
  {
    Setup const s = setup(0.02, 0.01, 4001);
    ScaledResiduals const r = scaled_profile_residuals(s.exact);
    CHECK(r.u_identity < 1e-8);
    Eigen::Index const mid = s.exact.z.size() / 2;
    CHECK(s.exact.z[mid] == 0.0);
    // amplitude 1 - n+ = 2 eps - eps^2
    for (double eps : {0.02, 0.01}) {
      ScaledProfile const p = build_scaled_profile(ScalingParams::from_delta(eps, 0.01), 0.0, GridSpec{60.0, 2001});
      double const amp = (p.n.array() - 1.0).abs().maxCoeff() / eps;
      CHECK(amp == doctest::Approx(2.0).epsilon(0.2));
    }
  }

  TEST_CASE("scaled Poisson residual converges at second order")
  {
    auto res = [](int nodes) {
      return scaled_profile_residuals(build_scaled_profile(ScalingParams::from_delta(0.02, 0.01), 0.0, GridSpec{60.0, nodes}))
        .poisson;
    };
    double const ratio = res(2001) / res(4001);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }

  TEST_CASE("direct remainder normalization and far field")
  {
    Setup const s = setup(0.02, 0.01, 4001);
    Eigen::Index const N = s.direct.n_R.size();
    CHECK(s.direct.n_R[N / 2] == 0.0);
    double const sup = num::sup(s.direct.n_R);
    CHECK(std::abs(s.direct.n_R[0]) < 1e-3 * sup);
    CHECK(std::abs(s.direct.n_R[N - 1]) < 1e-3 * sup);
    CHECK(std::abs(s.direct.u_R[0]) < 1e-3 * num::sup(s.direct.u_R));
    CHECK(std::abs(s.direct.phi_R[N - 1]) < 1e-3 * num::sup(s.direct.phi_R));
  }

  TEST_CASE("velocity remainder formula")
  {
    double const eps = 0.02;
    Setup const s = setup(eps, 0.01, 4001);
    double shift = 0.0;
    KdvbTriple const m = align_first_order(s.exact, s.modified, eps, &shift);
    CHECK(std::abs(shift - s.direct.shift) < 1e-14);
    Vec const uR = compute_u_remainder(s.direct.n_R, s.exact, m, eps);
    CHECK((uR - s.direct.u_R).cwiseAbs().maxCoeff() < 1e-8);

    // n_R = 0 leaves only the first-order mismatch term
    Eigen::Index const N = uR.size();
    Vec const only = compute_u_remainder(Vec::Zero(N), s.exact, m, eps);
    for (Eigen::Index i = 0; i < N; i += 97) {
      double const n = s.exact.n[i], n1 = m.n.field[i], u1 = m.u.field[i];
      double const expect = (s.exact.s * n1 - u1 - eps * n1 * u1) / (eps * n);
      CHECK(only[i] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("source terms")
  {
    double const eps = 0.02, delta = 0.01;
    Setup const s = setup(eps, delta, 4001);
    double shift = 0.0;
    KdvbTriple const m = align_first_order(s.exact, s.modified, eps, &shift);
    Eigen::Index const N = s.direct.n_R.size();
    RTerms const zero = compute_r_terms(m, s.n1, s.direct.n_R, Vec::Zero(N), eps, delta, 0.0);
    CHECK(zero.r5.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.r6.cwiseAbs().maxCoeff() == 0.0);
    RTerms const r = compute_r_terms(m, s.n1, s.direct.n_R, s.direct.phi_R, eps, delta, 0.0);
    double const sup4 = num::sup(r.r4);
    CHECK(sup4 > 0.0);
    CHECK(std::abs(r.r4[0]) < 1e-3 * sup4);
    CHECK(std::abs(r.r4[N - 1]) < 1e-3 * sup4);
  }

  TEST_CASE("remainder coefficient limits")
  {
    for (double T : {0.0, 1.0}) {
      KdvbOptions ko;
      ko.grid = GridSpec{30.0, 2001};
      KdvbProfile const n1 = solve_kdvb(T, 0.01, KdvbKind::N1, KdvbVariant::classic(), ko);
      Vec const A = remainder_coefficient(n1);
      CHECK(A[0] == doctest::Approx(2.0).epsilon(1e-8));
      CHECK(A[A.size() - 1] == doctest::Approx(-2.0).epsilon(1e-8));
    }
  }

  TEST_CASE("remainder equation residual")
  {
    KdvbProfile const n1 = classic_n1(0.01, 2001, 30.0);
    Eigen::Index const N = n1.z.size();
    RemainderFields zero;
    zero.z = n1.z;
    zero.n_R = zero.u_R = zero.phi_R = Vec::Zero(N);
    zero.epsilon = 0.02;
    zero.delta = 0.01;
    RTerms r;
    r.r1 = r.r2 = r.r3 = r.r4 = r.r5 = r.r6 = r.poisson_dispersion = Vec::Zero(N);
    RemainderResidual const z = remainder_equation_residual(zero, r, n1, 0.0);
    CHECK(z.first == 0.0);
    CHECK(z.second == 0.0);

    auto measured = [](int nodes) {
      Setup const s = setup(0.02, 0.01, nodes);
      double shift = 0.0;
      KdvbTriple const m = align_first_order(s.exact, s.modified, 0.02, &shift);
      RTerms const rt = compute_r_terms(m, s.n1, s.direct.n_R, s.direct.phi_R, 0.02, 0.01, 0.0);
      return remainder_equation_residual(s.direct, rt, s.n1, 0.0).first;
    };
    double const ratio = measured(4001) / measured(8001);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }

  TEST_CASE("linear remainder solver")
  {
    KdvbProfile const n1 = classic_n1(0.01, 2001, 30.0);
    Eigen::Index const N = n1.z.size();
    LinearRemainder const z = solve_linear_remainder(n1, Vec::Zero(N), Vec::Zero(N), 0.02, 0.01);
    CHECK(z.n.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.phi.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(solve_linear_remainder(n1, Vec::Zero(N - 1), Vec::Zero(N), 0.02, 0.01), SolverError);
  }

  TEST_CASE("linear remainder solver recovers a manufactured solution at second order")
  {
    double const eps = 0.02, delta = 0.01;
    double err[2];
    int k = 0;
    for (int nodes : {2001, 4001}) {
      KdvbProfile const n1 = classic_n1(delta, nodes, 30.0);
      Manufactured const m = manufactured(n1, eps, delta);
      LinearRemainder const sol = solve_linear_remainder(n1, m.h1, m.h2, eps, delta);
      err[k++] = std::max((sol.n - m.n).cwiseAbs().maxCoeff(), (sol.phi - m.phi).cwiseAbs().maxCoeff());
    }
    CHECK(err[0] < 1e-3);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.125));
  }

  TEST_CASE("linear remainder solution stays bounded as delta shrinks")
  {
    double sup[3];
    int k = 0;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
      KdvbProfile const n1 = classic_n1(delta, 4001, 30.0);
      Manufactured const m = manufactured(n1, 0.02, 1e-2);
      sup[k++] = num::sup(solve_linear_remainder(n1, m.h1, m.h2, 0.02, delta).n);
    }
    double const lo = std::min({sup[0], sup[1], sup[2]}), hi = std::max({sup[0], sup[1], sup[2]});
    CHECK(hi / lo < 1.5);
  }

  TEST_CASE("fixed-point iteration contracts from zero")
  {
    double const eps = 0.02;
    Setup const s = setup(eps, 0.01, 4001);
    WeightedNormSpec const spec{1.0, 2, 1e-10};
    FixedPointResult const fp = solve_remainder_fixed_point(s.exact, s.modified, s.n1, eps, spec);
    CHECK(fp.converged);
    REQUIRE(fp.ratios.size() >= 2);
    for (double r : fp.ratios) CHECK(r < 0.5);
    // the first increment is the norm of the first iterate itself
    CHECK(fp.increments.front() > fp.increments.back());
    CHECK(fp.fields.n_R[fp.fields.n_R.size() / 2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }

  TEST_CASE("validation configuration checks")
  {
    ValidationConfig c;
    c.nodes = 4000;
    CHECK_THROWS_AS(validate_epsilon(c, 0.02), SolverError);
    c.nodes = 4001;
    c.alpha = 2.5;
    CHECK_THROWS_AS(validate_epsilon(c, 0.02), SolverError);
  }
}
