#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mixlab/chaos.hpp"
#include "mixlab/correlate.hpp"
#include "mixlab/measure.hpp"

using namespace mixlab;

namespace {

struct Fixture {
  EigenvectorField field;
  OperatorModel op;
  CovarianceModel cov;

  explicit Fixture(double kappa, std::size_t dim)
      : field(make_weighted_shift_field(kappa, dim)),
        op(make_operator(field)),
        cov(sigma_from_field(field)) {}
};

// Literal re-statement of the documented naive kernel: permutations in
// lexicographic order, factors multiplied in row order, plain running sum.
double perm_reference(const std::vector<double>& m, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double sum = 0.0;
  do {
    double prod = 1.0;
    for (int t = 0; t < k; ++t)
      prod *= m[static_cast<std::size_t>(t) * static_cast<std::size_t>(k) +
                static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
    sum += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

TEST_CASE("hermite recurrence values") {
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(1, 3.7) == 3.7);
  CHECK(hermite(2, 3.0) == doctest::Approx(8.0).epsilon(1e-15));    // t^2 - 1
  CHECK(hermite(3, 2.0) == doctest::Approx(2.0).epsilon(1e-15));    // t^3 - 3t
  CHECK(hermite(4, 1.0) == doctest::Approx(-2.0).epsilon(1e-15));   // t^4 - 6t^2 + 3
  for (double t : {-1.3, 0.4, 2.2}) {
    CHECK(hermite(5, t) ==
          doctest::Approx(std::pow(t, 5) - 10.0 * t * t * t + 15.0 * t).epsilon(1e-13));
  }
  CHECK_THROWS_AS(hermite(-1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hermite(65, 0.0), std::invalid_argument);
}

TEST_CASE("wick power is a scaled hermite in the projected coordinate") {
  cvec x(4, cd{0.0, 0.0});
  x[1] = cd{1.0, 0.0};
  cvec z(4, cd{0.0, 0.0});
  z[1] = cd{0.8, 0.3};
  // <x, z> = z_1, so the argument is Re(z_1) / sigma
  const double got = wick_power_eval(x, 2, z, 0.5);
  CHECK(got == doctest::Approx(0.25 * hermite(2, 1.6)).epsilon(1e-14));
  CHECK(wick_power_eval(x, 0, z, 0.5) == 1.0);
  CHECK_THROWS_AS(wick_power_eval(x, 2, z, 0.0), std::invalid_argument);
}

TEST_CASE("monomial construction sorts and validates") {
  const WickMonomial m = make_monomial({3, -1, 3, 2}, 8);
  CHECK(m.indices == std::vector<int>{-1, 2, 3, 3});
  const auto groups = monomial_groups(m);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0] == std::pair<int, int>{-1, 1});
  CHECK(groups[2] == std::pair<int, int>{3, 2});
  CHECK_THROWS_AS(make_monomial({}, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial({0}, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial({8}, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial({-8}, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial(std::vector<int>(21, 1), 8), std::invalid_argument);
}

TEST_CASE("monomial evaluation multiplies per-direction wick powers") {
  const Fixture fx(1.0, 8);
  cvec z(8, cd{0.0, 0.0});
  z[1] = cd{0.7, -0.2};
  z[2] = cd{-0.4, 0.9};
  const double s1 = fx.cov.sigma[1], s2 = fx.cov.sigma[2];
  const WickMonomial m = make_monomial({1, 1, 2}, 8);
  const double want = s1 * s1 * hermite(2, 0.7 / s1) * s2 * hermite(1, -0.4 / s2);
  CHECK(monomial_eval(m, z, fx.cov) == doctest::Approx(want).epsilon(1e-13));
  // negative index reads the imaginary part
  const WickMonomial neg = make_monomial({-2}, 8);
  CHECK(monomial_eval(neg, z, fx.cov) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("monomial variance closed forms") {
  const Fixture fx(1.0, 8);
  const double s1 = fx.cov.sigma[1], s2 = fx.cov.sigma[2];
  CHECK(monomial_variance(make_monomial({1}, 8), fx.cov) == doctest::Approx(s1 * s1));
  CHECK(monomial_variance(make_monomial({1, 1}, 8), fx.cov) ==
        doctest::Approx(2.0 * s1 * s1 * s1 * s1));
  CHECK(monomial_variance(make_monomial({1, -1}, 8), fx.cov) ==
        doctest::Approx(s1 * s1 * s1 * s1));
  CHECK(monomial_variance(make_monomial({2, 2, 2}, 8), fx.cov) ==
        doctest::Approx(6.0 * std::pow(s2, 6)));
}

TEST_CASE("permanent kernels agree with the reference definition") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 1; k <= 5; ++k) {
    for (int rep = 0; rep < 8; ++rep) {
      std::vector<double> m(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
      for (double& v : m) v = u(eng);
      CHECK(permanent_naive(m, k) == perm_reference(m, k));  // identical arithmetic
      CHECK(permanent_ryser(m, k) == doctest::Approx(perm_reference(m, k)).epsilon(1e-11));
    }
  }
  for (int k = 6; k <= 8; ++k) {
    std::vector<double> m(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
    for (double& v : m) v = u(eng);
    CHECK(permanent_ryser(m, k) == doctest::Approx(permanent_naive(m, k)).epsilon(1e-10));
  }
  // all-ones k x k has permanent k!
  for (int k = 1; k <= 10; ++k) {
    std::vector<double> ones(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 1.0);
    CHECK(permanent(ones, k) == doctest::Approx(factorial(k)).epsilon(1e-12));
  }
  CHECK(permanent({}, 0) == 1.0);
  CHECK_THROWS_AS(permanent(std::vector<double>(21 * 21, 1.0), 21), std::invalid_argument);
  CHECK_THROWS_AS(permanent_naive(std::vector<double>(3, 1.0), 2), std::invalid_argument);
}

TEST_CASE("cross-degree monomial covariance vanishes identically") {
  const Fixture fx(1.0, 12);
  const WickMonomial a = make_monomial({1, 2}, 12);
  const WickMonomial b = make_monomial({3}, 12);
  CHECK(monomial_corr(a, b, fx.op, fx.cov, 1) == 0.0);
  CHECK(monomial_corr(b, a, fx.op, fx.cov, 1) == 0.0);
}

TEST_CASE("zero-step covariance equals the variance bit for bit") {
  const Fixture fx(1.0, 12);
  for (const std::vector<int>& idx :
       {std::vector<int>{1}, {4}, {-3}, {1, 1}, {2, 5}, {-2, 2}, {1, 1, 3}, {2, 2, 2},
        {-1, -1, 4, 4}}) {
    const WickMonomial m = make_monomial(idx, 12);
    CHECK(monomial_corr(m, m, fx.op, fx.cov, 0) == monomial_variance(m, fx.cov));
  }
  // distinct multisets of equal degree are orthogonal at n = 0
  const WickMonomial a = make_monomial({1, 1}, 12);
  const WickMonomial b = make_monomial({1, 2}, 12);
  CHECK(monomial_corr(a, b, fx.op, fx.cov, 0) == 0.0);
}

TEST_CASE("degree-1 covariance is half the real part of the linear route") {
  const Fixture fx(1.0, 64);
  for (int k : {1, 3, 10}) {
    for (long long n : {0LL, 1LL, 4LL, 17LL}) {
      const WickMonomial a = make_monomial({k}, 64);
      const WickMonomial b = make_monomial({k + static_cast<int>(n)}, 64);
      cvec ek(64, cd{0.0, 0.0}), ekn(64, cd{0.0, 0.0});
      ek[static_cast<std::size_t>(k)] = cd{1.0, 0.0};
      ekn[static_cast<std::size_t>(k + n)] = cd{1.0, 0.0};
      const double want = 0.5 * corr_linear(fx.field, ek, ekn, n).real();
      CHECK(monomial_corr(a, b, fx.op, fx.cov, n) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("signed pairings under the shift") {
  const Fixture fx(1.0, 32);
  const long long n = 3;
  const auto c = [&](int k) { return fx.field.coeffs[static_cast<std::size_t>(k)].real(); };
  const double want = c(2) * c(2 + 3) / 2.0;
  // matching signs carry the value, mixed signs are orthogonal
  CHECK(monomial_corr(make_monomial({2}, 32), make_monomial({5}, 32), fx.op, fx.cov, n) ==
        doctest::Approx(want).epsilon(1e-13));
  CHECK(monomial_corr(make_monomial({-2}, 32), make_monomial({-5}, 32), fx.op, fx.cov, n) ==
        doctest::Approx(want).epsilon(1e-13));
  CHECK(monomial_corr(make_monomial({2}, 32), make_monomial({-5}, 32), fx.op, fx.cov, n) == 0.0);
  CHECK(monomial_corr(make_monomial({-2}, 32), make_monomial({5}, 32), fx.op, fx.cov, n) == 0.0);
  // index misalignment: T^n moves mass down by n, so |a| != |b| - n vanishes
  CHECK(monomial_corr(make_monomial({2}, 32), make_monomial({6}, 32), fx.op, fx.cov, n) == 0.0);
}

TEST_CASE("degree-2 covariance against a hand-expanded permanent") {
  const Fixture fx(1.0, 32);
  const long long n = 2;
  const auto c = [&](int k) { return fx.field.coeffs[static_cast<std::size_t>(k)].real(); };
  const WickMonomial a = make_monomial({1, 2}, 32);
  const WickMonomial b = make_monomial({1 + 2, 2 + 2}, 32);
  // the permanent of the diagonal table [[x,0],[0,y]] is xy; the sigma
  // factors contribute c_3^2/2 * c_4^2/2 and the shift products c_1/c_3, c_2/c_4
  CHECK(monomial_corr(a, b, fx.op, fx.cov, n) ==
        doctest::Approx(c(1) * c(2) * c(3) * c(4) / 4.0).epsilon(1e-13));
}

TEST_CASE("monomial covariance matches monte carlo") {
  const Fixture fx(1.0, 12);
  struct Case {
    std::vector<int> a, b;
    long long n;
  };
  const std::vector<Case> cases = {
      {{1}, {2}, 1},           {{1, 1}, {2, 2}, 1},      {{1, 2}, {2, 3}, 1},
      {{-1, 3}, {-2, 4}, 1},   {{1, 1, 2}, {3, 3, 4}, 2}, {{2, 2}, {2, 2}, 0},
  };
  for (const Case& tc : cases) {
    const WickMonomial a = make_monomial(tc.a, 12);
    const WickMonomial b = make_monomial(tc.b, 12);
    const double exact = monomial_corr(a, b, fx.op, fx.cov, tc.n);
    McOptions opts;
    opts.mean_f = 0.0;  // renormalized monomials are centered
    opts.mean_g = 0.0;
    const auto f = [&](const cvec& z) { return monomial_eval(a, z, fx.cov); };
    const auto g = [&](const cvec& z) { return monomial_eval(b, z, fx.cov); };
    const McEstimate mc = corr_mc(fx.op, fx.cov, f, g, tc.n, 256000, 91, opts);
    CHECK(std::fabs(mc.value - exact) <= 4.0 * mc.stderr_);
  }
}

TEST_CASE("observable assembly merges, sorts and drops zeros") {
  const ChaosObservable f = make_chaos_observable(
      8, 1.5,
      {{WickMonomial{{2, 1}}, 0.25},
       {WickMonomial{{1, 2}}, 0.75},
       {WickMonomial{{3}}, 2.0},
       {WickMonomial{{1, 1}}, 0.5},
       {WickMonomial{{4}}, 0.0}});
  CHECK(f.degree0 == 1.5);
  REQUIRE(f.terms.size() == 3);
  CHECK(f.terms[0].monomial.indices == std::vector<int>{3});
  CHECK(f.terms[0].coeff == 2.0);
  CHECK(f.terms[1].monomial.indices == std::vector<int>{1, 1});
  CHECK(f.terms[2].monomial.indices == std::vector<int>{1, 2});
  CHECK(f.terms[2].coeff == 1.0);  // merged duplicates
  CHECK(observable_max_degree(f) == 2);
}

TEST_CASE("observable second moment is the orthogonal sum") {
  const Fixture fx(1.0, 10);
  const ChaosObservable f = make_chaos_observable(
      10, 0.7,
      {{WickMonomial{{1}}, 1.2}, {WickMonomial{{2, 2}}, -0.5}, {WickMonomial{{1, 3}}, 0.9}});
  double want = 0.7 * 0.7;
  for (const ChaosTerm& t : f.terms)
    want += t.coeff * t.coeff * monomial_variance(t.monomial, fx.cov);
  CHECK(observable_l2_sq(f, fx.cov) == doctest::Approx(want).epsilon(1e-14));
  // the n = 0 correlation is the centered part of the same sum
  CHECK(chaos_corr(f, f, fx.op, fx.cov, 0) ==
        doctest::Approx(want - 0.49).epsilon(1e-12));
}

TEST_CASE("chaos correlation pairs only equal degrees") {
  const Fixture fx(1.0, 10);
  const ChaosObservable even =
      make_chaos_observable(10, 0.0, {{WickMonomial{{1, 2}}, 1.0}, {WickMonomial{{2, 2}}, 0.4}});
  const ChaosObservable odd =
      make_chaos_observable(10, 0.0, {{WickMonomial{{1}}, 1.0}, {WickMonomial{{1, 2, 3}}, 0.3}});
  for (long long n : {0LL, 1LL, 3LL}) CHECK(chaos_corr(even, odd, fx.op, fx.cov, n) == 0.0);
  // total equals the per-degree decomposition
  const ChaosObservable mixed =
      make_chaos_observable(10, 0.2, {{WickMonomial{{2}}, 0.8}, {WickMonomial{{1, 3}}, -0.6}});
  const double total = chaos_corr(mixed, mixed, fx.op, fx.cov, 2);
  const double parts = chaos_corr_degree(mixed, mixed, 1, fx.op, fx.cov, 2) +
                       chaos_corr_degree(mixed, mixed, 2, fx.op, fx.cov, 2);
  CHECK(total == doctest::Approx(parts).epsilon(1e-14));
}

TEST_CASE("symmetrization divides by the ordering count") {
  const ChaosObservable f = make_chaos_observable(
      8, 0.0, {{WickMonomial{{1, 2}}, 6.0}, {WickMonomial{{1, 1, 2}}, 12.0}});
  const SymmetricCoefficients sym = symmetrize(f);
  CHECK(sym.degrees.at(2).at({1, 2}) == doctest::Approx(3.0));    // 6 / C(2,1)
  CHECK(sym.degrees.at(3).at({1, 1, 2}) == doctest::Approx(4.0)); // 12 / (3!/2!)
  const ChaosObservable back = desymmetrize(sym, 0.0);
  REQUIRE(back.terms.size() == f.terms.size());
  for (std::size_t i = 0; i < f.terms.size(); ++i) {
    CHECK(back.terms[i].monomial.indices == f.terms[i].monomial.indices);
    CHECK(back.terms[i].coeff == doctest::Approx(f.terms[i].coeff).epsilon(1e-15));
  }
}

TEST_CASE("multilinear norm brackets") {
  // degree 1: both ends are the euclidean norm of the coefficients
  const ChaosObservable lin =
      make_chaos_observable(8, 0.0, {{WickMonomial{{1}}, 3.0}, {WickMonomial{{-2}}, 4.0}});
  const NormBracket b1 = multilinear_norm(symmetrize(lin), 1);
  CHECK(b1.lower == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(b1.upper == doctest::Approx(5.0).epsilon(1e-14));

  // degree 2: matrix [[2,2],[2,0]] has spectral norm 1 + sqrt(5), frobenius sqrt(12)
  const ChaosObservable quad =
      make_chaos_observable(8, 0.0, {{WickMonomial{{1, 1}}, 2.0}, {WickMonomial{{1, 2}}, 4.0}});
  const NormBracket b2 = multilinear_norm(symmetrize(quad), 2);
  CHECK(b2.lower == doctest::Approx(1.0 + std::sqrt(5.0)).epsilon(1e-9));
  CHECK(b2.upper == doctest::Approx(std::sqrt(12.0)).epsilon(1e-13));

  // degree 3 rank-one tensor: both ends at ||v||^3 = 1 for v = (0.6, 0.8)
  const double v1 = 0.6, v2 = 0.8;
  const ChaosObservable cubed = make_chaos_observable(
      8, 0.0,
      {{WickMonomial{{1, 1, 1}}, v1 * v1 * v1},
       {WickMonomial{{1, 1, 2}}, 3.0 * v1 * v1 * v2},
       {WickMonomial{{1, 2, 2}}, 3.0 * v1 * v2 * v2},
       {WickMonomial{{2, 2, 2}}, v2 * v2 * v2}});
  const NormBracket b3 = multilinear_norm(symmetrize(cubed), 3);
  CHECK(b3.upper == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b3.lower == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b3.lower <= b3.upper);

  // random degree 3: the bracket must stay ordered
  const ChaosObservable rnd = make_chaos_observable(
      8, 0.0,
      {{WickMonomial{{1, 2, 3}}, 0.7},
       {WickMonomial{{1, 1, 4}}, -1.3},
       {WickMonomial{{2, 4, 4}}, 0.4},
       {WickMonomial{{-1, 2, 5}}, 0.9}});
  const NormBracket br = multilinear_norm(symmetrize(rnd), 3);
  CHECK(br.lower <= br.upper);
  CHECK(br.lower > 0.0);
  CHECK(multilinear_norm(symmetrize(rnd), 5).upper == 0.0);
  CHECK_THROWS_AS(multilinear_norm(symmetrize(rnd), 0), std::invalid_argument);
}

TEST_CASE("observable space norms from the brackets") {
  const Fixture fx(1.0, 8);
  const ChaosObservable f = make_chaos_observable(8, 3.0, {{WickMonomial{{1}}, 2.0}});
  const double s1 = fx.cov.sigma[1];
  const double l2_sq = 9.0 + 4.0 * s1 * s1;
  CHECK(x_norm(f, fx.cov) == doctest::Approx(std::sqrt(l2_sq + 4.0)).epsilon(1e-13));
  CHECK(y_norm(f, fx.cov) == doctest::Approx(std::sqrt(l2_sq) + 2.0).epsilon(1e-13));
}

TEST_CASE("polynomial evaluation and directional derivatives") {
  // p = t1^3 t2 over directions (1, 2)
  const PolyObservable p = make_poly({1, 2}, {{{3, 1}, 1.0}}, 8);
  cvec z(8, cd{0.0, 0.0});
  z[1] = cd{1.5, -0.4};
  z[2] = cd{-2.0, 0.1};
  const double t1 = 1.5, t2 = -2.0;
  CHECK(poly_eval(p, z) == doctest::Approx(t1 * t1 * t1 * t2).epsilon(1e-14));
  CHECK(poly_derivative_eval(p, z, {1, 1}) == doctest::Approx(6.0 * t1 * t2).epsilon(1e-14));
  CHECK(poly_derivative_eval(p, z, {1, 2}) == doctest::Approx(3.0 * t1 * t1).epsilon(1e-14));
  CHECK(poly_derivative_eval(p, z, {3}) == 0.0);          // direction not in vars
  CHECK(poly_derivative_eval(p, z, {2, 2}) == 0.0);       // differentiated to death
  CHECK_THROWS_AS(make_poly({2, 1}, {}, 8), std::invalid_argument);   // unsorted
  CHECK_THROWS_AS(make_poly({1, 1}, {}, 8), std::invalid_argument);   // duplicate
  CHECK_THROWS_AS(make_poly({1}, {{{-1}, 1.0}}, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_poly({1}, {{{1, 2}, 1.0}}, 8), std::invalid_argument);  // arity
}

TEST_CASE("hermite expansion of plain powers") {
  const Fixture fx(1.0, 8);
  const double s1 = fx.cov.sigma[1], s2 = fx.cov.sigma[2];

  // t^2 = :t^2: + sigma^2
  const ChaosObservable sq = poly_to_chaos(make_poly({1}, {{{2}, 1.0}}, 8), fx.cov, 8);
  CHECK(sq.degree0 == doctest::Approx(s1 * s1).epsilon(1e-15));
  REQUIRE(sq.terms.size() == 1);
  CHECK(sq.terms[0].monomial.indices == std::vector<int>{1, 1});
  CHECK(sq.terms[0].coeff == doctest::Approx(1.0).epsilon(1e-15));

  // t^3 = :t^3: + 3 sigma^2 :t:
  const ChaosObservable cube = poly_to_chaos(make_poly({2}, {{{3}, 1.0}}, 8), fx.cov, 8);
  CHECK(cube.degree0 == 0.0);
  REQUIRE(cube.terms.size() == 2);
  CHECK(cube.terms[0].monomial.indices == std::vector<int>{2});
  CHECK(cube.terms[0].coeff == doctest::Approx(3.0 * s2 * s2).epsilon(1e-14));
  CHECK(cube.terms[1].monomial.indices == std::vector<int>{2, 2, 2});
  CHECK(cube.terms[1].coeff == doctest::Approx(1.0).epsilon(1e-15));

  // distinct directions multiply freely: t1 t2 = :t1 t2:
  const ChaosObservable prod = poly_to_chaos(make_poly({1, 2}, {{{1, 1}, 1.0}}, 8), fx.cov, 8);
  CHECK(prod.degree0 == 0.0);
  REQUIRE(prod.terms.size() == 1);
  CHECK(prod.terms[0].monomial.indices == std::vector<int>{1, 2});
}

TEST_CASE("chaos expansion reproduces the polynomial pointwise") {
  const Fixture fx(1.0, 8);
  const PolyObservable p = make_poly(
      {-2, 1, 3}, {{{0, 2, 1}, 1.3}, {{3, 0, 0}, -0.8}, {{1, 1, 1}, 0.5}, {{0, 0, 0}, 2.0}}, 8);
  const ChaosObservable chaos = poly_to_chaos(p, fx.cov, 8);
  SampleCursor cursor(fx.cov, 17, 0);
  cvec z;
  for (int i = 0; i < 25; ++i) {
    cursor.next(z);
    const double a = poly_eval(p, z);
    const double b = observable_eval(chaos, z, fx.cov);
    CHECK(a == doctest::Approx(b).epsilon(1e-11));
  }
}

TEST_CASE("derivative estimates recover the expansion coefficients") {
  const Fixture fx(1.0, 8);
  const PolyObservable p = make_poly(
      {1, 2}, {{{0, 0}, 2.0}, {{1, 0}, 1.5}, {{1, 1}, -0.7}, {{0, 2}, 0.9}}, 8);
  const CoeffCheckReport report = coeff_from_derivatives(p, fx.cov, 2718, 64000);
  const ChaosObservable chaos = poly_to_chaos(p, fx.cov, 8);
  REQUIRE(report.by_degree.count(0) == 1);
  REQUIRE(report.by_degree.count(1) == 1);
  REQUIRE(report.by_degree.count(2) == 1);
  int checked = 0;
  for (const auto& [degree, entries] : report.by_degree) {
    (void)degree;
    for (const CoeffCheckEntry& e : entries) {
      CHECK(std::fabs(e.mc_value - e.algebraic) <= 4.0 * (e.mc_stderr + 1e-15));
      ++checked;
    }
  }
  CHECK(checked >= 6);
  // the algebraic side is exactly the expansion table
  for (const CoeffCheckEntry& e : report.by_degree.at(0)) CHECK(e.algebraic == chaos.degree0);
  CHECK_THROWS_AS(coeff_from_derivatives(p, fx.cov, 1, 500), std::invalid_argument);
}
