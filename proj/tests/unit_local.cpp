#include <catch2/catch_amalgamated.hpp>

#include <primeineq/local.hpp>

#include "test_helpers.hpp"

using namespace primeineq;
using namespace primeineq::testing;

namespace {
IntMatrix three_ap_forms()
{
    IntMatrix ap(3, 2, Int(0));
    ap(0, 0) = 1;
    ap(1, 0) = 1; ap(1, 1) = 1;
    ap(2, 0) = 1; ap(2, 1) = 2;
    return ap;
}

IntMatrix remark_forms()
{
    // Xi(x) = (x1, x1+x2, x1+2x2, x3)
    IntMatrix Xi(4, 3, Int(0));
    Xi(0, 0) = 1;
    Xi(1, 0) = 1; Xi(1, 1) = 1;
    Xi(2, 0) = 1; Xi(2, 1) = 2;
    Xi(3, 2) = 1;
    return Xi;
}
} // namespace

TEST_CASE("local factor alpha")
{
    IntMatrix I3 = IntMatrix::identity(3, Int(1), Int(0));
    std::vector<Int> r0(3, Int(0));
    CHECK(local_factor_alpha(I3, {2, 3, 5}, r0) == Rat(1, 30));
    CHECK(local_factor_alpha(I3, {1, 1, 1}, r0) == Rat(1));

    // incompatible congruences
    IntMatrix X(2, 1);
    X(0, 0) = 1;
    X(1, 0) = 1;
    CHECK(local_factor_alpha(X, {2, 2}, {Int(0), Int(1)}) == Rat(0));

    // 3-AP mod 2: the four residue pairs leave exactly one
    CHECK(local_factor_alpha(three_ap_forms(), {2, 2, 2},
                             {Int(0), Int(0), Int(0)}) == Rat(1, 4));

    // multiplicativity across coprime moduli
    auto ap = three_ap_forms();
    std::vector<Int> rr = {Int(1), Int(0), Int(2)};
    CHECK(local_factor_alpha(ap, {6, 6, 6}, rr) ==
          local_factor_alpha(ap, {2, 2, 2}, rr) *
              local_factor_alpha(ap, {3, 3, 3}, rr));

    CHECK_THROWS_AS(local_factor_alpha(I3, {4, 1, 1}, r0), std::invalid_argument);
}

TEST_CASE("alpha matches Monte-Carlo residue sampling", "[randomized]")
{
    auto ap = three_ap_forms();
    std::vector<Int> r = {Int(0), Int(1), Int(0)};
    Rat alpha = local_factor_alpha(ap, {2, 3, 2}, r);
    double a = to_double(alpha);
    std::uint64_t st = 4242;
    long long hits = 0, trials = 1000000;
    for (long long t = 0; t < trials; t++) {
        long long x = (long long)(splitmix64(st) % 1000000);
        long long y = (long long)(splitmix64(st) % 1000000);
        bool ok = (x + 0) % 2 == 0 && (x + y + 1) % 3 == 0 && (x + 2 * y + 0) % 2 == 0;
        if (ok) hits++;
    }
    double est = double(hits) / double(trials);
    double sigma = std::sqrt(a * (1 - a) / double(trials));
    CHECK(std::abs(est - a) <= 3.5 * sigma);
}

TEST_CASE("singular series on a single form is trivial")
{
    IntMatrix X(1, 1);
    X(0, 0) = 1;
    auto S = singular_series(X, {Int(0)}, 200);
    for (auto& [p, b] : S.factors) CHECK(b == Rat(1));
    CHECK(S.truncated_product == Catch::Approx(1.0));
}

TEST_CASE("singular series for the remark system")
{
    auto Xi = remark_forms();
    std::vector<Int> r0(4, Int(0));
    auto S = singular_series(Xi, r0, 3000);
    REQUIRE(S.factors[0].first == 2);
    // beta_2 = 2 (the display formula's value; the classical 3-AP factor)
    CHECK(S.factors[0].second == Rat(2));
    for (auto& [p, b] : S.factors) {
        if (p == 2) continue;
        // (1 - 2/p)(p/(p-1))^2, exact rational equality
        Rat expect = Rat(int_of(p - 2) * int_of(p), int_of(p - 1) * int_of(p - 1));
        expect.canonicalize();
        CHECK(b == expect);
    }
    // the p >= 3 part approaches the twin-prime constant
    double prod3 = S.truncated_product / 2.0;
    CHECK(prod3 == Catch::Approx(0.66016).margin(0.0005));
    CHECK(S.lo() <= S.truncated_product);
    CHECK(S.truncated_product <= S.hi());

    // periodicity of the factors under shifting r by the modulus
    auto S6 = singular_series(Xi, {Int(6), Int(6), Int(6), Int(6)}, 100);
    auto S0 = singular_series(Xi, r0, 100);
    CHECK(S6.factors[0].second == S0.factors[0].second); // p = 2
    CHECK(S6.factors[1].second == S0.factors[1].second); // p = 3
}

TEST_CASE("singular series detects exact zeros")
{
    // forms x, y, x+y cannot all be odd: beta_2 = 0
    IntMatrix X(3, 2, Int(0));
    X(0, 0) = 1;
    X(1, 1) = 1;
    X(2, 0) = 1; X(2, 1) = 1;
    auto S = singular_series(X, {Int(0), Int(0), Int(0)}, 100);
    CHECK(S.exactly_zero);
    CHECK(S.zero_at_prime == 2);
    CHECK(S.lo() == 0.0);
    CHECK(S.hi() == 0.0);
}

TEST_CASE("singular series preconditions")
{
    // parallel forms diverge
    IntMatrix par(2, 1);
    par(0, 0) = 1;
    par(1, 0) = 2;
    CHECK_THROWS_AS(singular_series(par, {Int(0), Int(0)}, 100),
                    std::invalid_argument);
    // P_cut below an interference prime
    IntMatrix big(2, 2, Int(0));
    big(0, 0) = 1;
    big(1, 0) = 1; big(1, 1) = 101; // forms parallel mod 101
    CHECK_THROWS_AS(singular_series(big, {Int(0), Int(0)}, 50),
                    std::invalid_argument);
    CHECK_NOTHROW(singular_series(big, {Int(0), Int(0)}, 200));
}

TEST_CASE("enumeration and rank counting agree", "[randomized]")
{
    auto Xi = remark_forms();
    std::vector<std::size_t> active = {0, 1, 2, 3};
    for (long long p : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL}) {
        std::vector<Int> r = {Int(0), int_of(p / 2), Int(1), Int(0)};
        CHECK(detail::nonvanishing_density_enum(Xi, r, p, active) ==
              detail::nonvanishing_density_mod_p(Xi, r, p, active));
    }
}

TEST_CASE("local model main term")
{
    IntMatrix X(1, 1);
    X(0, 0) = 1;
    CHECK(local_model_main_term(X, {Int(0)}, {1}, 2.5) == Catch::Approx(2.5));
    CHECK(local_model_main_term(X, {Int(0)}, {6}, 1.0) == Catch::Approx(1.0));
    // 3-AP with W = (6,6,6): beta_2 beta_3 = 2 * 3/4
    CHECK(local_model_main_term(three_ap_forms(), {Int(0), Int(0), Int(0)},
                                {6, 6, 6}, 1.0) == Catch::Approx(1.5));
    CHECK_THROWS_AS(local_model_main_term(X, {Int(0)}, {4}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("local von Mangoldt T matches the singular product at desk scale")
{
    // T(Lambda_W, ..., Lambda_W) ~ (local factor) x J on the
    // purely irrational surd system, where the local factor is exactly 1
    long long N = 2000, W = 6;
    LinearSystem ls(surd_example(), {0, 0}, 1.0, N, 1e9);
    auto period = local_von_mangoldt_period(W);
    std::vector<WeightArray> f(4);
    for (int j = 0; j < 4; j++) {
        f[j].lo = 1;
        f[j].vals.resize(std::size_t(N));
        for (long long n = 1; n <= N; n++)
            f[j].vals[std::size_t(n - 1)] = period[std::size_t(n % W)];
    }
    MollifiedStep box(0.25, 0.75, 0.2); // smooth F factor on ~[0,1]
    std::vector<std::function<double(double)>> Ff(
        4, [box](double x) { return box(x); });
    SmoothBump gb(1.0);
    auto G = [&](const std::vector<double>& z) { return gb(z[0]) * gb(z[1]); };
    double t = T_discrete(f, Ff, 1.0, G, 1.0, ls);

    std::vector<std::function<double(double)>> ones(4, [](double) { return 1.0; });
    auto Fj = [&](const std::vector<double>& x) {
        double p = 1;
        for (double xi : x) p *= box(xi);
        return p;
    };
    auto J = continuous_T(ones, Fj, 1.0, G, 1.0, ls, 4000000, 13);
    INFO("T = " << t << " J = " << J.value << " +- " << J.std_error);
    CHECK(std::abs(t - J.value) <= 0.10 * std::abs(J.value));
}

TEST_CASE("prediction on the surd example")
{
    LinearSystem ls(surd_example(), {0, 0}, 1.0, 100000);
    auto red = rational_reduction(ls, 0.25, ls.epsilon);
    auto pred = predicted_main_term(ls, red, 100, 4000000, 17);
    CHECK(pred.terms.size() == 1);
    CHECK(pred.terms[0].S_exact);
    CHECK(pred.terms[0].S_value == 1.0);
    CHECK(pred.value == Catch::Approx(1.394).margin(0.01));
    double expected_count = 1.394e10 / std::pow(std::log(1e5), 4.0);
    CHECK(pred.predicted_count == Catch::Approx(expected_count).epsilon(0.02));
}

TEST_CASE("prediction vanishes when infeasible")
{
    LinearSystem far(remark_example(), {50000, 0}, 0.5, 1000, 1e9);
    auto red = rational_reduction(far, 0.25, far.epsilon);
    auto pred = predicted_main_term(far, red, 100, 100000, 3);
    CHECK(std::abs(pred.value) < 1e-12);

    LinearSystem empty(remark_example(), {0.5, 0}, 0.1, 1000, 1e9);
    auto red2 = rational_reduction(empty, 0.25, empty.epsilon);
    CHECK(red2.shifts.empty());
    CHECK(predicted_main_term(empty, red2, 100, 100000, 3).value == 0.0);
}

TEST_CASE("rational case routes through the equation path")
{
    // 4-AP system: u = m = 2, so each J is a volume with the G factor
    // evaluated at the single feasible point
    LinearSystem ap(four_ap_example(), {0, 0}, 0.4, 5000, 1e9);
    auto red = rational_reduction(ap, 0.25, ap.epsilon);
    REQUIRE(red.u == 2);
    REQUIRE(red.shifts.size() == 1);
    auto pred = predicted_main_term(ap, red, 3000, 2000000, 9);
    // oracle: the weighted 4-AP count over [0,1]^4 is S * vol with
    // S = 2 prod_{p >= 3}(1-2/p)(p/(p-1))^2 (classical) and
    // vol = N^{-2} vol{x : Xi x in [0,N]^4} = measure of the section
    auto S = singular_series(red.Xi, red.shifts[0].r, 3000);
    INFO("S = " << S.truncated_product << " J = " << pred.terms[0].J.value);
    // 4-term AP local factors: beta_2 = 4, beta_3 = 9/8, beta_5 = 25/32,
    // beta_p = p^2(p-3)/(p-1)^3 in general, product ~ 2.8582 (the classical
    // Hardy-Littlewood 4-AP constant)
    CHECK(S.factors[0].second == Rat(4));
    CHECK(S.factors[1].second == Rat(9, 8));
    CHECK(S.factors[2].second == Rat(25, 32));
    for (auto& [p, b] : S.factors) {
        if (p < 5) continue;
        Rat expect(int_of(p) * int_of(p) * int_of(p - 3),
                   int_of(p - 1) * int_of(p - 1) * int_of(p - 1));
        expect.canonicalize();
        CHECK(b == expect);
    }
    CHECK(S.truncated_product == Catch::Approx(2.8582).margin(0.005));
    // J: x1, x1+x2, x1+2x2, x1+3x2... here Xi comes from the reduction; check
    // against a direct qMC of the indicator volume
    IntMatrix Xi = red.Xi;
    std::vector<double> lo(2, -3.0 * 5000), hi(2, 3.0 * 5000);
    Matrix<double> Xin(4, 2);
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 2; j++) Xin(i, j) = Xi(i, j).get_d();
    auto vol = qmc_integrate(2, lo, hi, [&](const double* x) {
        for (int i = 0; i < 4; i++) {
            double acc = Xin(i, 0) * x[0] + Xin(i, 1) * x[1];
            if (acc < 0 || acc > 5000) return 0.0;
        }
        return 1.0;
    }, 2000000, 21);
    double Jexpect = vol.value / 5000.0 / 5000.0;
    CHECK(pred.terms[0].J.value == Catch::Approx(Jexpect).epsilon(0.02));
}
