#include <catch2/catch_amalgamated.hpp>

#include <primeineq/counter.hpp>

#include "test_helpers.hpp"

using namespace primeineq;
using namespace primeineq::testing;

TEST_CASE("count prime solutions basics")
{
    PrimeTable T(100000);
    auto L = from_scalars({{"1", "-1"}});

    // |p1 - p2| <= 0.5 forces p1 = p2: pi(100) = 25
    LinearSystem diag(L, {0}, 0.5, 100);
    CHECK(count_prime_solutions(diag, T).count == 25);

    // eps = 1 adds the twin boundary pairs (2,3), (3,2); these sit exactly on
    // the boundary and must be decided by the exact escalation
    LinearSystem bnd(L, {0}, 1.0, 100);
    auto r = count_prime_solutions(bnd, T);
    CHECK(r.count == 27);
    CHECK(r.boundary_escalations > 0);

    // essentially-zero eps on an irrational form: no solutions
    auto L3 = from_scalars({{"1", "sqrt2", "-sqrt3"}});
    LinearSystem tiny(L3, {0}, 1e-9, 100);
    CHECK(count_prime_solutions(tiny, T).count == 0);
}

TEST_CASE("count matches naive loops")
{
    auto L = from_scalars({{"1", "sqrt2", "-sqrt3"}});
    PrimeTable T(2000);
    double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);

    for (long long N : {100, 500}) {
        LinearSystem ls(L, {0}, 0.5, N);
        auto fast = count_prime_solutions(ls, T, {1e10, 2});
        long long brute = 0;
        for (long long a = 2; a <= N; a++) {
            if (!T.is_prime(a)) continue;
            for (long long b = 2; b <= N; b++) {
                if (!T.is_prime(b)) continue;
                for (long long c = 2; c <= N; c++)
                    if (T.is_prime(c) && std::abs(a + s2 * b - s3 * c) <= 0.5)
                        brute++;
            }
        }
        CHECK(fast.count == double(brute));
    }

    // 2-variable at N = 2000
    auto L2 = from_scalars({{"1", "-sqrt2"}});
    LinearSystem ls2(L2, {0}, 0.75, 2000);
    auto fast2 = count_prime_solutions(ls2, T);
    long long brute2 = 0;
    for (long long a = 2; a <= 2000; a++)
        for (long long b = 2; b <= 2000; b++)
            if (T.is_prime(a) && T.is_prime(b) && std::abs(a - s2 * b) <= 0.75)
                brute2++;
    CHECK(fast2.count == double(brute2));
}

TEST_CASE("count is invariant under column permutation")
{
    PrimeTable T(500);
    auto a = count_prime_solutions(
        LinearSystem(from_scalars({{"1", "sqrt2", "-sqrt3"}}), {0}, 0.5, 500), T);
    auto b = count_prime_solutions(
        LinearSystem(from_scalars({{"-sqrt3", "1", "sqrt2"}}), {0}, 0.5, 500), T);
    auto c = count_prime_solutions(
        LinearSystem(from_scalars({{"sqrt2", "-sqrt3", "1"}}), {0}, 0.5, 500), T);
    CHECK(a.count == b.count);
    CHECK(b.count == c.count);
}

TEST_CASE("budget refusal")
{
    PrimeTable T(100000);
    LinearSystem ls(surd_example(), {0, 0}, 1.0, 100000);
    CounterOptions opts;
    opts.budget_cap = 1000; // absurdly small
    CHECK_THROWS_AS(count_prime_solutions(ls, T, opts), std::runtime_error);
}

TEST_CASE("T_discrete separability")
{
    auto L = from_scalars({{"1", "-1"}});
    LinearSystem ls(L, {0}, 1000.0, 50, 1e9);
    auto period = local_von_mangoldt_period(6);
    std::vector<WeightArray> f(2);
    for (int j = 0; j < 2; j++) {
        f[j].lo = 1;
        f[j].vals.resize(50);
        for (long long n = 1; n <= 50; n++)
            f[j].vals[std::size_t(n - 1)] = period[std::size_t(n % 6)];
    }
    std::vector<std::function<double(double)>> Ff(2, [](double) { return 1.0; });
    auto G1 = [](const std::vector<double>&) { return 1.0; };
    double t = T_discrete(f, Ff, 1.0, G1, 1000.0, ls);
    double s = 0;
    for (long long n = 1; n <= 50; n++) s += period[std::size_t(n % 6)];
    CHECK(t == Catch::Approx(s * s / 50.0).epsilon(1e-12));
}

TEST_CASE("weighted T agrees with the solution-sum oracle")
{
    auto L = from_scalars({{"1", "sqrt2", "-sqrt3"}});
    long long N = 300;
    LinearSystem ls(L, {0}, 0.5, N, 1e9);
    PrimeTable T(N);
    std::vector<WeightArray> f(3);
    for (int j = 0; j < 3; j++) {
        f[j].lo = 1;
        f[j].vals.resize(std::size_t(N));
        for (long long n = 1; n <= N; n++)
            f[j].vals[std::size_t(n - 1)] = T.lambda_prime(n);
    }
    std::vector<std::function<double(double)>> Ff(
        3, [](double x) { return (x >= 0 && x <= 1) ? 1.0 : 0.0; });
    auto G = [&](const std::vector<double>& z) {
        return std::abs(z[0]) <= 0.5 ? 1.0 : 0.0;
    };
    double t = T_discrete(f, Ff, 1.0, G, 0.5, ls) * double(N) * double(N);
    double oracle = 0;
    double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    for (long long a = 2; a <= N; a++)
        for (long long b = 2; b <= N; b++)
            for (long long c = 2; c <= N; c++)
                if (T.is_prime(a) && T.is_prime(b) && T.is_prime(c) &&
                    std::abs(a + s2 * b - s3 * c) <= 0.5)
                    oracle += std::log(double(a)) * std::log(double(b)) *
                              std::log(double(c));
    CHECK(t == Catch::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("T_general agrees with T_discrete when Xi is the identity")
{
    auto L = from_scalars({{"1", "-sqrt2"}});
    long long N = 120;
    LinearSystem ls(L, {0}, 0.6, N, 1e9);
    std::vector<WeightArray> f(2);
    std::uint64_t st = 3;
    for (int j = 0; j < 2; j++) {
        f[j].lo = 1;
        f[j].vals.resize(std::size_t(N));
        for (auto& x : f[j].vals) x = uniform01(st);
    }
    std::vector<std::function<double(double)>> Ff(
        2, [](double x) { return (x >= 0 && x <= 1) ? 1.0 : 0.0; });
    auto G = [&](const std::vector<double>& z) {
        return std::abs(z[0]) <= 0.6 ? 1.0 : 0.0;
    };
    double a = T_discrete(f, Ff, 1.0, G, 0.6, ls);
    IntMatrix Xi = IntMatrix::identity(2, Int(1), Int(0));
    std::vector<Int> r = {Int(0), Int(0)};
    double b = T_general(f, Ff, 1.0, G, 0.6, Xi, r, ls.L, ls.v, N);
    CHECK(a == Catch::Approx(b).epsilon(1e-10));
}

TEST_CASE("lattice restricted sums")
{
    auto L = from_scalars({{"1", "sqrt2", "-sqrt3"}});
    LinearSystem ls(L, {0}, 0.5, 100, 1e9);
    IntMatrix Xi = IntMatrix::identity(3, Int(1), Int(0));
    std::vector<Int> r(3, Int(0));
    std::vector<std::function<double(double)>> Ff(
        3, [](double x) { return (x >= 0 && x <= 1) ? 1.0 : 0.0; });
    auto G = [&](const std::vector<double>& z) {
        return std::abs(z[0]) <= 0.5 ? 1.0 : 0.0;
    };
    double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);

    // all e_j = 1: the unrestricted sum
    double full = lattice_restricted_sum(Ff, 1.0, G, 0.5, ls, {1, 1, 1}, Xi, r);
    double oracle = 0;
    for (long long a = 0; a <= 100; a++)
        for (long long b = 0; b <= 100; b++)
            for (long long c = 0; c <= 100; c++)
                if (std::abs(a + s2 * b - s3 * c) <= 0.5) oracle++;
    CHECK(full == Catch::Approx(oracle));

    // restricted
    double lat = lattice_restricted_sum(Ff, 1.0, G, 0.5, ls, {2, 3, 5}, Xi, r);
    double oracle2 = 0;
    for (long long a = 0; a <= 100; a += 2)
        for (long long b = 0; b <= 100; b += 3)
            for (long long c = 0; c <= 100; c += 5)
                if (std::abs(a + s2 * b - s3 * c) <= 0.5) oracle2++;
    CHECK(lat == Catch::Approx(oracle2));

    // incompatible congruences: exactly zero
    IntMatrix Xi2(2, 3, Int(0));
    Xi2(0, 0) = 1;
    Xi2(1, 0) = 1;
    CHECK(lattice_restricted_sum(Ff, 1.0, G, 0.5, ls, {2, 2}, Xi2,
                                 {Int(0), Int(1)}) == 0.0);

    // non-squarefree moduli are refused
    CHECK_THROWS_AS(
        lattice_restricted_sum(Ff, 1.0, G, 0.5, ls, {4, 1, 1}, Xi, r),
        std::invalid_argument);
}

TEST_CASE("log-weight removal interval")
{
    auto iv = unweighted_from_weighted(100.0, 1000, 2, 1.0);
    CHECK(iv.lo == iv.hi); // delta = 1 degenerates
    CHECK(iv.lo == Catch::Approx(100.0 / std::pow(std::log(1000.0), 2)));
    auto z = unweighted_from_weighted(0.0, 1000, 2, 0.5);
    CHECK(z.lo == 0.0);
    CHECK(z.hi == 0.0);
    auto iv2 = unweighted_from_weighted(50.0, 100000, 4, 0.1);
    CHECK(iv2.lo < iv2.hi);
    CHECK(iv2.lo == Catch::Approx(50.0 / std::pow(std::log(1e5), 4)));
    CHECK(iv2.hi == Catch::Approx(50.0 / std::pow(std::log(1e4), 4)));
    CHECK_THROWS_AS(unweighted_from_weighted(-1.0, 100, 2, 0.5),
                    std::invalid_argument);
}
