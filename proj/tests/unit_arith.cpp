#include <catch2/catch_amalgamated.hpp>

#include <primeineq/arith.hpp>

using namespace primeineq;

TEST_CASE("sieve agrees with trial division")
{
    PrimeTable T(10000);
    for (long long n = 1; n <= 10000; n++)
        REQUIRE(T.is_prime(n) == trial_division_is_prime(n));
}

TEST_CASE("lambda prime")
{
    PrimeTable T(1000000);
    CHECK(T.lambda_prime(2) == Catch::Approx(std::log(2.0)));
    CHECK(T.lambda_prime(1) == 0.0);
    CHECK_THROWS_AS(T.lambda_prime(0), std::out_of_range);
    CHECK_THROWS_AS(T.lambda_prime(2000000), std::out_of_range);
    double psi = 0;
    for (long long n = 1; n <= 1000000; n++) psi += T.lambda_prime(n);
    // theta(1e6) = 998484.17...; PNT-scale sanity plus the frozen value
    CHECK(psi == Catch::Approx(998484.17).epsilon(1e-6));
}

TEST_CASE("local von Mangoldt model")
{
    CHECK(local_von_mangoldt(6, 5) == 3.0);
    CHECK(local_von_mangoldt(6, 4) == 0.0);
    CHECK(local_von_mangoldt(1, 42) == 1.0);
    // q-periodicity and exact mean 1
    for (long long q : {2, 6, 30, 7, 15}) {
        double mean = 0;
        for (long long n = 17; n < 17 + q; n++) {
            mean += local_von_mangoldt(q, n);
            CHECK(local_von_mangoldt(q, n) == local_von_mangoldt(q, n + 5 * q));
            CHECK(local_von_mangoldt(q, n) == local_von_mangoldt(q, n - 7 * q));
        }
        CHECK(mean / double(q) == Catch::Approx(1.0));
    }
    CHECK(local_von_mangoldt_plus(6, -5) == 0.0);
    CHECK(local_von_mangoldt_plus(6, 5) == 3.0);
}

TEST_CASE("w and W")
{
    // w(N) = max(1, logloglog N) stays at 1 for every feasible N
    CHECK(w_of(1000000) == 1.0);
    CHECK(w_of(16) == 1.0);
    CHECK(W_of(1000000) == 1);
    CHECK(W_of(16) == 1);
    CHECK(W_of(12345, 30) == 30);
    // the first N where w exceeds 2 is astronomically large; sanity only
    CHECK(w_of(1LL << 62) < 2.0);
}

TEST_CASE("W-tricked lambda")
{
    PrimeTable T(700000);
    // literal formula phi(W)/W Lambda'(Wn + b)
    CHECK(w_tricked_lambda(T, 1, 1, 7) == T.lambda_prime(8));
    CHECK(w_tricked_lambda(T, 1, 6, 1) == Catch::Approx(std::log(7.0) / 3.0));
    CHECK(w_tricked_lambda(T, 1, 6, 0) == 0.0);
    CHECK_THROWS_AS(w_tricked_lambda(T, 2, 6, 1), std::invalid_argument);
    // mean over n <= M within 10% of 1 (primes in progressions)
    double mean = 0;
    long long M = 100000;
    for (long long n = 1; n <= M; n++) mean += w_tricked_lambda(T, 1, 6, n);
    CHECK(std::abs(mean / double(M) - 1.0) < 0.10);
}

TEST_CASE("mobius and phi")
{
    CHECK(mobius(6) == 1);
    CHECK(mobius(4) == 0);
    CHECK(mobius(30) == -1);
    CHECK(euler_phi(6) == 2);
    CHECK(euler_phi(30) == 8);
    long long s = 0;
    for (long long d = 1; d <= 12; d++)
        if (12 % d == 0) s += mobius(d);
    CHECK(s == 0);
    // phi(W)/W for W = 30 is 4/15
    CHECK(euler_phi(30) * 15 == 4 * 30);
}

TEST_CASE("the fixed bump rho")
{
    const auto& rho = rho_bump();
    CHECK(rho(0.0) == 1.0);
    CHECK(rho(0.49) == 1.0);
    CHECK(rho(1.0) == 0.0);
    CHECK(rho(-1.2) == 0.0);
    for (double x = -1.3; x <= 1.3; x += 0.037) {
        CHECK(rho(x) >= 0.0);
        CHECK(rho(x) <= 1.0);
    }
    CHECK(rho.integral() == Catch::Approx(1.5));
    double quad = integrate([&](double x) { return rho(x); }, -1, 1, 1e-12);
    CHECK(quad == Catch::Approx(1.5).epsilon(1e-9));

    // derivatives: finite differences agree, and sampled magnitudes stay
    // below recorded d_j constants
    double d1max = 0, d2max = 0;
    for (int i = 0; i < 10000; i++) {
        double x = -1.0 + 2.0 * i / 9999.0;
        d1max = std::max(d1max, std::abs(rho.deriv(x, 1)));
        d2max = std::max(d2max, std::abs(rho.deriv(x, 2)));
    }
    CHECK(d1max < 8.0);    // recorded constants for this mollifier
    CHECK(d2max < 120.0);
    for (double x : {0.6, 0.8, -0.55}) {
        double h = 1e-5;
        CHECK(std::abs((rho(x + h) - rho(x - h)) / (2 * h) - rho.deriv(x, 1)) < 1e-5);
    }
}

TEST_CASE("bump fourier decay")
{
    SmoothBump chi(1.0);
    // |chi_hat(alpha)| <= A (1+|alpha|)^-4 on a log-spaced grid; A recorded
    double A = 0;
    for (double a : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        double v = std::abs(chi.fourier(a));
        A = std::max(A, v * std::pow(1.0 + a, 4.0));
    }
    INFO("recorded decay constant A = " << A);
    for (double a : {0.7, 1.5, 3.0, 6.0, 12.0, 24.0}) {
        double v = std::abs(chi.fourier(double(a)));
        CHECK(v <= 1.0001 * A / std::pow(1.0 + double(a), 4.0) + 1e-12);
    }
    CHECK(chi.fourier(0.0) == Catch::Approx(chi.integral()));
}

TEST_CASE("smooth sandwich pair")
{
    auto [fp, fm] = smooth_majorant_minorant(0.1);
    CHECK(fm(0.5) == 1.0);
    CHECK(fp(-0.6) == 0.0);
    for (double x = -0.5; x <= 1.5; x += 0.01) {
        double ind_inner = (x >= 0.1 && x <= 0.9) ? 1.0 : 0.0;
        double ind_unit = (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
        double ind_outer = (x >= -0.1 && x <= 1.1) ? 1.0 : 0.0;
        CHECK(ind_inner <= fm(x) + 1e-12);
        CHECK(fm(x) <= ind_unit + 1e-12);
        CHECK(ind_unit <= fp(x) + 1e-12);
        CHECK(fp(x) <= ind_outer + 1e-12);
    }
}

TEST_CASE("partition of unity")
{
    double delta = 0.1;
    auto parts = partition_of_unity(delta);
    CHECK(parts.size() <= std::size_t(std::ceil(4.0 / delta)) + 1);
    for (double x : {-0.9, -0.3, 0.0, 0.4, 0.85}) {
        double s = 0;
        int active = 0;
        for (auto& p : parts) {
            double v = p(x);
            s += v;
            if (v > 0) active++;
        }
        CHECK(s == Catch::Approx(1.0).margin(1e-12)); // inside [-1+d, 1-d]
        CHECK(active <= 2);
    }
    // outside [-1-d, 1+d] everything vanishes
    double far = 0;
    for (auto& p : parts) far += p(1.2);
    CHECK(far == 0.0);
    // pieces are supported on intervals of length <= 2 delta
    for (auto& p : parts)
        CHECK(p.support_hi() - p.support_lo() <= 2 * delta + 1e-12);
}

TEST_CASE("lipschitz box approximation")
{
    double N = 10.0, delta = 0.05, sigma = 1.0;
    auto F = [&](const std::vector<double>& x) {
        double m = 0;
        for (double xi : x) m = std::max(m, std::abs(xi) / N);
        return std::max(0.0, 1.0 - m);
    };
    auto approx = lipschitz_box_approx(F, 2, delta, sigma, N, 13);
    INFO("pieces " << approx.pieces.size() << " sup err "
                   << approx.measured_sup_error);
    CHECK(approx.measured_sup_error <= 0.05 / sigma * 4.0); // recorded constant
    CHECK(!approx.pieces.empty());
}

TEST_CASE("sieve weight")
{
    PrimeTable T(100000, true);
    SieveParams sp(0.1, 100000, 30);
    CHECK(sp.R == Catch::Approx(std::pow(10.0, 0.5)));
    CHECK(sieve_weight_lambda_rho(T, 1, sp) == Catch::Approx(std::log(sp.R)));
    // prime >= R: only d = 1 contributes
    CHECK(sieve_weight_lambda_rho(T, 97, sp) == Catch::Approx(std::log(sp.R)));
    CHECK(sieve_weight_lambda_rho(T, -97, sp) == Catch::Approx(std::log(sp.R)));
    CHECK_THROWS_AS(sieve_weight_lambda_rho(T, 0, sp), std::invalid_argument);
    CHECK_THROWS_AS(SieveParams(0.05, 100, 1), std::invalid_argument); // R < 2

    // nu
    SieveParams sp1(0.1, 100000, 1);
    CHECK(nu_weight(T, 997, sp1) ==
          Catch::Approx(std::log(sp1.R) / (2 * sp1.c_rho_2) + 0.5));
    for (long long n = 1; n <= 3000; n++) {
        CHECK(nu_weight(T, n, sp) >= 0.0);
        CHECK(nu_weight(T, n, sp) >= 0.5 * local_von_mangoldt(30, n) - 1e-15);
    }

    // (1/(gamma const)) nu majorises Lambda' + Lambda^+_{Z/WZ} pointwise;
    // the constant is found empirically and recorded
    double cmaj = 0;
    for (long long n = 1; n <= 100000; n++) {
        double top = T.lambda_prime(n) + local_von_mangoldt_plus(30, n);
        if (top == 0) continue;
        cmaj = std::max(cmaj, top / nu_weight(T, n, sp));
    }
    INFO("recorded majorisation constant = " << cmaj);
    // dominated by n in {2, 3, 5}: there Lambda_W vanishes and the sieve
    // square is tiny, so the constant is large but finite
    CHECK(cmaj < 1000.0);
    double cmaj_coprime = 0;
    for (long long n = 7; n <= 100000; n++) {
        if (std::gcd(n, 30LL) != 1) continue;
        double top = T.lambda_prime(n) + local_von_mangoldt_plus(30, n);
        if (top > 0) cmaj_coprime = std::max(cmaj_coprime, top / nu_weight(T, n, sp));
    }
    CHECK(cmaj_coprime < 10.0);
    for (long long n = 1; n <= 100000; n += 37) {
        double top = T.lambda_prime(n) + local_von_mangoldt_plus(30, n);
        CHECK(top <= cmaj * nu_weight(T, n, sp) + 1e-12);
    }

    // the mean of (1/c_rho2) Lambda_{rho,R,2} normalises to 1 only as
    // log R -> infinity; at desk scales it sits far below and grows with R.
    // Record the measured values rather than asserting the asymptotic.
    PrimeTable T6(1000000, true);
    double mean_small = 0, mean_big = 0;
    SieveParams g1(0.1, 1000000, 30);   // R = 10^0.6
    SieveParams g2(0.28, 1000000, 30);  // R = 10^1.68
    for (long long n = 1; n <= 200000; n++) {
        mean_small += sieve_weight_lambda_rho(T6, n, g1) / g1.c_rho_2;
        mean_big += sieve_weight_lambda_rho(T6, n, g2) / g2.c_rho_2;
    }
    mean_small /= 200000;
    mean_big /= 200000;
    INFO("mean (1/c)Lambda_{rho,R,2}: R=10^0.6 -> " << mean_small
         << ", R=10^1.68 -> " << mean_big);
    CHECK(mean_small > 0.05);
    CHECK(mean_big > mean_small); // slow convergence upward toward 1
    CHECK(mean_big < 1.2);
}

TEST_CASE("convolution against a bump")
{
    SmoothBump chi(2.0);
    std::vector<double> f = {1.0};
    CHECK(convolve_chi(f, 0, chi, 0.0) == 1.0);
    CHECK(convolve_chi(f, 0, chi, 4.0) == 0.0);
    CHECK(convolve_chi(f, 0, chi, 2.0) == 0.0); // boundary of the support

    // Fubini: int (f * chi) = (sum f) * int chi
    std::uint64_t st = 11;
    std::vector<double> g(9);
    double gs = 0;
    for (auto& x : g) { x = uniform01(st); gs += x; }
    double lhs = integrate([&](double x) { return convolve_chi(g, -4, chi, x); },
                           -8.0, 8.0, 1e-10);
    CHECK(lhs == Catch::Approx(gs * chi.integral()).epsilon(1e-7));
}
