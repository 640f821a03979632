#ifndef PRIMEINEQ_ANALYTIC_HPP
#define PRIMEINEQ_ANALYTIC_HPP

// Gowers norms (discrete and continuous), exponential sums over primes,
// Davenport-Heilbronn arc diagnostics, the diophantine-approximation
// estimator, and the discrete-to-continuous transfer check.

#include "counter.hpp"
#include "quad.hpp"

#include <complex>

namespace primeineq {

using cplx = std::complex<double>;

// --- FFT (iterative radix-2) -----------------------------------------------------

inline void fft_inplace(std::vector<cplx>& a, bool inverse = false)
{
    std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)))
        throw std::invalid_argument("fft_inplace: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; i++) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / double(len) * (inverse ? 1.0 : -1.0);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (std::size_t k = 0; k < len / 2; k++) {
                cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= double(n);
}

inline std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// --- Gowers norms ------------------------------------------------------------------

struct GowersResult {
    unsigned k = 2;
    long long N = 0;
    double value = 0;
    std::string method;
    std::size_t N_prime = 0;
};

namespace detail {

// ||f||_{U^2(Z_M)}^4 = sum_xi |f_hat(xi)|^4 with f_hat(xi) = E_x f(x) e(-x xi/M)
inline double u2_fourth_full(const std::vector<double>& f)
{
    std::size_t M = f.size();
    std::vector<cplx> a(M);
    for (std::size_t i = 0; i < M; i++) a[i] = f[i];
    fft_inplace(a);
    double s = 0;
    for (auto& c : a) {
        double m2 = std::norm(c) / (double(M) * double(M));
        s += m2 * m2;
    }
    return s;
}

// direct O(M^3) evaluation of the same quantity (oracle)
inline double u2_fourth_direct(const std::vector<double>& f)
{
    std::size_t M = f.size();
    long double s = 0;
    for (std::size_t x = 0; x < M; x++)
        for (std::size_t h1 = 0; h1 < M; h1++) {
            double a = f[x] * f[(x + h1) % M];
            if (a == 0.0) continue;
            for (std::size_t h2 = 0; h2 < M; h2++)
                s += a * f[(x + h2) % M] * f[(x + h1 + h2) % M];
        }
    return double(s / (long double)(M) / M / M);
}

// ||f||_{U^3(Z_M)}^8 = E_h ||f . f(.+h)||_{U^2(Z_M)}^4, restricted to the h
// with nonempty overlap when f has support length S
inline double u3_eighth_full(const std::vector<double>& f, std::size_t support_len)
{
    std::size_t M = f.size();
    long double total = 0;
    for (std::size_t h = 0; h < M; h++) {
        // skip h where the shifted support cannot overlap
        std::size_t hs = std::min(h, M - h);
        if (support_len > 0 && hs >= support_len && h != 0) continue;
        std::vector<double> g(M);
        bool nz = false;
        for (std::size_t x = 0; x < M; x++) {
            g[x] = f[x] * f[(x + h) % M];
            nz |= g[x] != 0.0;
        }
        if (!nz) continue;
        total += u2_fourth_full(g);
    }
    return double(total / M);
}

} // namespace detail

// full-group Gowers norm on Z_M (M a power of two for k=2 FFT path)
inline double gowers_norm_full(const std::vector<double>& f, unsigned k)
{
    if (k == 2) {
        std::vector<double> g = f;
        if (g.size() & (g.size() - 1)) {
            // direct fallback for non-pow2 sizes
            return std::pow(detail::u2_fourth_direct(g), 0.25);
        }
        return std::pow(detail::u2_fourth_full(g), 0.25);
    }
    if (k == 3)
        return std::pow(detail::u3_eighth_full(f, 0), 1.0 / 8.0);
    throw std::invalid_argument("gowers_norm_full: k must be 2 or 3");
}

// ||f||_{U^k[N]} = ||f 1_[N]||_{U^k(N')} / ||1_[N]||_{U^k(N')},  N' = 4N
// rounded to a power of two (the value is N'-independent once N'/N is large).
inline GowersResult gowers_norm(const std::vector<double>& f_on_1N, unsigned k,
                                std::size_t Np_factor = 4)
{
    long long N = (long long)f_on_1N.size();
    if (k == 2 && N > (1 << 20))
        throw std::invalid_argument("gowers_norm: N cap for k=2 is 2^20");
    if (k == 3 && N > (1 << 14))
        throw std::invalid_argument("gowers_norm: N cap for k=3 is 2^14");
    if (k != 2 && k != 3)
        throw std::invalid_argument("gowers_norm: k must be 2 or 3");

    std::size_t Np = next_pow2(std::size_t(Np_factor) * std::size_t(N));
    std::vector<double> f(Np, 0.0), one(Np, 0.0);
    for (long long n = 1; n <= N; n++) {
        f[std::size_t(n)] = f_on_1N[std::size_t(n - 1)];
        one[std::size_t(n)] = 1.0;
    }
    GowersResult res;
    res.k = k;
    res.N = N;
    res.N_prime = Np;
    if (k == 2) {
        double num = detail::u2_fourth_full(f);
        double den = detail::u2_fourth_full(one);
        res.value = std::pow(num / den, 0.25);
        res.method = "fft_u2";
    } else {
        double num = detail::u3_eighth_full(f, std::size_t(N) + 1);
        double den = detail::u3_eighth_full(one, std::size_t(N) + 1);
        res.value = std::pow(num / den, 1.0 / 8.0);
        res.method = "u3_via_u2";
    }
    return res;
}

// --- the W-trick decay experiment ----------------------------------------------------

struct DecayRow {
    long long N;
    double value;
};

struct DecayTable {
    std::vector<DecayRow> rows;
    bool strictly_decreasing = true;
    double final_over_initial = 1.0;
};

// || Lambda' - Lambda_{Z/WZ} ||_{U^k[N]} across N_list
inline DecayTable gowers_decay_experiment(const PrimeTable& table, long long W,
                                          unsigned k,
                                          const std::vector<long long>& N_list)
{
    DecayTable out;
    auto period = local_von_mangoldt_period(std::max(1LL, W));
    for (long long N : N_list) {
        std::vector<double> f((std::size_t)N);
        for (long long n = 1; n <= N; n++)
            f[std::size_t(n - 1)] =
                table.lambda_prime(n) - (W <= 1 ? 1.0 : period[std::size_t(n % W)]);
        out.rows.push_back({N, gowers_norm(f, k).value});
    }
    for (std::size_t i = 1; i < out.rows.size(); i++)
        if (out.rows[i].value >= out.rows[i - 1].value)
            out.strictly_decreasing = false;
    if (out.rows.size() >= 2)
        out.final_over_initial = out.rows.back().value / out.rows.front().value;
    return out;
}

// || Lambda'_{b,W} - 1 ||_{U^k[N]}  (the W-tricked uniformity experiment)
inline DecayTable gowers_decay_experiment_wtricked(const PrimeTable& table,
                                                   long long b, long long W,
                                                   unsigned k,
                                                   const std::vector<long long>& N_list)
{
    DecayTable out;
    for (long long N : N_list) {
        std::vector<double> f((std::size_t)N);
        for (long long n = 1; n <= N; n++)
            f[std::size_t(n - 1)] = w_tricked_lambda(table, b, W, n) - 1.0;
        out.rows.push_back({N, gowers_norm(f, k).value});
    }
    for (std::size_t i = 1; i < out.rows.size(); i++)
        if (out.rows[i].value >= out.rows[i - 1].value)
            out.strictly_decreasing = false;
    if (out.rows.size() >= 2)
        out.final_over_initial = out.rows.back().value / out.rows.front().value;
    return out;
}

// --- continuous Gowers norm -----------------------------------------------------------

// ||g||_{U^k(R,N)}^{2^k} = (2N)^{-(k+1)} int prod_omega g(x + h.omega) dx dh
inline GowersResult gowers_norm_continuous(const std::function<double(double)>& g,
                                           long long N, unsigned k, long long budget,
                                           std::uint64_t seed)
{
    if (k != 2 && k != 3)
        throw std::invalid_argument("gowers_norm_continuous: k must be 2 or 3");
    std::size_t dim = k + 1;
    std::vector<double> lo(dim), hi(dim);
    lo[0] = -double(N);
    hi[0] = double(N);
    for (std::size_t i = 1; i < dim; i++) {
        lo[i] = -2.0 * double(N);
        hi[i] = 2.0 * double(N);
    }
    auto f = [&](const double* x) {
        double prod = 1.0;
        for (std::size_t mask = 0; mask < (std::size_t(1) << k) && prod != 0.0; mask++) {
            double arg = x[0];
            for (std::size_t i = 0; i < k; i++)
                if (mask & (std::size_t(1) << i)) arg += x[i + 1];
            if (arg < -double(N) || arg > double(N)) return 0.0;
            prod *= g(arg);
        }
        return prod;
    };
    QuadResult I = qmc_integrate(dim, lo, hi, f, budget, seed);
    double norm2k = I.value / std::pow(2.0 * double(N), double(k + 1));
    GowersResult res;
    res.k = k;
    res.N = N;
    res.method = "monte_carlo";
    res.value = norm2k <= 0 ? 0.0 : std::pow(norm2k, 1.0 / double(1 << k));
    return res;
}

// --- exponential sums over primes -------------------------------------------------------

// f(theta) = sum_{n <= N} Lambda'(n) e(theta n)
inline cplx exp_sum_f(const PrimeTable& table, double theta, long long N)
{
    double re = 0, im = 0;
    for (long long p : table.primes()) {
        if (p > N) break;
        double lg = std::log(double(p));
        double ang = 2.0 * M_PI * theta * double(p);
        re += lg * std::cos(ang);
        im += lg * std::sin(ang);
    }
    return {re, im};
}

// batch f(j/M) for j = 0..M-1 by folding Lambda' modulo M and one FFT
// (M a power of two)
inline std::vector<cplx> exp_sum_grid(const PrimeTable& table, long long N,
                                      std::size_t M)
{
    if (M & (M - 1))
        throw std::invalid_argument("exp_sum_grid: M must be a power of two");
    std::vector<cplx> folded(M, 0.0);
    for (long long p : table.primes()) {
        if (p > N) break;
        folded[std::size_t(p % (long long)M)] += std::log(double(p));
    }
    fft_inplace(folded, /*inverse=*/true); // e(+jr/M) convention, then undo the 1/M
    for (auto& c : folded) c *= double(M);
    return folded;
}

// v(beta) = int_0^N e(beta x) dx
inline cplx fejer_v(double beta, long long N)
{
    if (std::abs(beta) < 1e-14) return {double(N), 0.0};
    cplx num = std::polar(1.0, 2.0 * M_PI * beta * double(N)) - cplx(1.0, 0.0);
    return num / (cplx(0.0, 1.0) * 2.0 * M_PI * beta);
}

// --- arc decomposition --------------------------------------------------------------------

struct ArcDecomposition {
    double B = 1.0;      // major arc: ||alpha|| < log^B N / N
    double T = 1.0;      // trivial arc: ||alpha|| >= T
    long long N = 0;

    ArcDecomposition(double B_, double T_, long long N_) : B(B_), T(T_), N(N_)
    {
        if (!(major_bound() < T))
            throw std::invalid_argument("ArcDecomposition: thresholds not ordered");
    }
    double major_bound() const
    {
        return std::pow(std::log(double(N)), B) / double(N);
    }
    // 0 = major, 1 = minor, 2 = trivial
    int classify(double alpha_sup_norm) const
    {
        double a = std::abs(alpha_sup_norm);
        if (a < major_bound()) return 0;
        if (a < T) return 1;
        return 2;
    }
};

struct MajorArcReport {
    double sup_rel_dev = 0;
    double mean_rel_dev = 0;
    std::vector<std::pair<double, double>> samples; // (theta, |f - v|/N)
};

inline MajorArcReport major_arc_compare(const PrimeTable& table, long long N,
                                        double B, std::size_t grid)
{
    ArcDecomposition arcs(B, 0.5, N);
    MajorArcReport rep;
    double bound = arcs.major_bound();
    double acc = 0;
    for (std::size_t i = 0; i < grid; i++) {
        double theta = bound * double(i) / double(grid - 1);
        cplx fv = exp_sum_f(table, theta, N);
        cplx vv = fejer_v(theta, N);
        double dev = std::abs(fv - vv) / double(N);
        rep.samples.push_back({theta, dev});
        rep.sup_rel_dev = std::max(rep.sup_rel_dev, dev);
        acc += dev;
    }
    rep.mean_rel_dev = acc / double(grid);
    return rep;
}

// sup over the (1-dimensional) minor arc of prod_j |f(alpha lambda_j)| / N^d,
// grid maxima plus golden-section refinement: a certified LOWER bound on the
// true sup, never an upper bound.
inline double minor_arc_sup(const std::vector<double>& lambda, const PrimeTable& table,
                            long long N, double B, double T, std::size_t grid,
                            int refine_rounds = 3)
{
    if (grid == 0)
        throw std::invalid_argument("minor_arc_sup: empty grid");
    ArcDecomposition arcs(B, T, N);
    double lo = arcs.major_bound(), hi = T;
    auto val = [&](double a) {
        double prod = 1.0;
        for (double lj : lambda)
            prod *= std::abs(exp_sum_f(table, a * lj, N));
        return prod / std::pow(double(N), double(lambda.size()));
    };
    double best = 0, best_a = lo;
    for (std::size_t i = 0; i < grid; i++) {
        double a = lo + (hi - lo) * double(i) / double(grid - 1);
        double v = val(a);
        if (v > best) { best = v; best_a = a; }
    }
    double step = (hi - lo) / double(grid - 1);
    double a0 = std::max(lo, best_a - step), a1 = std::min(hi, best_a + step);
    const double gr = 0.618033988749895;
    for (int r = 0; r < refine_rounds; r++) {
        // golden-section style shrink toward the local maximum
        double c = a1 - gr * (a1 - a0), d = a0 + gr * (a1 - a0);
        double vc = val(c), vd = val(d);
        best = std::max({best, vc, vd});
        if (vc > vd) a1 = d; else a0 = c;
    }
    return best;
}

// Monte-Carlo estimate of int_U prod_j |f(sum_i alpha_i lambda_ij)|^l dalpha,
// normalised by N^{dl - m}
inline QuadResult mean_value_estimate(const Matrix<double>& Lnum,
                                      const PrimeTable& table, long long N, double l,
                                      const std::vector<double>& U_lo,
                                      const std::vector<double>& U_hi,
                                      long long budget, std::uint64_t seed)
{
    std::size_t m = Lnum.rows, d = Lnum.cols;
    auto f = [&](const double* alpha) {
        double prod = 1.0;
        for (std::size_t j = 0; j < d; j++) {
            double arg = 0;
            for (std::size_t i = 0; i < m; i++) arg += alpha[i] * Lnum(i, j);
            prod *= std::pow(std::abs(exp_sum_f(table, arg, N)), l);
        }
        return prod;
    };
    QuadResult r = qmc_integrate(m, U_lo, U_hi, f, budget, seed);
    double norm = std::pow(double(N), double(d) * l - double(m));
    r.value /= norm;
    r.std_error /= norm;
    // binomial condition (d choose m) l > 2 (d-1 choose m-1)
    auto binom = [](std::size_t n, std::size_t k) {
        double b = 1;
        for (std::size_t i = 0; i < k; i++) b = b * double(n - i) / double(i + 1);
        return b;
    };
    if (!(binom(d, m) * l > 2 * binom(d - 1, m - 1)))
        r.note = "warning: exponent below the mean-value threshold";
    return r;
}

// inf over { t1 <= |beta| <= t2 } of inf_n || n - L^T beta ||_inf for a single
// row L = (lambda_1..lambda_h): grid plus local refinement (an upper bound on
// the true infimum)
inline double diophantine_inf(const std::vector<double>& lambda, double t1, double t2,
                              std::size_t grid, int refine_rounds = 4)
{
    if (!(0 < t1 && t1 < t2))
        throw std::invalid_argument("diophantine_inf: need 0 < t1 < t2");
    auto val = [&](double beta) {
        double mx = 0;
        for (double lj : lambda) {
            double x = beta * lj;
            mx = std::max(mx, std::abs(x - std::round(x)));
        }
        return mx;
    };
    double best = 1e300, best_b = t1;
    for (std::size_t i = 0; i < grid; i++) {
        double b = t1 + (t2 - t1) * double(i) / double(grid - 1);
        double v = val(b);
        if (v < best) { best = v; best_b = b; }
    }
    double step = (t2 - t1) / double(grid - 1);
    double b0 = std::max(t1, best_b - step), b1 = std::min(t2, best_b + step);
    for (int r = 0; r < refine_rounds; r++) {
        std::size_t fine = 64;
        double nb = best_b;
        for (std::size_t i = 0; i <= fine; i++) {
            double b = b0 + (b1 - b0) * double(i) / double(fine);
            double v = val(b);
            if (v < best) { best = v; nb = b; }
        }
        double w = (b1 - b0) / double(fine);
        b0 = std::max(t1, nb - w);
        b1 = std::min(t2, nb + w);
        best_b = nb;
    }
    return best;
}

// --- the transfer identity ------------------------------------------------------------------

struct TransferCheck {
    double lhs = 0;          // T(f_1, ..., f_d)
    double rhs = 0;          // (1 / C_chi eta^d) T~(f_1 * chi, ...)
    double diff = 0;
    double eta_sigma_scale = 0; // the O(eta/sigma) reference size
    double C_chi = 0;
};

inline TransferCheck transfer_check(
    const std::vector<WeightArray>& f,
    const std::vector<std::function<double(double)>>& F_factors, double F_radius,
    const std::function<double(const std::vector<double>&)>& G, double G_radius,
    const LinearSystem& ls, double eta, double sigma_inv, long long budget,
    std::uint64_t seed)
{
    TransferCheck out;
    out.lhs = T_discrete(f, F_factors, F_radius, G, G_radius, ls);

    SmoothBump chi(eta);
    double C_chi = std::pow(chi.integral() / eta, double(ls.d)); // = 1.5^d
    out.C_chi = C_chi;

    std::vector<std::function<double(double)>> g;
    for (std::size_t j = 0; j < ls.d; j++) {
        const WeightArray& wj = f[j];
        g.push_back([wj, chi](double x) { return convolve_chi(wj.vals, wj.lo, chi, x); });
    }
    std::size_t dd = ls.d;
    auto Fjoint = [&F_factors, dd](const std::vector<double>& x) {
        double p = 1;
        for (std::size_t j = 0; j < dd && p != 0.0; j++) p *= F_factors[j](x[j]);
        return p;
    };
    QuadResult Tt = continuous_T(g, Fjoint, F_radius, G, G_radius, ls, budget, seed);
    out.rhs = Tt.value / (C_chi * std::pow(eta, double(ls.d)));
    out.diff = std::abs(out.lhs - out.rhs);
    out.eta_sigma_scale = eta * sigma_inv;
    return out;
}

} // namespace primeineq

#endif
