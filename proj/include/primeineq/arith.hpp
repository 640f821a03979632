#ifndef PRIMEINEQ_ARITH_HPP
#define PRIMEINEQ_ARITH_HPP

// Prime sieves and the arithmetic functions of the trade: Lambda', local von
// Mangoldt models, W-trick helpers, Moebius/phi, the fixed smooth bump and
// its mollified-indicator relatives, the smoothed sieve weight, and
// discrete-to-continuous convolution.

#include "rational.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numeric>

namespace primeineq {

// --- 1-d adaptive quadrature (shared by bump integrals and Fourier data) ----

namespace detail {
inline double simpson(double a, double b, double fa, double fm, double fb)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
} // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 40)
{
    if (!(a < b)) return a == b ? 0.0 : -integrate(f, b, a, tol, depth);
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = detail::simpson(a, b, fa, fm, fb);
    return detail::adapt(f, a, b, fa, fm, fb, whole, tol, depth);
}

// For integrands oscillating at a known frequency: pre-split so the adaptive
// rule never sees more than a fraction of a period per panel.
inline double integrate_oscillatory(const std::function<double(double)>& f, double a,
                                    double b, double cycles, double tol = 1e-10)
{
    int panels = std::max(4, int(std::ceil(4.0 * std::abs(cycles))));
    double s = 0, h = (b - a) / panels;
    for (int i = 0; i < panels; i++)
        s += integrate(f, a + i * h, a + (i + 1) * h, tol / panels);
    return s;
}

// --- truncated-exponential mollifier kernel ---------------------------------

// g(t) = exp(-1/(1-t^2)) on (-1,1); derivatives via order-5 jets.
namespace detail {

template <int K>
struct Jet {
    std::array<double, K> c{}; // Taylor coefficients about the base point

    static Jet var(double x)
    {
        Jet j;
        j.c[0] = x;
        if (K > 1) j.c[1] = 1.0;
        return j;
    }
    static Jet cons(double x)
    {
        Jet j;
        j.c[0] = x;
        return j;
    }
    Jet operator+(const Jet& o) const
    {
        Jet r;
        for (int i = 0; i < K; i++) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Jet operator-(const Jet& o) const
    {
        Jet r;
        for (int i = 0; i < K; i++) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Jet operator*(const Jet& o) const
    {
        Jet r;
        for (int i = 0; i < K; i++)
            for (int j = 0; i + j < K; j++) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
    Jet recip() const
    {
        Jet r;
        r.c[0] = 1.0 / c[0];
        for (int n = 1; n < K; n++) {
            double s = 0;
            for (int i = 1; i <= n; i++) s += c[i] * r.c[n - i];
            r.c[n] = -s / c[0];
        }
        return r;
    }
    Jet expj() const
    {
        Jet r;
        r.c[0] = std::exp(c[0]);
        for (int n = 1; n < K; n++) {
            double s = 0;
            for (int i = 1; i <= n; i++) s += double(i) * c[i] * r.c[n - i];
            r.c[n] = s / double(n);
        }
        return r;
    }
    // k-th derivative at the base point
    double deriv(int k) const
    {
        double fact = 1;
        for (int i = 2; i <= k; i++) fact *= i;
        return c[k] * fact;
    }
};

inline double mollifier_g(double t)
{
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

inline double mollifier_g_deriv(double t, int k)
{
    if (k == 0) return mollifier_g(t);
    if (std::abs(t) >= 1.0) return 0.0;
    using J = Jet<5>;
    J tj = J::var(t);
    J u = J::cons(1.0) - tj * tj;
    J w = J::cons(0.0) - u.recip();
    J g = w.expj();
    return g.deriv(k);
}

// int_{-1}^{1} g and a cumulative table for G(z) = int_{-1}^{min(z,1)} g
struct MollifierTables {
    static constexpr int M = 4096; // even
    double C;                      // total mass of g
    std::array<double, M + 1> cum; // cumulative integral at -1 + 2i/M
    std::array<double, M + 1> gv;  // g at the nodes

    MollifierTables()
    {
        double h = 2.0 / M;
        cum[0] = 0.0;
        gv[0] = 0.0;
        for (int i = 0; i < M; i++) {
            double a = -1.0 + h * i;
            gv[i + 1] = mollifier_g(a + h);
            // Simpson on each cell
            cum[i + 1] = cum[i] + h / 6.0 * (gv[i] +
                                             4.0 * mollifier_g(a + h / 2) +
                                             gv[i + 1]);
        }
        C = cum[M];
    }

    double G(double z) const
    {
        if (z <= -1.0) return 0.0;
        if (z >= 1.0) return C;
        double h = 2.0 / M;
        int i = int((z + 1.0) / h);
        if (i >= M) i = M - 1;
        double a = -1.0 + h * i;
        double w = z - a;
        // Simpson on the partial cell (one fresh g evaluation)
        return cum[i] + w / 6.0 * (gv[i] + 4.0 * mollifier_g(a + w / 2) +
                                   mollifier_g(z));
    }
};

inline const MollifierTables& mollifier_tables()
{
    static MollifierTables t;
    return t;
}

} // namespace detail

inline double mollifier_mass() { return detail::mollifier_tables().C; }

// --- mollified indicators and the fixed 1-supported rho ----------------------

// M(x) = (1/C) [G((x-lo)/w) - G((x-hi)/w)]: smooth, in [0,1], supported on
// [lo-w, hi+w], identically 1 on [lo+w, hi-w].
struct MollifiedStep {
    double lo = -0.75, hi = 0.75, w = 0.25;

    MollifiedStep() = default;
    MollifiedStep(double l, double h, double ww) : lo(l), hi(h), w(ww)
    {
        if (!(w > 0) || !(lo <= hi))
            throw std::invalid_argument("MollifiedStep: bad parameters");
    }

    double support_lo() const { return lo - w; }
    double support_hi() const { return hi + w; }

    double operator()(double x) const
    {
        const auto& t = detail::mollifier_tables();
        return (t.G((x - lo) / w) - t.G((x - hi) / w)) / t.C;
    }

    // k-th derivative, k in [0,4]
    double deriv(double x, int k) const
    {
        if (k == 0) return (*this)(x);
        const auto& t = detail::mollifier_tables();
        double s = 1.0;
        for (int i = 0; i < k; i++) s /= w;
        return s / t.C * (detail::mollifier_g_deriv((x - lo) / w, k - 1) -
                          detail::mollifier_g_deriv((x - hi) / w, k - 1));
    }

    double integral() const
    {
        // exact by symmetry of the mollifier: plateau + two half-ramps
        return (hi - lo);
    }
};

// The project-wide fixed rho: 1-supported (support [-1,1], == 1 on [-1/2,1/2]).
inline const MollifiedStep& rho_bump()
{
    static MollifiedStep r(-0.75, 0.75, 0.25);
    return r;
}

// chi(x) = rho(x/eta): eta-supported bump with derivative data.
struct SmoothBump {
    double eta = 1.0;

    explicit SmoothBump(double eta_) : eta(eta_)
    {
        if (!(eta > 0)) throw std::invalid_argument("SmoothBump: eta <= 0");
    }

    double operator()(double x) const { return rho_bump()(x / eta); }
    double deriv(double x, int k) const
    {
        double s = 1;
        for (int i = 0; i < k; i++) s /= eta;
        return s * rho_bump().deriv(x / eta, k);
    }
    double support_radius() const { return eta; }
    double integral() const { return eta * rho_bump().integral(); } // = 1.5 eta

    // hat chi(alpha) = int chi(x) e(-alpha x) dx  (real, even).  Composite
    // Gauss-Legendre with the panel count tied to the frequency, so each
    // panel sees well under one oscillation.
    double fourier(double alpha) const
    {
        static const double gl_x[4] = {0.1834346424956498, 0.5255324099163290,
                                       0.7966664774136267, 0.9602898564975363};
        static const double gl_w[4] = {0.3626837833783620, 0.3137066458778873,
                                       0.2223810344533745, 0.1012285362903763};
        double a = std::abs(alpha);
        int panels = std::max(8, int(std::ceil(6.0 * a * eta)) + 8);
        double s = 0, h = eta / panels;
        for (int i = 0; i < panels; i++) {
            double mid = (i + 0.5) * h, half = 0.5 * h;
            double acc = 0;
            for (int k = 0; k < 4; k++) {
                double xp = mid + half * gl_x[k], xm = mid - half * gl_x[k];
                acc += gl_w[k] * ((*this)(xp) * std::cos(2.0 * M_PI * a * xp) +
                                  (*this)(xm) * std::cos(2.0 * M_PI * a * xm));
            }
            s += half * acc;
        }
        return 2.0 * s;
    }
};

inline SmoothBump bump_chi(double eta) { return SmoothBump(eta); }

// f^{-delta} <= 1_[0,1] <= f^{+delta} sandwich pair on the unit interval
inline std::pair<MollifiedStep, MollifiedStep> smooth_majorant_minorant(double delta)
{
    if (!(delta > 0) || !(delta < 1))
        throw std::invalid_argument("smooth_majorant_minorant: delta out of (0,1)");
    MollifiedStep minus(delta / 2, 1 - delta / 2, delta / 4);
    MollifiedStep plus(-delta / 2, 1 + delta / 2, delta / 4);
    return {plus, minus};
}

// smooth partition of unity subordinate to [-1,1], properties (1)-(4)
inline std::vector<MollifiedStep> partition_of_unity(double delta)
{
    if (!(delta > 0) || !(delta < 1))
        throw std::invalid_argument("partition_of_unity: delta out of (0,1)");
    std::size_t t = std::size_t(std::ceil(4.0 / delta));
    std::vector<MollifiedStep> parts;
    parts.reserve(t);
    for (std::size_t i = 1; i <= t; i++) {
        double lo = -1.0 + (double(i) - 1.0) * delta / 2;
        double hi = -1.0 + double(i) * delta / 2;
        parts.emplace_back(lo, hi, delta / 4);
    }
    return parts;
}

// Dense linear-interpolation table of a 1-d function; for weight kernels in
// enumeration hot loops.  Interpolation error ~ sup|f''| h^2 / 8.
struct DenseTable {
    double lo = 0, hi = 1, inv_step = 1;
    std::vector<double> vals;

    DenseTable() = default;
    DenseTable(const std::function<double(double)>& f, double lo_, double hi_,
               std::size_t n = 1 << 18)
        : lo(lo_), hi(hi_)
    {
        vals.resize(n + 1);
        double step = (hi - lo) / double(n);
        inv_step = 1.0 / step;
        for (std::size_t i = 0; i <= n; i++) vals[i] = f(lo + step * double(i));
    }

    double operator()(double x) const
    {
        if (x <= lo || x >= hi) return 0.0;
        double t = (x - lo) * inv_step;
        std::size_t i = std::size_t(t);
        if (i + 1 >= vals.size()) return vals.back();
        double frac = t - double(i);
        return vals[i] + frac * (vals[i + 1] - vals[i]);
    }
};

// --- primes -------------------------------------------------------------------

class PrimeTable {
public:
    explicit PrimeTable(long long limit, bool with_spf = false) : limit_(limit)
    {
        if (limit < 2) throw std::invalid_argument("PrimeTable: limit < 2");
        sieve(with_spf);
    }

    long long limit() const { return limit_; }

    bool is_prime(long long n) const
    {
        if (n < 2 || n > limit_) return false;
        if (n == 2) return true;
        if (n % 2 == 0) return false;
        long long i = (n - 3) / 2;
        return (odd_[i >> 6] >> (i & 63)) & 1;
    }

    // Lambda'(n) = log n on primes, 0 otherwise
    double lambda_prime(long long n) const
    {
        if (n < 1 || n > limit_)
            throw std::out_of_range("lambda_prime: n outside table");
        return is_prime(n) ? std::log(double(n)) : 0.0;
    }

    const std::vector<long long>& primes() const
    {
        if (primes_.empty()) {
            for (long long n = 2; n <= limit_; n++)
                if (is_prime(n)) primes_.push_back(n);
        }
        return primes_;
    }

    bool has_spf() const { return !spf_.empty(); }

    long long smallest_prime_factor(long long n) const
    {
        if (n < 2 || n > limit_ || spf_.empty())
            throw std::out_of_range("smallest_prime_factor: unavailable");
        return spf_[std::size_t(n)];
    }

    // (prime, exponent) pairs of |n|; uses the spf table when in range
    std::vector<std::pair<long long, int>> factorize(long long n) const
    {
        if (n < 0) n = -n;
        if (n == 0) throw std::invalid_argument("factorize: zero");
        std::vector<std::pair<long long, int>> fs;
        if (!spf_.empty() && n <= limit_) {
            while (n > 1) {
                long long p = spf_[std::size_t(n)];
                int e = 0;
                while (n % p == 0) { n /= p; e++; }
                fs.push_back({p, e});
            }
            return fs;
        }
        for (long long p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
            if (n % p) continue;
            int e = 0;
            while (n % p == 0) { n /= p; e++; }
            fs.push_back({p, e});
        }
        if (n > 1) fs.push_back({n, 1});
        return fs;
    }

private:
    long long limit_;
    std::vector<std::uint64_t> odd_; // bit i = primality of 3 + 2i
    mutable std::vector<long long> primes_;
    std::vector<std::uint32_t> spf_;

    void sieve(bool with_spf)
    {
        // segmented sieve over odd numbers
        long long n_odd = limit_ >= 3 ? (limit_ - 3) / 2 + 1 : 0;
        odd_.assign(std::size_t((n_odd + 63) / 64), ~0ULL);
        long long root = (long long)std::sqrt((double)limit_) + 1;
        std::vector<char> small(root + 1, 1);
        std::vector<long long> base;
        for (long long p = 3; p <= root; p += 2) {
            if (!small[p]) continue;
            base.push_back(p);
            for (long long q = p * p; q <= root; q += p) small[q] = 0;
        }
        const long long seg = 1LL << 18;
        for (long long lo = 3; lo <= limit_; lo += 2 * seg) {
            long long hi = std::min(limit_, lo + 2 * seg - 2);
            for (long long p : base) {
                if (p * p > hi) break;
                long long start = std::max(p * p, ((lo + p - 1) / p) * p);
                if (start % 2 == 0) start += p;
                for (long long q = start; q <= hi; q += 2 * p) {
                    long long i = (q - 3) / 2;
                    odd_[i >> 6] &= ~(1ULL << (i & 63));
                }
            }
        }
        if (with_spf) {
            if (limit_ > (1LL << 31))
                throw std::invalid_argument("PrimeTable: spf table limited to 2^31");
            spf_.assign(std::size_t(limit_) + 1, 0);
            for (long long i = 2; i <= limit_; i++) {
                if (spf_[std::size_t(i)] == 0)
                    for (long long j = i; j <= limit_; j += i)
                        if (spf_[std::size_t(j)] == 0)
                            spf_[std::size_t(j)] = std::uint32_t(i);
            }
        }
    }
};

// spot-check oracle used by the tests
inline bool trial_division_is_prime(long long n)
{
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; d++)
        if (n % d == 0) return false;
    return true;
}

// --- multiplicative basics ------------------------------------------------------

inline std::vector<std::pair<long long, int>> factorize_ll(long long n)
{
    if (n < 0) n = -n;
    if (n == 0) throw std::invalid_argument("factorize_ll: zero");
    std::vector<std::pair<long long, int>> fs;
    for (long long p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; e++; }
        fs.push_back({p, e});
    }
    if (n > 1) fs.push_back({n, 1});
    return fs;
}

inline int mobius(long long n, const PrimeTable* table = nullptr)
{
    if (n < 1) throw std::invalid_argument("mobius: n < 1");
    if (n == 1) return 1;
    auto fs = table ? table->factorize(n) : factorize_ll(n);
    int m = 1;
    for (auto& [p, e] : fs) {
        (void)p;
        if (e > 1) return 0;
        m = -m;
    }
    return m;
}

inline long long euler_phi(long long n, const PrimeTable* table = nullptr)
{
    if (n < 1) throw std::invalid_argument("euler_phi: n < 1");
    long long phi = n;
    auto fs = table ? table->factorize(n) : factorize_ll(n);
    for (auto& [p, e] : fs) {
        (void)e;
        phi -= phi / p;
    }
    return phi;
}

// --- local von Mangoldt model -----------------------------------------------------

// Lambda_{Z/qZ}(n) = q/phi(q) on (n,q)=1, else 0; q-periodic.  q = 1 gives 1.
inline double local_von_mangoldt(long long q, long long n)
{
    if (q < 1) throw std::invalid_argument("local_von_mangoldt: q < 1");
    if (q == 1) return 1.0;
    long long r = n % q;
    if (r < 0) r += q;
    long long g = std::gcd(r, q);
    if (g != 1) return 0.0;
    return double(q) / double(euler_phi(q));
}

// restriction to the non-negative reals
inline double local_von_mangoldt_plus(long long q, long long n)
{
    return n >= 0 ? local_von_mangoldt(q, n) : 0.0;
}

// precomputed one-period table, for hot loops
inline std::vector<double> local_von_mangoldt_period(long long q)
{
    std::vector<double> tab(q);
    for (long long r = 0; r < q; r++) tab[r] = local_von_mangoldt(q, r);
    return tab;
}

// --- W-trick -------------------------------------------------------------------

inline double w_of(long long N)
{
    if (N < 16) return 1.0;
    double lll = std::log(std::log(std::log(double(N))));
    return std::max(1.0, lll);
}

// W = prod_{p <= w(N)} p, or the explicit override when given (> 0).
inline long long W_of(long long N, long long override_W = 0)
{
    if (override_W > 0) return override_W;
    double w = w_of(N);
    long long W = 1;
    for (long long p = 2; p <= (long long)w; p++) {
        if (!trial_division_is_prime(p)) continue;
        W *= p;
    }
    return W;
}

// Lambda'_{b,W}(n) = phi(W)/W * Lambda'(Wn + b) for n >= 1
inline double w_tricked_lambda(const PrimeTable& table, long long b, long long W,
                               long long n)
{
    if (W < 1 || b < 1 || std::gcd(b, W) != 1)
        throw std::invalid_argument("w_tricked_lambda: requires (b,W) = 1");
    if (n < 1) return 0.0;
    return double(euler_phi(W)) / double(W) * table.lambda_prime(W * n + b);
}

// --- smoothed sieve weight --------------------------------------------------------

struct SieveParams {
    double gamma = 0.1;
    long long N = 0;
    double R = 0;       // N^gamma
    long long W = 30;
    double c_rho_2 = 0; // int_0^inf |rho'|^2

    SieveParams(double gamma_, long long N_, long long W_)
        : gamma(gamma_), N(N_), W(W_)
    {
        if (!(gamma > 0) || !(gamma < 1))
            throw std::invalid_argument("SieveParams: gamma out of (0,1)");
        R = std::pow(double(N), gamma);
        if (R < 2)
            throw std::invalid_argument("SieveParams: R = N^gamma < 2");
        c_rho_2 = c_rho2();
    }

    static double c_rho2()
    {
        static double c = [] {
            const auto& t = detail::mollifier_tables();
            // rho'(x) = -(4/C) g(4(x - 3/4)) for x > 0
            double I = integrate([&](double x) {
                double v = detail::mollifier_g(4.0 * (x - 0.75));
                return v * v;
            }, 0.5, 1.0, 1e-12);
            return 16.0 / (t.C * t.C) * I;
        }();
        return c;
    }
};

// Lambda_{rho,R,2}(n) = (log R) (sum_{d|n} mu(d) rho(log d / log R))^2
inline double sieve_weight_lambda_rho(const PrimeTable& table, long long n,
                                      const SieveParams& params)
{
    if (n == 0) throw std::invalid_argument("sieve_weight_lambda_rho: n = 0");
    long long a = std::llabs(n);
    double logR = std::log(params.R);
    const auto& rho = rho_bump();
    auto fs = table.factorize(a);
    // squarefree divisors below R (rho kills log d / log R >= 1)
    std::vector<long long> ps;
    for (auto& [p, e] : fs) {
        (void)e;
        if (double(p) < params.R) ps.push_back(p);
    }
    double S = 0;
    std::size_t k = ps.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << k); mask++) {
        long long d = 1;
        int mu = 1;
        bool over = false;
        for (std::size_t i = 0; i < k; i++)
            if (mask & (std::size_t(1) << i)) {
                d *= ps[i];
                mu = -mu;
                if (double(d) >= params.R) { over = true; break; }
            }
        if (over) continue;
        S += mu * rho(std::log(double(d)) / logR);
    }
    return logR * S * S;
}

// nu = (1/2c_{rho,2}) Lambda_{rho,R,2} + (1/2) Lambda_{Z/WZ}
inline double nu_weight(const PrimeTable& table, long long n, const SieveParams& params)
{
    return sieve_weight_lambda_rho(table, n, params) / (2.0 * params.c_rho_2) +
           0.5 * local_von_mangoldt(params.W, n);
}

// --- convolution f * chi ------------------------------------------------------------

// f given as values on [offset, offset + f.size()), zero elsewhere
inline double convolve_chi(const std::vector<double>& f, long long offset,
                           const SmoothBump& chi, double x)
{
    double eta = chi.support_radius();
    long long lo = (long long)std::ceil(x - eta);
    long long hi = (long long)std::floor(x + eta);
    double s = 0;
    for (long long n = lo; n <= hi; n++) {
        if (n < offset || n >= offset + (long long)f.size()) continue;
        double fn = f[std::size_t(n - offset)];
        if (fn != 0.0) s += fn * chi(x - double(n));
    }
    return s;
}

// --- Lipschitz-to-smooth-box approximation ------------------------------------------

struct BoxApproxPiece {
    double coefficient;              // F(x^(S))
    std::vector<std::size_t> select; // partition index per coordinate
};

struct BoxApprox {
    std::vector<MollifiedStep> parts; // shared 1-d partition
    std::vector<BoxApproxPiece> pieces;
    double N = 1;
    double measured_sup_error = 0;

    double operator()(const std::vector<double>& x) const
    {
        double total = 0;
        for (const auto& pc : pieces) {
            double prod = pc.coefficient;
            for (std::size_t j = 0; j < x.size() && prod != 0; j++)
                prod *= parts[pc.select[j]](x[j] / (2.0 * N));
            total += prod;
        }
        return total;
    }
};

// F Lipschitz on [-N,N]^dim: decompose into O(delta^-dim) smooth product
// boxes; the sup error O(delta/sigma) is measured on a grid and reported.
inline BoxApprox lipschitz_box_approx(
    const std::function<double(const std::vector<double>&)>& F, std::size_t dim,
    double delta, double sigma, double N, std::size_t error_grid = 9)
{
    if (!(delta > 0) || !(delta < 0.5))
        throw std::invalid_argument("lipschitz_box_approx: delta out of (0,1/2)");
    if (dim > 3)
        throw std::invalid_argument("lipschitz_box_approx: dim > 3 not supported");
    (void)sigma;
    BoxApprox out;
    out.N = N;
    out.parts = partition_of_unity(delta);
    std::size_t t = out.parts.size();

    std::vector<std::size_t> sel(dim, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t pos) {
        if (pos == dim) {
            // sample point: centre of the product support, scaled back by 2N
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; j++) {
                const auto& p = out.parts[sel[j]];
                x[j] = 0.5 * (p.support_lo() + p.support_hi()) * 2.0 * N;
            }
            double c = F(x);
            if (c != 0.0) out.pieces.push_back({c, sel});
            return;
        }
        for (std::size_t i = 0; i < t; i++) {
            sel[pos] = i;
            rec(pos + 1);
        }
    };
    rec(0);

    // measured sup error on a uniform grid
    std::vector<double> x(dim);
    std::function<void(std::size_t)> scan = [&](std::size_t pos) {
        if (pos == dim) {
            double err = std::abs(F(x) - out(x));
            if (err > out.measured_sup_error) out.measured_sup_error = err;
            return;
        }
        for (std::size_t i = 0; i < error_grid; i++) {
            x[pos] = (-1.0 + 2.0 * double(i) / double(error_grid - 1)) * N;
            scan(pos + 1);
        }
    };
    scan(0);
    return out;
}

} // namespace primeineq

#endif
