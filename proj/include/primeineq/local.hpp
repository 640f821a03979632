#ifndef PRIMEINEQ_LOCAL_HPP
#define PRIMEINEQ_LOCAL_HPP

// Local densities alpha_{e,r}, the singular series with a certified-style
// truncation tail, the local von Mangoldt main term, and the assembled
// prediction sum_r S_r J_r.

#include "counter.hpp"
#include "quad.hpp"

namespace primeineq {

namespace detail {

// rank and consistency of { xi_j(n) = t_j mod p : j in rows } over F_p;
// returns (rank, consistent)
inline std::pair<std::size_t, bool> modp_system_rank(
    const IntMatrix& Xi, const std::vector<Int>& t,
    const std::vector<std::size_t>& rows, long long p)
{
    std::size_t h = Xi.cols, k = rows.size();
    std::vector<std::vector<long long>> A(k, std::vector<long long>(h + 1));
    for (std::size_t i = 0; i < k; i++) {
        for (std::size_t j = 0; j < h; j++) {
            Int m = Xi(rows[i], j) % int_of(p);
            long long v = m.get_si();
            A[i][j] = v < 0 ? v + p : v;
        }
        Int m = t[rows[i]] % int_of(p);
        long long v = m.get_si();
        A[i][h] = v < 0 ? v + p : v;
    }
    auto inv_mod = [&](long long a) {
        long long r0 = p, r1 = a % p, s0 = 0, s1 = 1;
        while (r1) {
            long long q = r0 / r1;
            std::swap(r0 -= q * r1, r1);
            std::swap(s0 -= q * s1, s1);
        }
        return ((s0 % p) + p) % p;
    };
    std::size_t rank = 0;
    for (std::size_t col = 0; col < h && rank < k; col++) {
        std::size_t piv = k;
        for (std::size_t i = rank; i < k; i++)
            if (A[i][col] % p != 0) { piv = i; break; }
        if (piv == k) continue;
        std::swap(A[rank], A[piv]);
        long long inv = inv_mod(A[rank][col]);
        for (std::size_t j = col; j <= h; j++)
            A[rank][j] = (A[rank][j] * inv) % p;
        for (std::size_t i = 0; i < k; i++) {
            if (i == rank || A[i][col] == 0) continue;
            long long f = A[i][col];
            for (std::size_t j = col; j <= h; j++)
                A[i][j] = ((A[i][j] - f * A[rank][j]) % p + p) % p;
        }
        rank++;
    }
    for (std::size_t i = rank; i < k; i++)
        if (A[i][h] % p != 0) return {rank, false};
    // also rows within the eliminated part must not read 0 = nonzero
    for (std::size_t i = 0; i < k; i++) {
        bool allz = true;
        for (std::size_t j = 0; j < h; j++)
            if (A[i][j] % p != 0) { allz = false; break; }
        if (allz && A[i][h] % p != 0) return {rank, false};
    }
    return {rank, true};
}

// #{ n in [p]^h : xi_j(n) + r_j != 0 mod p for all j } via inclusion-exclusion
// over subsets of enforced vanishing, each a rank count
inline Rat nonvanishing_density_mod_p(const IntMatrix& Xi, const std::vector<Int>& r,
                                      long long p,
                                      const std::vector<std::size_t>& active)
{
    std::vector<Int> negr(r.size());
    for (std::size_t j = 0; j < r.size(); j++) negr[j] = -r[j];
    std::size_t dd = active.size();
    Rat density(0);
    for (std::size_t mask = 0; mask < (std::size_t(1) << dd); mask++) {
        std::vector<std::size_t> rows;
        for (std::size_t b = 0; b < dd; b++)
            if (mask & (std::size_t(1) << b)) rows.push_back(active[b]);
        auto [rank, ok] = modp_system_rank(Xi, negr, rows, p);
        if (!ok) continue;
        Rat term(1);
        for (std::size_t i = 0; i < rank; i++) term /= int_of(p);
        density += (__builtin_popcountll(mask) % 2 == 0) ? term : -term;
    }
    return density; // |solutions| / p^h
}

// brute-force oracle used for small p
inline Rat nonvanishing_density_enum(const IntMatrix& Xi, const std::vector<Int>& r,
                                     long long p,
                                     const std::vector<std::size_t>& active)
{
    std::size_t h = Xi.cols;
    std::vector<long long> n(h, 0);
    long long count = 0, total = 1;
    for (std::size_t i = 0; i < h; i++) total *= p;
    std::vector<std::vector<long long>> Xm(Xi.rows, std::vector<long long>(h));
    std::vector<long long> rm(Xi.rows);
    for (std::size_t j = 0; j < Xi.rows; j++) {
        for (std::size_t k = 0; k < h; k++) {
            Int m = Xi(j, k) % int_of(p);
            long long v = m.get_si();
            Xm[j][k] = v < 0 ? v + p : v;
        }
        Int m = r[j] % int_of(p);
        long long v = m.get_si();
        rm[j] = v < 0 ? v + p : v;
    }
    for (long long it = 0; it < total; it++) {
        long long rem = it;
        for (std::size_t i = 0; i < h; i++) { n[i] = rem % p; rem /= p; }
        bool ok = true;
        for (auto j : active) {
            long long val = rm[j];
            for (std::size_t k = 0; k < h; k++) val += Xm[j][k] * n[k];
            if (val % p == 0) { ok = false; break; }
        }
        if (ok) count++;
    }
    Rat q(int_of(count), int_of(total));
    q.canonicalize();
    return q;
}

} // namespace detail

// --- alpha_{e, r}: exact divisibility density -------------------------------------

// density of { n in Z^h : e_j | xi_j(n) + r_j for all j }, squarefree e_j,
// computed prime-by-prime and multiplied (CRT)
inline Rat local_factor_alpha(const IntMatrix& Xi, const std::vector<long long>& e,
                              const std::vector<Int>& r)
{
    std::size_t d = Xi.rows;
    if (e.size() != d || r.size() != d)
        throw std::invalid_argument("local_factor_alpha: dimension mismatch");
    std::set<long long> primes;
    for (auto ej : e) {
        if (ej < 1) throw std::invalid_argument("local_factor_alpha: e_j < 1");
        long long n = ej;
        for (long long p = 2; p * p <= n; p++)
            if (n % p == 0) {
                if ((n / p) % p == 0)
                    throw std::invalid_argument("local_factor_alpha: e_j not squarefree");
                primes.insert(p);
                n /= p;
            }
        if (n > 1) primes.insert(n);
    }
    std::vector<Int> negr(d);
    for (std::size_t j = 0; j < d; j++) negr[j] = -r[j];
    Rat alpha(1);
    for (long long p : primes) {
        std::vector<std::size_t> rows;
        for (std::size_t j = 0; j < d; j++)
            if (e[j] % p == 0) rows.push_back(j);
        auto [rank, ok] = detail::modp_system_rank(Xi, negr, rows, p);
        if (!ok) return Rat(0);
        Rat term(1);
        for (std::size_t i = 0; i < rank; i++) term /= int_of(p);
        alpha *= term;
    }
    return alpha;
}

// --- the singular series ----------------------------------------------------------

struct LocalSeries {
    std::vector<std::pair<long long, Rat>> factors; // (p, beta_p), ascending
    double truncated_product = 1.0;
    double tail_lo = 1.0, tail_hi = 1.0; // multiplicative tail bounds
    double K_estimate = 0;               // the inflated |beta_p - 1| p^2 constant
    bool exactly_zero = false;
    long long zero_at_prime = 0;
    long long P_cut = 0;

    double lo() const { return exactly_zero ? 0.0 : truncated_product * tail_lo; }
    double hi() const { return exactly_zero ? 0.0 : truncated_product * tail_hi; }
};

// no two integer forms parallel over Q (rows of Xi)
inline bool finite_cs_complexity_int(const IntMatrix& Xi)
{
    std::size_t d = Xi.rows, h = Xi.cols;
    for (std::size_t i = 0; i < d; i++) {
        bool zero = true;
        for (std::size_t k = 0; k < h; k++)
            if (sgn(Xi(i, k)) != 0) zero = false;
        if (zero && d >= 2) return false;
    }
    for (std::size_t i = 0; i < d; i++)
        for (std::size_t j = i + 1; j < d; j++) {
            bool parallel = true;
            for (std::size_t a = 0; a < h && parallel; a++)
                for (std::size_t b = a + 1; b < h && parallel; b++)
                    if (sgn(Xi(i, a) * Xi(j, b) - Xi(i, b) * Xi(j, a)) != 0)
                        parallel = false;
            if (parallel) return false;
        }
    return true;
}

// primes at which some pair of forms degenerates mod p (gcd of the 2x2
// minors of a pair, or of a whole row); the p^-2 tail model is sound only
// beyond these
inline std::vector<long long> interference_primes(const IntMatrix& Xi)
{
    std::size_t d = Xi.rows, h = Xi.cols;
    std::set<long long> bad;
    auto add_divisors = [&](Int g) {
        g = abs(g);
        if (cmp(g, 1) <= 0) return;
        long long n = g.get_si(); // coefficients are small in every use
        for (long long p = 2; p * p <= n; p++)
            while (n % p == 0) { bad.insert(p); n /= p; }
        if (n > 1) bad.insert(n);
    };
    for (std::size_t i = 0; i < d; i++) {
        Int g(0);
        for (std::size_t k = 0; k < h; k++)
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), Xi(i, k).get_mpz_t());
        add_divisors(g);
    }
    for (std::size_t i = 0; i < d; i++)
        for (std::size_t j = i + 1; j < d; j++) {
            Int g(0);
            for (std::size_t a = 0; a < h; a++)
                for (std::size_t b = a + 1; b < h; b++) {
                    Int minor = Xi(i, a) * Xi(j, b) - Xi(i, b) * Xi(j, a);
                    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), minor.get_mpz_t());
                }
            add_divisors(g);
        }
    return {bad.begin(), bad.end()};
}

// S_r = prod_p beta_p, beta_p = p^{-h} sum_{m in [p]^h} prod_j Lam_{Z/pZ}(xi_j(m)+r_j)
inline LocalSeries singular_series(const IntMatrix& Xi, const std::vector<Int>& r,
                                   long long P_cut, long long enum_threshold = 200000)
{
    std::size_t d = Xi.rows;
    if (!finite_cs_complexity_int(Xi))
        throw std::invalid_argument("singular_series: forms have infinite "
                                    "Cauchy-Schwarz complexity (divergent)");
    auto bad = interference_primes(Xi);
    if (!bad.empty() && P_cut < bad.back())
        throw std::invalid_argument(
            "singular_series: P_cut below the largest interference prime " +
            std::to_string(bad.back()) + "; the p^-2 tail model would be unsound");

    LocalSeries out;
    out.P_cut = P_cut;
    std::vector<std::size_t> active(d);
    for (std::size_t j = 0; j < d; j++) active[j] = j;

    PrimeTable pt(std::max<long long>(P_cut, 2));
    long double logprod = 0;
    std::vector<std::pair<long long, double>> decade; // (p, |beta-1| p^2)
    for (long long p : pt.primes()) {
        if (p > P_cut) break;
        double ph = std::pow(double(p), double(Xi.cols));
        Rat density = ph <= double(enum_threshold)
                          ? detail::nonvanishing_density_enum(Xi, r, p, active)
                          : detail::nonvanishing_density_mod_p(Xi, r, p, active);
        Rat beta = density;
        for (std::size_t j = 0; j < d; j++) beta *= Rat(int_of(p)) / Rat(int_of(p - 1));
        out.factors.push_back({p, beta});
        if (sgn(beta) == 0) {
            out.exactly_zero = true;
            out.zero_at_prime = p;
            out.truncated_product = 0;
            out.tail_lo = out.tail_hi = 0;
            return out;
        }
        logprod += std::log((long double)to_double(beta));
        if (10 * p > P_cut)
            decade.push_back({p, std::abs(to_double(beta) - 1.0) * double(p) * double(p)});
    }
    out.truncated_product = double(std::exp(logprod));

    double K = 0;
    for (auto& [p, v] : decade) K = std::max(K, v);
    K *= 4; // declared inflation policy; reported, never silently trusted
    out.K_estimate = K;
    // sum_{p > P} 2K/p^2 <= 2K/P
    double tail = 2.0 * K / double(P_cut);
    out.tail_lo = std::exp(-tail);
    out.tail_hi = std::exp(tail);
    return out;
}

// --- local model main term -----------------------------------------------------------

// (max W_j)^{-h} sum_{m in [max W]^h} prod_j Lam_{Z/W_jZ}(xi_j(m)+r_j), times J.
// Evaluated per prime by CRT; W_j squarefree.
inline double local_model_main_term(const IntMatrix& Xi, const std::vector<Int>& r,
                                    const std::vector<long long>& W, double J)
{
    std::size_t d = Xi.rows;
    if (W.size() != d)
        throw std::invalid_argument("local_model_main_term: need one W per form");
    std::set<long long> primes;
    for (auto Wj : W) {
        if (Wj < 1)
            throw std::invalid_argument("local_model_main_term: W_j < 1");
        long long n = Wj;
        for (long long p = 2; p * p <= n; p++)
            if (n % p == 0) {
                if ((n / p) % p == 0)
                    throw std::invalid_argument("local_model_main_term: W_j not squarefree");
                primes.insert(p);
                n /= p;
            }
        if (n > 1) primes.insert(n);
    }
    double factor = 1.0;
    for (long long p : primes) {
        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < d; j++)
            if (W[j] % p == 0) active.push_back(j);
        double ph = std::pow(double(p), double(Xi.cols));
        Rat density = ph <= 2e5 ? detail::nonvanishing_density_enum(Xi, r, p, active)
                                : detail::nonvanishing_density_mod_p(Xi, r, p, active);
        Rat beta = density;
        for (std::size_t j = 0; j < active.size(); j++) beta *= Rat(int_of(p)) / Rat(int_of(p - 1));
        factor *= to_double(beta);
    }
    return factor * J;
}

// --- the full prediction --------------------------------------------------------------

struct ShiftTerm {
    std::vector<long long> r;
    double S_value = 1.0;      // singular series (1 exactly when u = 0)
    double S_lo = 1.0, S_hi = 1.0;
    bool S_exact = false;
    QuadResult J;
};

struct Prediction {
    double value = 0;      // sum_r S_r J_r, the T-normalised main term
    double err_lo = 0, err_hi = 0;
    std::vector<ShiftTerm> terms;
    double predicted_weighted_count = 0;  // value * N^{d-m}
    double predicted_count = 0;           // divided by log^d N
    long long P_cut = 0;
};

// Prediction for the indicator system: F = 1_{[0,1]^d}, G = 1_{[-eps,eps]^m}.
inline Prediction predicted_main_term(const LinearSystem& ls,
                                      const RationalReduction& red, long long P_cut,
                                      long long quad_budget, std::uint64_t seed)
{
    Prediction out;
    out.P_cut = P_cut;
    std::size_t d = ls.d;

    auto F = [d](const std::vector<double>& x) {
        for (std::size_t j = 0; j < d; j++)
            if (x[j] < 0.0 || x[j] > 1.0) return 0.0;
        return 1.0;
    };
    auto G = [&](const std::vector<double>& z) {
        for (double zi : z)
            if (std::abs(zi) > ls.epsilon) return 0.0;
        return 1.0;
    };

    double lo_sum = 0, hi_sum = 0;
    for (std::size_t si = 0; si < red.shifts.size(); si++) {
        const auto& sh = red.shifts[si];
        ShiftTerm term;
        for (const auto& c : sh.r) term.r.push_back(c.get_si());

        if (red.u == 0) {
            term.S_value = 1.0;
            term.S_lo = term.S_hi = 1.0;
            term.S_exact = true;
        } else {
            LocalSeries S = singular_series(red.Xi, sh.r, P_cut);
            term.S_value = S.truncated_product;
            term.S_lo = S.lo();
            term.S_hi = S.hi();
            term.S_exact = S.exactly_zero;
        }

        std::size_t h = ls.d - red.u, mp = ls.m - red.u;
        if (mp == 0) {
            // the inequality degenerates to the feasibility of the shift:
            // J = G(L r + v) * N^{-h} vol{ x : (Xi x + r)/N in supp F }
            SingularIntegrand in;
            in.F = F;
            in.F_radius = 1.0;
            double gval = G(sh.Lr_plus_v);
            in.G = [gval](const std::vector<double>&) { return gval; };
            in.Xi = red.Xi;
            in.r = sh.r;
            in.Lp = red.Lp_num;
            in.vp = red.v_prime;
            in.N = ls.N;
            term.J = singular_integral_J(in, quad_budget, seed + si);
        } else {
            // J_r = N^{-(h-m')} int F((Xi x + r)/N) G_r(L'x + v') dx, evaluated
            // as a continuous T-form on the reduced system so the thin G
            // section is sliced instead of sampled
            Matrix<double> Xin(ls.d, h);
            for (std::size_t i = 0; i < ls.d; i++)
                for (std::size_t j = 0; j < h; j++) Xin(i, j) = red.Xi(i, j).get_d();
            std::vector<double> rn;
            for (const auto& c : sh.r) rn.push_back(c.get_d());
            long long N = ls.N;
            std::size_t dd = ls.d;
            auto Fp = [&F, Xin, rn, N, dd, h](const std::vector<double>& w) {
                std::vector<double> arg(dd);
                for (std::size_t i = 0; i < dd; i++) {
                    double acc = rn[i];
                    for (std::size_t j = 0; j < h; j++)
                        acc += Xin(i, j) * (w[j] * double(N));
                    arg[i] = acc / double(N);
                }
                return F(arg);
            };
            // x-box radius from the Xi preimage of the F support
            double Rx = 0;
            {
                RatMatrix XiQ = to_rat(red.Xi);
                std::vector<std::size_t> rows;
                for (std::size_t i = 0; i < dd && rows.size() < h; i++) {
                    RatMatrix test(rows.size() + 1, h);
                    for (std::size_t k = 0; k < rows.size(); k++)
                        for (std::size_t j = 0; j < h; j++)
                            test(k, j) = XiQ(rows[k], j);
                    for (std::size_t j = 0; j < h; j++) test(rows.size(), j) = XiQ(i, j);
                    if (rat_rank(test) == rows.size() + 1) rows.push_back(i);
                }
                RatMatrix Msub(h, h);
                for (std::size_t k = 0; k < h; k++)
                    for (std::size_t j = 0; j < h; j++) Msub(k, j) = XiQ(rows[k], j);
                auto Minv = rat_inverse(Msub);
                for (std::size_t k = 0; k < h; k++) {
                    double c = 0, wd = 0;
                    for (std::size_t j = 0; j < h; j++) {
                        double mij = to_double((*Minv)(k, j));
                        c += mij * (-rn[rows[j]]);
                        wd += std::abs(mij) * double(N);
                    }
                    Rx = std::max({Rx, std::abs(c - wd), std::abs(c + wd)});
                }
            }
            // support radius of G_r: rows u..m-1 of Q applied to the eps-box
            Matrix<double> Qn = fe_to_double(red.Q);
            double Grad = 0;
            for (std::size_t i = red.u; i < ls.m; i++) {
                double s = 0;
                for (std::size_t k = 0; k < ls.m; k++)
                    s += std::abs(Qn(i, k)) * ls.epsilon;
                Grad = std::max(Grad, s);
            }
            LinearSystem reduced(red.L_prime, red.v_prime,
                                 std::max(Grad, 1e-12), N, 1e18);
            std::vector<std::function<double(double)>> ones(
                h, [](double) { return 1.0; });
            term.J = continuous_T(ones, Fp, Rx / double(N) + 1e-9,
                                  red.shifted_G(G, si), Grad, reduced,
                                  quad_budget, seed + si);
        }

        out.value += term.S_value * term.J.value;
        double jlo = term.J.value - 3 * term.J.std_error;
        double jhi = term.J.value + 3 * term.J.std_error;
        lo_sum += term.S_lo * std::min(jlo, jhi);
        hi_sum += term.S_hi * std::max(jlo, jhi);
        out.terms.push_back(std::move(term));
    }
    out.err_lo = lo_sum;
    out.err_hi = hi_sum;
    double scale = std::pow(double(ls.N), double(ls.d) - double(ls.m));
    out.predicted_weighted_count = out.value * scale;
    out.predicted_count =
        out.predicted_weighted_count / std::pow(std::log(double(ls.N)), double(ls.d));
    return out;
}

} // namespace primeineq

#endif
