#ifndef PRIMEINEQ_COUNTER_HPP
#define PRIMEINEQ_COUNTER_HPP

// Ground truth: exact enumeration of prime solutions and direct evaluation
// of the discrete T-forms, including lattice-restricted sums.  Boundary
// cases of ||Lp + v||_inf <= eps are escalated from double precision to
// exact field signs, so no point is ever misclassified.

#include "forms.hpp"
#include "arith.hpp"

#include <chrono>
#include <future>
#include <mutex>
#include <thread>

namespace primeineq {

struct CountResult {
    double count = 0; // integer-valued when unweighted
    long long N = 0;
    double epsilon = 0;
    std::vector<double> v;
    std::string strategy;
    double wall_seconds = 0;
    long long outer_iterations = 0;
    long long boundary_escalations = 0;
    std::vector<std::vector<long long>> solutions; // first few, if requested
};

struct CounterOptions {
    double budget_cap = 1e10; // refuse if the op estimate exceeds this
    unsigned workers = 1;
    std::size_t collect_solutions = 0; // stream up to this many solutions out
};

namespace detail {

// candidate box for the pivot coordinates: integer points of
// M^{-1}([-eps,eps]^m - z), computed from the corner images
struct PivotSolver {
    std::size_t m;
    Matrix<double> Minv; // m x m
    double slack = 1e-7; // widen the integer bounding box by this much

    // writes the candidate integer bounding box; returns false if empty
    bool bounds(const std::vector<double>& z, double eps, long long N,
                long long* lo, long long* hi) const
    {
        for (std::size_t i = 0; i < m; i++) {
            double mn = 0, mx = 0;
            for (std::size_t k = 0; k < m; k++) {
                double a = Minv(i, k);
                // y_k ranges over [-eps - z_k, eps - z_k]
                double a1 = a * (-eps - z[k]), a2 = a * (eps - z[k]);
                mn += std::min(a1, a2);
                mx += std::max(a1, a2);
            }
            lo[i] = (long long)std::ceil(mn - slack);
            hi[i] = (long long)std::floor(mx + slack);
            lo[i] = std::max(lo[i], 1LL);
            hi[i] = std::min(hi[i], N);
            if (lo[i] > hi[i]) return false;
        }
        return true;
    }
};

// exact decision of ||L n + v||_inf <= eps for an integer point, via field
// arithmetic (used only when doubles cannot decide)
inline bool exact_in_box(const LinearSystem& ls, const std::vector<long long>& n)
{
    const FieldPtr f = ls.field();
    Rat eps = rat_from_double(ls.epsilon);
    for (std::size_t i = 0; i < ls.m; i++) {
        FieldElement acc = FieldElement::from_rat(f, ls.v_exact[i]);
        for (std::size_t j = 0; j < ls.d; j++)
            acc = acc + ls.L(i, j) * Rat((long)n[j]);
        if ((acc - FieldElement::from_rat(f, eps)).sign() > 0) return false;
        if ((acc + FieldElement::from_rat(f, eps)).sign() < 0) return false;
    }
    return true;
}

} // namespace detail

// Exact count of { p in ([N] primes)^d : ||L p + v||_inf <= eps }.
inline CountResult count_prime_solutions(const LinearSystem& ls, const PrimeTable& table,
                                         const CounterOptions& opts = {})
{
    auto t0 = std::chrono::steady_clock::now();
    if (table.limit() < ls.N)
        throw std::invalid_argument("count_prime_solutions: prime table too small");
    std::size_t m = ls.m, d = ls.d;

    auto piv = pivot_columns_max_det(ls.L);
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < d; c++)
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) free_cols.push_back(c);

    Matrix<double> Ln = ls.L_num();
    FieldMatrix M(m, m, FieldElement::zero(ls.field()));
    for (std::size_t r = 0; r < m; r++)
        for (std::size_t c = 0; c < m; c++) M(r, c) = ls.L(r, piv[c]);
    Matrix<double> Minv = fe_to_double(fe_inverse(M));
    double detM = std::abs(fe_det(M).to_double());

    const auto& primes = table.primes();
    std::size_t np = 0;
    while (np < primes.size() && primes[np] <= ls.N) np++;

    double est = std::pow(double(np), double(d - m)) *
                 std::max(1.0, std::pow(2 * ls.epsilon, double(m)) / detM + 2);
    if (est > opts.budget_cap)
        throw std::runtime_error("count_prime_solutions: estimated " +
                                 std::to_string(est) + " ops exceeds budget cap");

    detail::PivotSolver solver{m, Minv};
    // max double roundoff on a row value, for the escalation margin
    double row_scale = 0;
    for (std::size_t i = 0; i < m; i++) {
        double s = std::abs(ls.v[i]);
        for (std::size_t j = 0; j < d; j++) s += std::abs(Ln(i, j)) * double(ls.N);
        row_scale = std::max(row_scale, s);
    }
    const double margin = std::max(1e-9, row_scale * 1e-13);

    long long total = 0, outer = 0, escal = 0;

    // one worker chunk = a slice [b, e) of the outermost free coordinate's
    // prime range (the whole job when there are no free coordinates)
    std::vector<std::vector<long long>> collected;
    std::mutex collect_mu;
    auto run_chunk = [&](std::size_t b, std::size_t e) -> std::array<long long, 3> {
        long long cnt = 0, out = 0, esc = 0;
        std::vector<long long> pt(d);
        std::vector<double> z(m);
        std::vector<long long> cand(m, 0);
        long long lo_[8], hi_[8];
        std::function<void(std::size_t)> cwalk = [&](std::size_t ci) {
            if (ci == m) {
                for (std::size_t i = 0; i < m; i++)
                    if (!table.is_prime(cand[i])) return;
                for (std::size_t i = 0; i < m; i++) pt[piv[i]] = cand[i];
                bool maybe = true, sure = true;
                for (std::size_t i = 0; i < m && maybe; i++) {
                    double acc = z[i];
                    for (std::size_t k = 0; k < m; k++)
                        acc += Ln(i, piv[k]) * double(cand[k]);
                    double t = std::abs(acc) - ls.epsilon;
                    if (t > margin) maybe = false;
                    else if (t > -margin) sure = false;
                }
                if (!maybe) return;
                if (!sure) {
                    esc++;
                    if (!detail::exact_in_box(ls, pt)) return;
                }
                cnt++;
                if (opts.collect_solutions) {
                    std::lock_guard<std::mutex> lk(collect_mu);
                    if (collected.size() < opts.collect_solutions)
                        collected.push_back(pt);
                }
                return;
            }
            for (long long x = lo_[ci]; x <= hi_[ci]; x++) {
                cand[ci] = x;
                cwalk(ci + 1);
            }
        };
        std::function<void(std::size_t)> walk = [&](std::size_t level) {
            if (level == free_cols.size()) {
                out++;
                for (std::size_t i = 0; i < m; i++) {
                    double acc = ls.v[i];
                    for (std::size_t j = 0; j < free_cols.size(); j++)
                        acc += Ln(i, free_cols[j]) * double(pt[free_cols[j]]);
                    z[i] = acc;
                }
                if (!solver.bounds(z, ls.epsilon, ls.N, lo_, hi_)) return;
                cwalk(0);
                return;
            }
            std::size_t bb = level == 0 ? b : 0;
            std::size_t ee = level == 0 ? e : np;
            for (std::size_t pi = bb; pi < ee; pi++) {
                pt[free_cols[level]] = primes[pi];
                walk(level + 1);
            }
        };
        walk(0);
        return {cnt, out, esc};
    };

    if (free_cols.empty()) {
        auto r = run_chunk(0, 0);
        total = r[0]; outer = r[1]; escal = r[2];
    } else {
        unsigned workers = std::max(1u, opts.workers);
        std::size_t chunks = std::max<std::size_t>(
            1, std::min<std::size_t>(np, workers * 4));
        std::vector<std::future<std::array<long long, 3>>> futs;
        for (std::size_t c = 0; c < chunks; c++) {
            std::size_t b = np * c / chunks, e = np * (c + 1) / chunks;
            futs.push_back(std::async(workers > 1 ? std::launch::async
                                                  : std::launch::deferred,
                                      run_chunk, b, e));
        }
        for (auto& fu : futs) {
            auto r = fu.get();
            total += r[0];
            outer += r[1];
            escal += r[2];
        }
    }

    CountResult res;
    res.count = double(total);
    res.N = ls.N;
    res.epsilon = ls.epsilon;
    res.v = ls.v;
    res.strategy = "pivot-enumeration over " + std::to_string(free_cols.size()) +
                   " free prime coordinates";
    res.outer_iterations = outer;
    res.boundary_escalations = escal;
    if (opts.collect_solutions) {
        std::sort(collected.begin(), collected.end());
        res.solutions = std::move(collected);
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// --- discrete T-forms -----------------------------------------------------------

// Weight function on an integer interval [lo, lo + vals.size()).
struct WeightArray {
    long long lo = 1;
    std::vector<double> vals;

    double operator()(long long n) const
    {
        long long i = n - lo;
        if (i < 0 || i >= (long long)vals.size()) return 0.0;
        return vals[std::size_t(i)];
    }
    static WeightArray ones(long long lo, long long hi)
    {
        WeightArray w;
        w.lo = lo;
        w.vals.assign(std::size_t(hi - lo + 1), 1.0);
        return w;
    }
};

// T = N^{m-d} sum_n prod f_j(n_j) F(n/N) G(Ln+v), enumerated over the free
// coordinates with pivot sections solved from the support of G.  F must be
// given in product form (one factor per coordinate) for this path.
inline double T_discrete(const std::vector<WeightArray>& f,
                         const std::vector<std::function<double(double)>>& F_factors,
                         double F_radius,
                         const std::function<double(const std::vector<double>&)>& G,
                         double G_radius, const LinearSystem& ls,
                         const CounterOptions& opts = {})
{
    std::size_t m = ls.m, d = ls.d;
    if (f.size() != d || F_factors.size() != d)
        throw std::invalid_argument("T_discrete: need d weights and d F factors");

    auto piv = pivot_columns_max_det(ls.L);
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < d; c++)
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) free_cols.push_back(c);

    Matrix<double> Ln = ls.L_num();
    FieldMatrix M(m, m, FieldElement::zero(ls.field()));
    for (std::size_t r = 0; r < m; r++)
        for (std::size_t c = 0; c < m; c++) M(r, c) = ls.L(r, piv[c]);
    Matrix<double> Minv = fe_to_double(fe_inverse(M));

    long long R = (long long)std::ceil(F_radius * double(ls.N));

    // effective integer range per coordinate: support of f_j meets [-R, R]
    std::vector<long long> clo(d), chi_(d);
    for (std::size_t j = 0; j < d; j++) {
        clo[j] = std::max(f[j].lo, -R);
        chi_[j] = std::min(f[j].lo + (long long)f[j].vals.size() - 1, R);
        if (clo[j] > chi_[j]) return 0.0;
    }

    double est = 1;
    for (auto j : free_cols) est *= double(chi_[j] - clo[j] + 1);
    if (est > opts.budget_cap)
        throw std::runtime_error("T_discrete: estimated " + std::to_string(est) +
                                 " ops exceeds budget cap");

    // per-coordinate combined tables f_j(n) * F_j(n/N)
    std::vector<std::vector<double>> w(d);
    for (std::size_t j = 0; j < d; j++) {
        w[j].resize(std::size_t(chi_[j] - clo[j] + 1));
        for (long long n = clo[j]; n <= chi_[j]; n++)
            w[j][std::size_t(n - clo[j])] =
                f[j](n) * F_factors[j](double(n) / double(ls.N));
    }

    detail::PivotSolver solver{m, Minv, 1e-7};

    unsigned workers = std::max(1u, opts.workers);
    std::size_t lead = free_cols.empty() ? 0 : free_cols[0];
    long long lead_lo = free_cols.empty() ? 0 : clo[lead];
    long long lead_hi = free_cols.empty() ? 0 : chi_[lead];
    std::size_t chunks =
        free_cols.empty() ? 1
                          : std::min<std::size_t>(std::size_t(lead_hi - lead_lo + 1),
                                                  workers * 4);

    auto run_chunk = [&](long long cb, long long ce) {
        std::vector<double> partial;
        std::vector<long long> point(d, 0);
        std::vector<double> z(m), Gx(m);
        std::vector<long long> cand(m);
        long long lo_[8], hi_[8];

        std::function<double(std::size_t)> csolve = [&](std::size_t ci) -> double {
            if (ci == m) {
                double wp = 1;
                for (std::size_t i = 0; i < m; i++) {
                    long long n = cand[i];
                    std::size_t jj = piv[i];
                    if (n < clo[jj] || n > chi_[jj]) return 0.0;
                    wp *= w[jj][std::size_t(n - clo[jj])];
                    if (wp == 0.0) return 0.0;
                }
                for (std::size_t i = 0; i < m; i++) {
                    double acc = z[i];
                    for (std::size_t k = 0; k < m; k++)
                        acc += Ln(i, piv[k]) * double(cand[k]);
                    Gx[i] = acc;
                }
                return wp * G(Gx);
            }
            double s = 0;
            for (long long x = lo_[ci]; x <= hi_[ci]; x++) {
                cand[ci] = x;
                s += csolve(ci + 1);
            }
            return s;
        };

        std::function<void(std::size_t, double)> wfree = [&](std::size_t level,
                                                             double weight) {
            if (level == free_cols.size()) {
                for (std::size_t i = 0; i < m; i++) {
                    double acc = ls.v[i];
                    for (std::size_t j = 0; j < free_cols.size(); j++)
                        acc += Ln(i, free_cols[j]) * double(point[free_cols[j]]);
                    z[i] = acc;
                }
                // pivot candidates restricted to the G support box
                for (std::size_t i = 0; i < m; i++) {
                    double mn = 0, mx = 0;
                    for (std::size_t k = 0; k < m; k++) {
                        double a = Minv(i, k);
                        double a1 = a * (-G_radius - z[k]), a2 = a * (G_radius - z[k]);
                        mn += std::min(a1, a2);
                        mx += std::max(a1, a2);
                    }
                    lo_[i] = (long long)std::ceil(mn - solver.slack);
                    hi_[i] = (long long)std::floor(mx + solver.slack);
                    lo_[i] = std::max(lo_[i], clo[piv[i]]);
                    hi_[i] = std::min(hi_[i], chi_[piv[i]]);
                    if (lo_[i] > hi_[i]) return;
                }
                double val = weight * csolve(0);
                if (val != 0.0) partial.push_back(val);
                if (partial.size() == (1 << 16)) {
                    double s = pairwise_sum(partial);
                    partial.clear();
                    partial.push_back(s);
                }
                return;
            }
            std::size_t j = free_cols[level];
            long long b = level == 0 ? cb : clo[j];
            long long e = level == 0 ? ce : chi_[j];
            for (long long n = b; n <= e; n++) {
                double wn = w[j][std::size_t(n - clo[j])];
                if (wn == 0.0) continue;
                point[j] = n;
                wfree(level + 1, weight * wn);
            }
        };
        wfree(0, 1.0);
        return pairwise_sum(partial);
    };

    double total = 0;
    if (free_cols.empty()) {
        total = run_chunk(0, 0);
    } else {
        std::vector<std::future<double>> futs;
        for (std::size_t c = 0; c < chunks; c++) {
            long long b = lead_lo + (lead_hi - lead_lo + 1) * (long long)c / (long long)chunks;
            long long e = lead_lo + (lead_hi - lead_lo + 1) * (long long)(c + 1) / (long long)chunks - 1;
            futs.push_back(std::async(workers > 1 ? std::launch::async
                                                  : std::launch::deferred,
                                      run_chunk, b, e));
        }
        for (auto& fu : futs) total += fu.get();
    }
    return total * std::pow(double(ls.N), -double(d) + double(m));
}

// Fully general (callable weights, joint F) variant for small problems and
// cross-checks: direct sum over the integer box [-R, R]^d.
inline double T_discrete_direct(
    const std::vector<std::function<double(long long)>>& f,
    const std::function<double(const std::vector<double>&)>& F, double F_radius,
    const std::function<double(const std::vector<double>&)>& G,
    const LinearSystem& ls, double ops_cap = 5e8,
    const std::vector<std::pair<long long, long long>>* support = nullptr)
{
    std::size_t d = ls.d, m = ls.m;
    long long R = (long long)std::ceil(F_radius * double(ls.N));
    std::vector<long long> blo(d, -R), bhi(d, R);
    if (support) {
        if (support->size() != d)
            throw std::invalid_argument("T_discrete_direct: support size mismatch");
        for (std::size_t j = 0; j < d; j++) {
            blo[j] = std::max(blo[j], (*support)[j].first);
            bhi[j] = std::min(bhi[j], (*support)[j].second);
            if (blo[j] > bhi[j]) return 0.0;
        }
    }
    double est = 1;
    for (std::size_t j = 0; j < d; j++) est *= double(bhi[j] - blo[j] + 1);
    if (est > ops_cap)
        throw std::runtime_error("T_discrete_direct: box too large");
    Matrix<double> Ln = ls.L_num();
    std::vector<long long> n(blo);
    std::vector<double> x(d), Gx(m);
    double total = 0;
    for (;;) {
        double wp = 1;
        for (std::size_t j = 0; j < d && wp != 0.0; j++) wp *= f[j](n[j]);
        if (wp != 0.0) {
            for (std::size_t j = 0; j < d; j++) x[j] = double(n[j]) / double(ls.N);
            double Fv = F(x);
            if (Fv != 0.0) {
                for (std::size_t i = 0; i < m; i++) {
                    double acc = ls.v[i];
                    for (std::size_t j = 0; j < d; j++)
                        acc += Ln(i, j) * double(n[j]);
                    Gx[i] = acc;
                }
                total += wp * Fv * G(Gx);
            }
        }
        std::size_t pos = 0;
        while (pos < d && n[pos] == bhi[pos]) { n[pos] = blo[pos]; pos++; }
        if (pos == d) break;
        n[pos]++;
    }
    return total * std::pow(double(ls.N), -double(d) + double(m));
}

// --- general T with a lattice parametrisation ---------------------------------------

// T^{L', v', Xi, r}_{F, G, N} = N^{m'-h} sum_{n in Z^h} prod_j f_j(xi_j(n)+r_j)
//                                F((Xi n + r)/N) G(L' n + v').
// Finite-support weights: solve n from h independent forms, so the cost is
// |supp|^h rather than a box scan.
inline double T_general_finite(
    const std::vector<std::map<long long, double>>& f,
    const std::function<double(const std::vector<double>&)>& F, double F_radius,
    const std::function<double(const std::vector<double>&)>& G,
    const IntMatrix& Xi, const std::vector<Int>& r, const Matrix<double>& Lp,
    const std::vector<double>& vp, long long N)
{
    std::size_t d = Xi.rows, h = Xi.cols, mp = Lp.rows;
    if (f.size() != d)
        throw std::invalid_argument("T_general_finite: need d weight maps");
    (void)F_radius;

    // h rows of Xi forming an invertible square block
    RatMatrix XiQ = to_rat(Xi);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d && rows.size() < h; i++) {
        RatMatrix test(rows.size() + 1, h);
        for (std::size_t k = 0; k < rows.size(); k++)
            for (std::size_t j = 0; j < h; j++) test(k, j) = XiQ(rows[k], j);
        for (std::size_t j = 0; j < h; j++) test(rows.size(), j) = XiQ(i, j);
        if (rat_rank(test) == rows.size() + 1) rows.push_back(i);
    }
    if (rows.size() != h)
        throw std::invalid_argument("T_general_finite: Xi not injective");
    RatMatrix Msub(h, h);
    for (std::size_t k = 0; k < h; k++)
        for (std::size_t j = 0; j < h; j++) Msub(k, j) = XiQ(rows[k], j);
    bool block_is_identity = true;
    for (std::size_t k = 0; k < h && block_is_identity; k++)
        for (std::size_t j = 0; j < h; j++)
            if (Msub(k, j) != (k == j ? Rat(1) : Rat(0))) {
                block_is_identity = false;
                break;
            }
    RatMatrix Minv =
        block_is_identity ? Msub : *rat_inverse(Msub);

    std::vector<long long> vals(h);
    std::vector<double> Fx(d), Gx(mp);
    double total = 0;

    std::function<void(std::size_t)> rec = [&](std::size_t level) {
        if (level == h) {
            // n = Minv * (vals - r[rows]); identity block short-circuits
            std::vector<long long> n(h);
            if (block_is_identity) {
                for (std::size_t k = 0; k < h; k++) {
                    Int diff = int_of(vals[k]) - r[rows[k]];
                    if (!diff.fits_slong_p()) return;
                    n[k] = diff.get_si();
                }
            } else {
                std::vector<Rat> nr(h, Rat(0));
                for (std::size_t k = 0; k < h; k++)
                    for (std::size_t j = 0; j < h; j++)
                        nr[k] += Minv(k, j) * Rat(int_of(vals[j]) - r[rows[j]]);
                for (std::size_t k = 0; k < h; k++) {
                    if (sgn(Rat(nr[k].get_den()) - 1) != 0) return; // not integral
                    if (!nr[k].get_num().fits_slong_p()) return;
                    n[k] = nr[k].get_num().get_si();
                }
            }
            double wp = 1;
            std::vector<long long> xi_vals(d);
            for (std::size_t j = 0; j < d; j++) {
                long long acc = r[j].get_si();
                for (std::size_t k = 0; k < h; k++)
                    acc += Xi(j, k).get_si() * n[k];
                xi_vals[j] = acc;
                auto it = f[j].find(acc);
                if (it == f[j].end()) return;
                wp *= it->second;
                if (wp == 0.0) return;
            }
            for (std::size_t j = 0; j < d; j++)
                Fx[j] = double(xi_vals[j]) / double(N);
            double Fv = F(Fx);
            if (Fv == 0.0) return;
            for (std::size_t i = 0; i < mp; i++) {
                double acc = vp[i];
                for (std::size_t k = 0; k < h; k++) acc += Lp(i, k) * double(n[k]);
                Gx[i] = acc;
            }
            total += wp * Fv * G(Gx);
            return;
        }
        for (const auto& [val, fv] : f[rows[level]]) {
            if (fv == 0.0) continue;
            vals[level] = val;
            rec(level + 1);
        }
    };
    rec(0);
    return total * std::pow(double(N), -double(h) + double(mp));
}

// Dense-array variant of the general T-form, pivot-sliced over the G support.
inline double T_general(const std::vector<WeightArray>& f,
                        const std::vector<std::function<double(double)>>& F_factors,
                        double F_radius,
                        const std::function<double(const std::vector<double>&)>& G,
                        double G_radius, const IntMatrix& Xi,
                        const std::vector<Int>& r, const FieldMatrix& L_prime,
                        const std::vector<double>& vp, long long N,
                        const CounterOptions& opts = {})
{
    std::size_t d = Xi.rows, h = Xi.cols, mp = L_prime.rows;

    // substitute variables: walk n over a box derived from F's support
    RatMatrix XiQ = to_rat(Xi);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d && rows.size() < h; i++) {
        RatMatrix test(rows.size() + 1, h);
        for (std::size_t k = 0; k < rows.size(); k++)
            for (std::size_t j = 0; j < h; j++) test(k, j) = XiQ(rows[k], j);
        for (std::size_t j = 0; j < h; j++) test(rows.size(), j) = XiQ(i, j);
        if (rat_rank(test) == rows.size() + 1) rows.push_back(i);
    }
    RatMatrix Msub(h, h);
    for (std::size_t k = 0; k < h; k++)
        for (std::size_t j = 0; j < h; j++) Msub(k, j) = XiQ(rows[k], j);
    RatMatrix MinvQ = *rat_inverse(Msub);
    std::vector<long long> nlo(h), nhi(h);
    for (std::size_t k = 0; k < h; k++) {
        double c = 0, wd = 0;
        for (std::size_t j = 0; j < h; j++) {
            double mij = to_double(MinvQ(k, j));
            c += mij * (-r[rows[j]].get_d());
            wd += std::abs(mij) * F_radius * double(N);
        }
        nlo[k] = (long long)std::floor(c - wd) - 1;
        nhi[k] = (long long)std::ceil(c + wd) + 1;
    }

    double est = 1;
    for (std::size_t k = 0; k < h; k++) est *= double(nhi[k] - nlo[k] + 1);
    if (est > opts.budget_cap)
        throw std::runtime_error("T_general: estimated ops exceed budget cap");

    Matrix<double> Xin(d, h);
    for (std::size_t i = 0; i < d; i++)
        for (std::size_t j = 0; j < h; j++) Xin(i, j) = Xi(i, j).get_d();
    Matrix<double> Lpn = fe_to_double(L_prime);
    std::vector<double> rn(d);
    for (std::size_t i = 0; i < d; i++) rn[i] = r[i].get_d();

    (void)G_radius;
    std::vector<long long> n(h);
    std::vector<double> Fx(d), Gx(mp);
    std::vector<double> partial;
    std::function<void(std::size_t)> rec = [&](std::size_t level) {
        if (level == h) {
            double wp = 1;
            for (std::size_t j = 0; j < d && wp != 0.0; j++) {
                double acc = rn[j];
                for (std::size_t k = 0; k < h; k++) acc += Xin(j, k) * double(n[k]);
                long long xv = (long long)std::llround(acc);
                wp *= f[j](xv) * F_factors[j](acc / double(N));
                Fx[j] = acc / double(N);
            }
            if (wp == 0.0) return;
            for (std::size_t i = 0; i < mp; i++) {
                double acc = vp[i];
                for (std::size_t k = 0; k < h; k++) acc += Lpn(i, k) * double(n[k]);
                Gx[i] = acc;
            }
            double val = wp * G(Gx);
            if (val != 0.0) partial.push_back(val);
            return;
        }
        for (long long x = nlo[level]; x <= nhi[level]; x++) {
            n[level] = x;
            rec(level + 1);
        }
    };
    rec(0);
    return pairwise_sum(partial) * std::pow(double(N), -double(h) + double(mp));
}

// --- the reduction identity, both sides evaluated -----------------------------------

struct DecompositionCheck {
    double lhs = 0; // T^{L,v}(f_1..f_d)
    double rhs = 0; // sum over r in R_tilde of T^{L',v',Xi,r}(f_1..f_d)
    double diff = 0;
};

// Evaluates T^{L,v}_{F,G,N}(f) directly and through the rational reduction,
// for finitely supported weights.  The two must agree up to roundoff.
inline DecompositionCheck decomposition_check(
    const LinearSystem& ls, const RationalReduction& red,
    const std::vector<std::map<long long, double>>& f,
    const std::function<double(const std::vector<double>&)>& F, double F_radius,
    const std::function<double(const std::vector<double>&)>& G)
{
    if (f.size() != ls.d)
        throw std::invalid_argument("decomposition_check: need d weight maps");
    std::vector<std::function<double(long long)>> fg;
    std::vector<std::pair<long long, long long>> supp;
    for (std::size_t j = 0; j < ls.d; j++) {
        const auto& mp = f[j];
        if (mp.empty()) return {0, 0, 0};
        supp.push_back({mp.begin()->first, mp.rbegin()->first});
        fg.push_back([&mp](long long n) {
            auto it = mp.find(n);
            return it == mp.end() ? 0.0 : it->second;
        });
    }
    DecompositionCheck out;
    out.lhs = T_discrete_direct(fg, F, F_radius, G, ls, 5e8, &supp);
    for (std::size_t si = 0; si < red.shifts.size(); si++)
        out.rhs += T_general_finite(f, F, F_radius, red.shifted_G(G, si), red.Xi,
                                    red.shifts[si].r, red.Lp_num, red.v_prime, ls.N);
    out.diff = std::abs(out.lhs - out.rhs);
    return out;
}

// --- lattice-restricted sums -----------------------------------------------------

// sum over { n in Z^h : e_j | xi_j(n) + r_j for all j } of F(n/N) G(Ln+v),
// walked over the congruence lattice with the G support solved per point.
inline double lattice_restricted_sum(
    const std::vector<std::function<double(double)>>& F_factors, double F_radius,
    const std::function<double(const std::vector<double>&)>& G, double G_radius,
    const LinearSystem& ls, const std::vector<long long>& e, const IntMatrix& Xi,
    const std::vector<Int>& r, const CounterOptions& opts = {})
{
    std::size_t h = ls.d; // the ambient dimension of the sum
    std::size_t dXi = Xi.rows;
    if (Xi.cols != h || e.size() != dXi || r.size() != dXi)
        throw std::invalid_argument("lattice_restricted_sum: dimension mismatch");
    for (auto ej : e) {
        if (ej < 1) throw std::invalid_argument("lattice_restricted_sum: e_j < 1");
        for (long long p = 2; p * p <= ej; p++)
            if (ej % (p * p) == 0)
                throw std::invalid_argument("lattice_restricted_sum: e_j not squarefree");
    }

    // solve Xi n + r = D k: stack [Xi | -D]
    IntMatrix S(dXi, h + dXi, Int(0));
    for (std::size_t i = 0; i < dXi; i++) {
        for (std::size_t j = 0; j < h; j++) S(i, j) = Xi(i, j);
        S(i, h + i) = -int_of(e[i]);
    }
    std::vector<Int> rhs(dXi);
    for (std::size_t i = 0; i < dXi; i++) rhs[i] = -r[i];
    auto part = solve_integer(S, rhs);
    if (!part) return 0.0; // incompatible congruences
    std::vector<Int> n0(part->begin(), part->begin() + h);

    IntMatrix K = kernel_lattice(S);
    IntMatrix Kh(h, K.cols, Int(0));
    for (std::size_t i = 0; i < h; i++)
        for (std::size_t j = 0; j < K.cols; j++) Kh(i, j) = K(i, j);
    IntMatrix B = lattice_canonical(Kh); // h x h basis of the solution lattice
    if (B.cols != h)
        throw std::logic_error("lattice_restricted_sum: solution lattice rank != h");

    // pivot on t-space: L B is m x h
    Matrix<double> Ln = ls.L_num();
    Matrix<double> Bn(h, h), LB(ls.m, h, 0.0);
    for (std::size_t i = 0; i < h; i++)
        for (std::size_t j = 0; j < h; j++) Bn(i, j) = B(i, j).get_d();
    for (std::size_t i = 0; i < ls.m; i++)
        for (std::size_t j = 0; j < h; j++) {
            double acc = 0;
            for (std::size_t k = 0; k < h; k++) acc += Ln(i, k) * Bn(k, j);
            LB(i, j) = acc;
        }

    // choose m pivot t-columns by |det| over doubles (LB entries irrational)
    std::vector<std::size_t> piv, free_cols;
    {
        std::size_t m = ls.m;
        std::vector<std::size_t> idx(m), best;
        double best_det = -1;
        std::function<void(std::size_t, std::size_t)> rec2 = [&](std::size_t pos,
                                                                 std::size_t from) {
            if (pos == m) {
                Matrix<double> MM(m, m);
                for (std::size_t a = 0; a < m; a++)
                    for (std::size_t b = 0; b < m; b++) MM(a, b) = LB(a, idx[b]);
                double det;
                if (m == 1) det = MM(0, 0);
                else if (m == 2) det = MM(0, 0) * MM(1, 1) - MM(0, 1) * MM(1, 0);
                else {
                    RatMatrix RM(m, m);
                    for (std::size_t a = 0; a < m; a++)
                        for (std::size_t b = 0; b < m; b++)
                            RM(a, b) = rat_from_double(MM(a, b));
                    det = to_double(rat_det(RM));
                }
                if (std::abs(det) > best_det) {
                    best_det = std::abs(det);
                    best = idx;
                }
                return;
            }
            for (std::size_t c = from; c < h; c++) {
                idx[pos] = c;
                rec2(pos + 1, c + 1);
            }
        };
        rec2(0, 0);
        piv = best;
        for (std::size_t c = 0; c < h; c++)
            if (std::find(piv.begin(), piv.end(), c) == piv.end())
                free_cols.push_back(c);
    }
    std::size_t m = ls.m;
    Matrix<double> Mp(m, m);
    for (std::size_t a = 0; a < m; a++)
        for (std::size_t b = 0; b < m; b++) Mp(a, b) = LB(a, piv[b]);
    // invert Mp (m <= 2 in practice; general small inverse via rationals)
    Matrix<double> Mpi(m, m);
    {
        RatMatrix RM(m, m);
        for (std::size_t a = 0; a < m; a++)
            for (std::size_t b = 0; b < m; b++) RM(a, b) = rat_from_double(Mp(a, b));
        auto inv = rat_inverse(RM);
        if (!inv)
            throw std::logic_error("lattice_restricted_sum: singular pivot block");
        for (std::size_t a = 0; a < m; a++)
            for (std::size_t b = 0; b < m; b++) Mpi(a, b) = to_double((*inv)(a, b));
    }

    // t-box from the F support: t = B^{-1}(n - n0)
    RatMatrix BQ = to_rat(B);
    RatMatrix BinvQ = *rat_inverse(BQ);
    std::vector<long long> tlo(h), thi(h);
    for (std::size_t k = 0; k < h; k++) {
        double c = 0, wd = 0;
        for (std::size_t j = 0; j < h; j++) {
            double bij = to_double(BinvQ(k, j));
            c += bij * (-n0[j].get_d());
            wd += std::abs(bij) * F_radius * double(ls.N);
        }
        tlo[k] = (long long)std::floor(c - wd) - 1;
        thi[k] = (long long)std::ceil(c + wd) + 1;
    }

    double est = 1;
    for (auto k : free_cols) est *= double(thi[k] - tlo[k] + 1);
    est *= std::max(1.0, std::pow(2 * G_radius, double(m)));
    if (est > opts.budget_cap)
        throw std::runtime_error("lattice_restricted_sum: estimated ops exceed cap");

    std::vector<double> n0n(h);
    for (std::size_t i = 0; i < h; i++) n0n[i] = n0[i].get_d();

    std::vector<long long> t(h, 0);
    std::vector<double> Gx(m);
    std::vector<double> partial;
    std::vector<long long> cand(m);
    long long lo_[8], hi_[8];

    std::function<double(std::size_t, const std::vector<double>&)> csolve =
        [&](std::size_t ci, const std::vector<double>& z) -> double {
        if (ci == m) {
            for (std::size_t a = 0; a < m; a++) t[piv[a]] = cand[a];
            // n = n0 + B t; weight = prod F_j(n_j / N); G(L n + v)
            double wp = 1;
            std::vector<double> n(h);
            for (std::size_t i = 0; i < h && wp != 0.0; i++) {
                double acc = n0n[i];
                for (std::size_t k = 0; k < h; k++) acc += Bn(i, k) * double(t[k]);
                n[i] = acc;
                wp *= F_factors[i](acc / double(ls.N));
            }
            if (wp == 0.0) return 0.0;
            for (std::size_t i = 0; i < m; i++) {
                double acc = ls.v[i];
                for (std::size_t k = 0; k < h; k++) acc += Ln(i, k) * n[k];
                Gx[i] = acc;
            }
            return wp * G(Gx);
        }
        double s = 0;
        for (long long x = lo_[ci]; x <= hi_[ci]; x++) {
            cand[ci] = x;
            s += csolve(ci + 1, z);
        }
        return s;
    };

    std::function<void(std::size_t)> wfree = [&](std::size_t level) {
        if (level == free_cols.size()) {
            std::vector<double> z(m);
            for (std::size_t i = 0; i < m; i++) {
                double acc = ls.v[i];
                for (std::size_t k = 0; k < h; k++) acc += Ln(i, k) * n0n[k];
                for (std::size_t j = 0; j < free_cols.size(); j++)
                    acc += LB(i, free_cols[j]) * double(t[free_cols[j]]);
                z[i] = acc;
            }
            for (std::size_t i = 0; i < m; i++) {
                double mn = 0, mx = 0;
                for (std::size_t k = 0; k < m; k++) {
                    double a = Mpi(i, k);
                    double a1 = a * (-G_radius - z[k]), a2 = a * (G_radius - z[k]);
                    mn += std::min(a1, a2);
                    mx += std::max(a1, a2);
                }
                lo_[i] = std::max((long long)std::ceil(mn - 1e-7), tlo[piv[i]]);
                hi_[i] = std::min((long long)std::floor(mx + 1e-7), thi[piv[i]]);
                if (lo_[i] > hi_[i]) return;
            }
            double val = csolve(0, z);
            if (val != 0.0) partial.push_back(val);
            if (partial.size() == (1 << 16)) {
                double s = pairwise_sum(partial);
                partial.clear();
                partial.push_back(s);
            }
            return;
        }
        std::size_t k = free_cols[level];
        for (long long x = tlo[k]; x <= thi[k]; x++) {
            t[k] = x;
            wfree(level + 1);
        }
    };
    wfree(0);
    return pairwise_sum(partial);
}

// --- log-weight removal -------------------------------------------------------------

struct UnweightedInterval {
    double lo = 0, hi = 0;
};

// weighted count over [delta N, N]^d sandwiches the unweighted count between
// weighted/log^d N and weighted/log^d(delta N)
inline UnweightedInterval unweighted_from_weighted(double weighted, long long N,
                                                   std::size_t d, double delta = 1.0)
{
    if (weighted < 0)
        throw std::invalid_argument("unweighted_from_weighted: negative weight");
    if (!(delta > 0) || delta > 1)
        throw std::invalid_argument("unweighted_from_weighted: delta out of (0,1]");
    if (weighted == 0) return {0, 0};
    double top = std::pow(std::log(double(N)), double(d));
    double bot = std::pow(std::log(delta * double(N)), double(d));
    return {weighted / top, weighted / bot};
}

} // namespace primeineq

#endif
