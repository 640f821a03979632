#ifndef PRIMEINEQ_QUAD_HPP
#define PRIMEINEQ_QUAD_HPP

// Continuous integrals: the singular integral J, the Appendix-style box
// constants, the continuous T-form, and a numeric Poisson-summation check.
// Quasi-Monte-Carlo with rotation-scrambled radical-inverse points; error
// bars come from independent scrambles, values are bit-reproducible from the
// seed.

#include "arith.hpp"
#include "forms.hpp"

#include <string>

namespace primeineq {

struct QuadResult {
    double value = 0;
    double std_error = 0;
    std::string method = "monte_carlo"; // closed_form | grid | monte_carlo
    long long samples = 0;
    std::uint64_t seed = 0;
    bool budget_ok = true;
    std::string note;
};

// --- scrambled radical-inverse points -----------------------------------------

namespace detail {

constexpr int kQmcPrimes[12] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

inline double radical_inverse(int base, std::uint64_t n)
{
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (n) {
        x += double(n % base) * f;
        n /= base;
        f *= inv;
    }
    return x;
}

} // namespace detail

// f is evaluated on points of the axis box [lo, hi]; returns the integral
// estimate with a scramble-spread error bar.
inline QuadResult qmc_integrate(std::size_t dim, const std::vector<double>& lo,
                                const std::vector<double>& hi,
                                const std::function<double(const double*)>& f,
                                long long samples, std::uint64_t seed,
                                int scrambles = 16)
{
    if (dim > 12)
        throw std::invalid_argument("qmc_integrate: dimension cap is 12");
    QuadResult out;
    out.seed = seed;
    out.samples = samples;
    double vol = 1.0;
    for (std::size_t j = 0; j < dim; j++) vol *= hi[j] - lo[j];
    if (dim == 0) { // 0-dimensional integral = single evaluation
        out.value = f(nullptr);
        out.method = "closed_form";
        return out;
    }
    if (vol <= 0) {
        out.value = 0;
        out.method = "closed_form";
        return out;
    }
    long long per = std::max<long long>(1, samples / scrambles);
    std::vector<double> means(scrambles, 0.0);
    std::vector<double> x(dim);
    for (int s = 0; s < scrambles; s++) {
        std::uint64_t st = seed * 0x9e3779b97f4a7c15ULL + std::uint64_t(s) + 1;
        std::vector<double> shift(dim);
        for (std::size_t j = 0; j < dim; j++) shift[j] = uniform01(st);
        double acc = 0;
        std::vector<double> batch;
        batch.reserve(std::size_t(std::min<long long>(per, 1 << 16)));
        for (long long n = 0; n < per; n++) {
            for (std::size_t j = 0; j < dim; j++) {
                double t = detail::radical_inverse(detail::kQmcPrimes[j],
                                                   std::uint64_t(n) + 1) + shift[j];
                t -= std::floor(t);
                x[j] = lo[j] + (hi[j] - lo[j]) * t;
            }
            batch.push_back(f(x.data()));
            if ((long long)batch.size() == (1 << 16)) {
                acc += pairwise_sum(batch);
                batch.clear();
            }
        }
        acc += pairwise_sum(batch);
        means[s] = acc / double(per);
    }
    double m = 0;
    for (double v : means) m += v;
    m /= scrambles;
    double var = 0;
    for (double v : means) var += (v - m) * (v - m);
    var /= std::max(1, scrambles - 1);
    out.value = vol * m;
    out.std_error = vol * std::sqrt(var / scrambles);
    out.samples = per * scrambles;
    return out;
}

// --- small polygon helpers (for exact 2-d sections of box integrals) -----------

namespace detail {

using Poly2 = std::vector<std::array<double, 2>>;

inline double poly_area(const Poly2& p)
{
    double a = 0;
    for (std::size_t i = 0; i < p.size(); i++) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * std::abs(a);
}

// clip polygon against half-plane n.x <= c (Sutherland-Hodgman)
inline Poly2 clip_half(const Poly2& poly, double nx, double ny, double c)
{
    Poly2 out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; i++) {
        const auto& A = poly[i];
        const auto& B = poly[(i + 1) % n];
        double da = nx * A[0] + ny * A[1] - c;
        double db = nx * B[0] + ny * B[1] - c;
        bool ina = da <= 0, inb = db <= 0;
        if (ina) out.push_back(A);
        if (ina != inb) {
            double t = da / (da - db);
            out.push_back({A[0] + t * (B[0] - A[0]), A[1] + t * (B[1] - A[1])});
        }
    }
    return out;
}

// area of {x in [0,N]^2 : M x + z in [-eps, eps]^2}, M invertible 2x2
inline Poly2 section_polygon(const double Minv[2][2], const double z[2],
                             double eps, double N)
{
    // corners of M^{-1}([-eps,eps]^2 - z)
    Poly2 p;
    for (auto [su, sv] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
        double y0 = su * eps - z[0], y1 = sv * eps - z[1];
        p.push_back({Minv[0][0] * y0 + Minv[0][1] * y1,
                     Minv[1][0] * y0 + Minv[1][1] * y1});
    }
    // orient counterclockwise for the clipper
    double cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) -
                   (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    if (cross < 0) std::reverse(p.begin(), p.end());
    p = clip_half(p, -1, 0, 0);  // x >= 0
    if (p.empty()) return p;
    p = clip_half(p, 1, 0, N);   // x <= N
    if (p.empty()) return p;
    p = clip_half(p, 0, -1, 0);  // y >= 0
    if (p.empty()) return p;
    p = clip_half(p, 0, 1, N);   // y <= N
    return p;
}

} // namespace detail

// --- box integral, direct ------------------------------------------------------

// int_{[0,N]^d} 1_{[-eps,eps]^m}(L x + v) dx.  For m <= 2 the pivot section is
// integrated exactly per sample (interval length / clipped polygon area); the
// qMC runs over the free coordinates only.
inline QuadResult box_integral_direct(const LinearSystem& ls, long long budget,
                                      std::uint64_t seed)
{
    std::size_t m = ls.m, d = ls.d;
    Matrix<double> Ln = ls.L_num();

    if (m <= 2 && d > m) {
        auto piv = pivot_columns_max_det(ls.L);
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < d; c++)
            if (std::find(piv.begin(), piv.end(), c) == piv.end())
                free_cols.push_back(c);
        std::vector<double> lo(free_cols.size(), 0.0), hi(free_cols.size(), double(ls.N));

        if (m == 1) {
            double a = Ln(0, piv[0]);
            auto f = [&](const double* x) {
                double z = ls.v[0];
                for (std::size_t j = 0; j < free_cols.size(); j++)
                    z += Ln(0, free_cols[j]) * x[j];
                // |a t + z| <= eps, t in [0, N]
                double t0 = (-ls.epsilon - z) / a, t1 = (ls.epsilon - z) / a;
                if (t0 > t1) std::swap(t0, t1);
                double len = std::min(t1, double(ls.N)) - std::max(t0, 0.0);
                return len > 0 ? len : 0.0;
            };
            auto r = qmc_integrate(free_cols.size(), lo, hi, f, budget, seed);
            r.note = "pivot-sliced (interval section)";
            return r;
        }

        double M[2][2] = {{Ln(0, piv[0]), Ln(0, piv[1])},
                          {Ln(1, piv[0]), Ln(1, piv[1])}};
        double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
        double Minv[2][2] = {{M[1][1] / det, -M[0][1] / det},
                             {-M[1][0] / det, M[0][0] / det}};
        auto f = [&](const double* x) {
            double z[2] = {ls.v[0], ls.v[1]};
            for (std::size_t j = 0; j < free_cols.size(); j++) {
                z[0] += Ln(0, free_cols[j]) * x[j];
                z[1] += Ln(1, free_cols[j]) * x[j];
            }
            auto poly = detail::section_polygon(Minv, z, ls.epsilon, double(ls.N));
            return poly.size() >= 3 ? detail::poly_area(poly) : 0.0;
        };
        auto r = qmc_integrate(free_cols.size(), lo, hi, f, budget, seed);
        r.note = "pivot-sliced (polygon section)";
        return r;
    }

    // fallback: raw indicator over the full box
    std::vector<double> lo(d, 0.0), hi(d, double(ls.N));
    auto f = [&](const double* x) {
        for (std::size_t i = 0; i < m; i++) {
            double z = ls.v[i];
            for (std::size_t j = 0; j < d; j++) z += Ln(i, j) * x[j];
            if (std::abs(z) > ls.epsilon) return 0.0;
        }
        return 1.0;
    };
    auto r = qmc_integrate(d, lo, hi, f, budget, seed);
    r.note = "raw indicator";
    return r;
}

// --- the Appendix-A box constant -------------------------------------------------

// C_{L, v/N} = vol(M^{-1}[-1,1]^m) * vol{x in [0,1]^{d-m} :
//              -sum_j x_j a^{(j)} - M^{-1} v / N in [0,1]^m},
// with M the best-conditioned invertible m x m column submatrix.
inline QuadResult box_constant_CL(const LinearSystem& ls, long long budget,
                                  std::uint64_t seed,
                                  const std::vector<std::size_t>* forced_pivot = nullptr)
{
    std::size_t m = ls.m, d = ls.d;
    auto piv = forced_pivot ? *forced_pivot : pivot_columns_max_det(ls.L);
    const FieldPtr f = ls.field();

    FieldMatrix M(m, m, FieldElement::zero(f));
    for (std::size_t r = 0; r < m; r++)
        for (std::size_t c = 0; c < m; c++) M(r, c) = ls.L(r, piv[c]);
    FieldElement detM = fe_det(M);
    if (detM.is_zero())
        throw std::invalid_argument("box_constant_CL: forced pivot is singular");
    FieldMatrix Minv = fe_inverse(M);
    Matrix<double> Minv_n = fe_to_double(Minv);

    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < d; c++)
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) free_cols.push_back(c);

    // a^{(j)} = M^{-1} L_j for free columns, and the M^{-1} v / N offset
    Matrix<double> Ln = ls.L_num();
    Matrix<double> A(m, free_cols.size());
    for (std::size_t j = 0; j < free_cols.size(); j++)
        for (std::size_t i = 0; i < m; i++) {
            double acc = 0;
            for (std::size_t k = 0; k < m; k++)
                acc += Minv_n(i, k) * Ln(k, free_cols[j]);
            A(i, j) = acc;
        }
    std::vector<double> off(m, 0.0);
    for (std::size_t i = 0; i < m; i++)
        for (std::size_t k = 0; k < m; k++)
            off[i] += Minv_n(i, k) * ls.v[k] / double(ls.N);

    std::vector<double> lo(free_cols.size(), 0.0), hi(free_cols.size(), 1.0);
    auto indicator = [&](const double* x) {
        for (std::size_t i = 0; i < m; i++) {
            double z = -off[i];
            for (std::size_t j = 0; j < free_cols.size(); j++) z -= A(i, j) * x[j];
            if (z < 0.0 || z > 1.0) return 0.0;
        }
        return 1.0;
    };
    QuadResult r = qmc_integrate(free_cols.size(), lo, hi, indicator, budget, seed);
    double volM = std::pow(2.0, double(m)) / std::abs(detM.to_double());
    r.value *= volM;
    r.std_error *= volM;

    RationalDimension rd = rational_dimension(ls);
    if (rd.u != 0)
        r.note = "warning: L not purely irrational (u = " + std::to_string(rd.u) +
                 "); the Appendix error shape does not apply";
    return r;
}

// --- singular integral J -----------------------------------------------------------

// J_r = N^{-(h-m')} int F((Xi x + r)/N) G(L' x + v') dx
struct SingularIntegrand {
    std::function<double(const std::vector<double>&)> F; // on R^d, support [-rad,rad]^d
    double F_radius = 1.0;
    std::function<double(const std::vector<double>&)> G; // on R^{m'}
    IntMatrix Xi;            // d x h
    std::vector<Int> r;      // in Z^d
    Matrix<double> Lp;       // m' x h
    std::vector<double> vp;  // m'
    long long N = 1;
};

inline QuadResult singular_integral_J(const SingularIntegrand& in, long long budget,
                                      std::uint64_t seed)
{
    std::size_t d = in.Xi.rows, h = in.Xi.cols;
    if (h > 12)
        throw std::invalid_argument("singular_integral_J: h > 12 unsupported");
    std::size_t mp = in.Lp.rows;

    // bounding box for x from h independent rows of Xi
    RatMatrix XiQ = to_rat(in.Xi);
    // choose h rows with nonzero h x h minor, greedily
    std::vector<std::size_t> rows;
    {
        for (std::size_t i = 0; i < d && rows.size() < h; i++) {
            RatMatrix test(rows.size() + 1, h);
            for (std::size_t k = 0; k < rows.size(); k++)
                for (std::size_t j = 0; j < h; j++) test(k, j) = XiQ(rows[k], j);
            for (std::size_t j = 0; j < h; j++) test(rows.size(), j) = XiQ(i, j);
            if (rat_rank(test) == rows.size() + 1) rows.push_back(i);
        }
        if (rows.size() != h)
            throw std::invalid_argument("singular_integral_J: Xi not injective");
    }
    RatMatrix Msub(h, h);
    for (std::size_t k = 0; k < h; k++)
        for (std::size_t j = 0; j < h; j++) Msub(k, j) = XiQ(rows[k], j);
    auto Minv = rat_inverse(Msub);
    std::vector<double> lo(h, 0.0), hi(h, 0.0);
    for (std::size_t k = 0; k < h; k++) {
        double c = 0, w = 0;
        for (std::size_t j = 0; j < h; j++) {
            double mij = to_double((*Minv)(k, j));
            double rj = in.r[rows[j]].get_d();
            c += mij * (-rj);
            w += std::abs(mij) * in.F_radius * double(in.N);
        }
        lo[k] = c - w;
        hi[k] = c + w;
    }

    Matrix<double> Xin(d, h);
    for (std::size_t i = 0; i < d; i++)
        for (std::size_t j = 0; j < h; j++) Xin(i, j) = in.Xi(i, j).get_d();

    std::vector<double> Fx(d), Gx(mp);
    auto f = [&](const double* x) mutable {
        for (std::size_t i = 0; i < d; i++) {
            double acc = in.r[i].get_d();
            for (std::size_t j = 0; j < h; j++) acc += Xin(i, j) * x[j];
            Fx[i] = acc / double(in.N);
        }
        double Fv = in.F(Fx);
        if (Fv == 0.0) return 0.0;
        for (std::size_t i = 0; i < mp; i++) {
            double acc = in.vp[i];
            for (std::size_t j = 0; j < h; j++) acc += in.Lp(i, j) * x[j];
            Gx[i] = acc;
        }
        return Fv * in.G(Gx);
    };
    QuadResult r = qmc_integrate(h, lo, hi, f, budget, seed);
    double norm = std::pow(double(in.N), -double(h) + double(mp));
    r.value *= norm;
    r.std_error *= norm;
    return r;
}

// --- continuous T ---------------------------------------------------------------

// T~ = N^{-(d-m)} int prod g_j(x_j) F(x/N) G(Lx + v) dx.  For m <= 2 with a
// compactly supported G the pivot section is importance-sampled.
inline QuadResult continuous_T(
    const std::vector<std::function<double(double)>>& g,
    const std::function<double(const std::vector<double>&)>& F, double F_radius,
    const std::function<double(const std::vector<double>&)>& G, double G_radius,
    const LinearSystem& ls, long long budget, std::uint64_t seed)
{
    std::size_t m = ls.m, d = ls.d;
    if (g.size() != d)
        throw std::invalid_argument("continuous_T: need one g per coordinate");
    Matrix<double> Ln = ls.L_num();
    double norm = std::pow(double(ls.N), -double(d) + double(m));
    std::vector<double> xfull(d), Fx(d), Gx(m);

    auto eval_point = [&](const std::vector<double>& x) {
        double w = 1.0;
        for (std::size_t j = 0; j < d && w != 0.0; j++) w *= g[j](x[j]);
        if (w == 0.0) return 0.0;
        for (std::size_t j = 0; j < d; j++) Fx[j] = x[j] / double(ls.N);
        double Fv = F(Fx);
        if (Fv == 0.0) return 0.0;
        for (std::size_t i = 0; i < m; i++) {
            double acc = ls.v[i];
            for (std::size_t j = 0; j < d; j++) acc += Ln(i, j) * x[j];
            Gx[i] = acc;
        }
        return w * Fv * G(Gx);
    };

    if (m <= 2 && d > m) {
        auto piv = pivot_columns_max_det(ls.L);
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < d; c++)
            if (std::find(piv.begin(), piv.end(), c) == piv.end())
                free_cols.push_back(c);
        double R = F_radius * double(ls.N);
        std::vector<double> lo(free_cols.size(), -R), hi(free_cols.size(), R);

        double M2[2][2] = {}, Minv2[2][2] = {};
        double a1 = 0;
        if (m == 2) {
            M2[0][0] = Ln(0, piv[0]); M2[0][1] = Ln(0, piv[1]);
            M2[1][0] = Ln(1, piv[0]); M2[1][1] = Ln(1, piv[1]);
            double det = M2[0][0] * M2[1][1] - M2[0][1] * M2[1][0];
            Minv2[0][0] = M2[1][1] / det; Minv2[0][1] = -M2[0][1] / det;
            Minv2[1][0] = -M2[1][0] / det; Minv2[1][1] = M2[0][0] / det;
        } else {
            a1 = Ln(0, piv[0]);
        }

        std::uint64_t rng_state = seed ^ 0xabcdef12345678ULL;
        auto f = [&](const double* x) mutable {
            for (std::size_t j = 0; j < free_cols.size(); j++)
                xfull[free_cols[j]] = x[j];
            if (m == 1) {
                double z = ls.v[0];
                for (std::size_t j = 0; j < free_cols.size(); j++)
                    z += Ln(0, free_cols[j]) * x[j];
                double t0 = (-G_radius - z) / a1, t1 = (G_radius - z) / a1;
                if (t0 > t1) std::swap(t0, t1);
                t0 = std::max(t0, -R);
                t1 = std::min(t1, R);
                if (t0 >= t1) return 0.0;
                double t = t0 + (t1 - t0) * uniform01(rng_state);
                xfull[piv[0]] = t;
                return (t1 - t0) * eval_point(xfull);
            }
            double z[2] = {ls.v[0], ls.v[1]};
            for (std::size_t j = 0; j < free_cols.size(); j++) {
                z[0] += Ln(0, free_cols[j]) * x[j];
                z[1] += Ln(1, free_cols[j]) * x[j];
            }
            // pivot coords range over [-R, R], so clip the parallelogram
            // M^{-1}([-G_rad,G_rad]^2 - z) to that square by hand
            detail::Poly2 poly;
            for (auto [su, sv] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
                double y0 = su * G_radius - z[0], y1 = sv * G_radius - z[1];
                poly.push_back({Minv2[0][0] * y0 + Minv2[0][1] * y1,
                                Minv2[1][0] * y0 + Minv2[1][1] * y1});
            }
            double cross = (poly[1][0] - poly[0][0]) * (poly[2][1] - poly[0][1]) -
                           (poly[2][0] - poly[0][0]) * (poly[1][1] - poly[0][1]);
            if (cross < 0) std::reverse(poly.begin(), poly.end());
            poly = detail::clip_half(poly, -1, 0, R);
            if (!poly.empty()) poly = detail::clip_half(poly, 1, 0, R);
            if (!poly.empty()) poly = detail::clip_half(poly, 0, -1, R);
            if (!poly.empty()) poly = detail::clip_half(poly, 0, 1, R);
            if (poly.size() < 3) return 0.0;
            double area = detail::poly_area(poly);
            if (area <= 0) return 0.0;
            // rejection-sample one point from the clipped polygon
            double bx0 = poly[0][0], bx1 = poly[0][0], by0 = poly[0][1], by1 = poly[0][1];
            for (auto& p : poly) {
                bx0 = std::min(bx0, p[0]); bx1 = std::max(bx1, p[0]);
                by0 = std::min(by0, p[1]); by1 = std::max(by1, p[1]);
            }
            for (int tries = 0; tries < 64; tries++) {
                double px = bx0 + (bx1 - bx0) * uniform01(rng_state);
                double py = by0 + (by1 - by0) * uniform01(rng_state);
                // inside test via the defining inequalities
                double w0 = M2[0][0] * px + M2[0][1] * py + z[0];
                double w1 = M2[1][0] * px + M2[1][1] * py + z[1];
                if (std::abs(w0) <= G_radius && std::abs(w1) <= G_radius &&
                    std::abs(px) <= R && std::abs(py) <= R) {
                    xfull[piv[0]] = px;
                    xfull[piv[1]] = py;
                    return area * eval_point(xfull);
                }
            }
            return 0.0;
        };
        QuadResult r = qmc_integrate(free_cols.size(), lo, hi, f, budget, seed);
        r.value *= norm;
        r.std_error *= norm;
        r.note = "pivot-sliced importance sampling";
        return r;
    }

    double R = F_radius * double(ls.N);
    std::vector<double> lo(d, -R), hi(d, R);
    auto f = [&](const double* x) {
        std::vector<double> xv(x, x + d);
        return eval_point(xv);
    };
    QuadResult r = qmc_integrate(d, lo, hi, f, budget, seed);
    r.value *= norm;
    r.std_error *= norm;
    return r;
}

// --- Poisson summation check ----------------------------------------------------

struct PoissonCheck {
    double lhs = 0, rhs = 0, diff = 0;
    double truncation_radius = 0;
    long long lattice_points = 0, dual_points = 0;
};

// F(x) = prod_j chi_j(x_j), Gamma = B Z^h.  Both sides evaluated with the
// dual sum truncated once shell increments fall below tol/10.
inline PoissonCheck poisson_check(const std::vector<SmoothBump>& chis,
                                  const RatMatrix& B, double tol = 1e-8)
{
    std::size_t h = B.rows;
    if (B.cols != h || chis.size() != h)
        throw std::invalid_argument("poisson_check: dimension mismatch");
    auto BinvOpt = rat_inverse(B);
    if (!BinvOpt) throw std::invalid_argument("poisson_check: singular basis");
    RatMatrix Binv = *BinvOpt;
    Rat detB = rat_det(B);
    double vol = std::abs(to_double(detB));

    Matrix<double> Bn(h, h), Dn(h, h);
    RatMatrix D = Binv.transposed(); // dual basis
    for (std::size_t i = 0; i < h; i++)
        for (std::size_t j = 0; j < h; j++) {
            Bn(i, j) = to_double(B(i, j));
            Dn(i, j) = to_double(D(i, j));
        }

    PoissonCheck out;

    // lhs: lattice points inside the support box, k-box via B^{-1}
    {
        std::vector<double> klo(h, 0), khi(h, 0);
        for (std::size_t k = 0; k < h; k++) {
            double c = 0;
            for (std::size_t j = 0; j < h; j++)
                c += std::abs(to_double(Binv(k, j))) * chis[j].support_radius();
            klo[k] = -c;
            khi[k] = c;
        }
        std::vector<long long> kk(h);
        std::function<void(std::size_t)> rec = [&](std::size_t pos) {
            if (pos == h) {
                double val = 1.0;
                for (std::size_t i = 0; i < h && val != 0.0; i++) {
                    double xi = 0;
                    for (std::size_t j = 0; j < h; j++) xi += Bn(i, j) * kk[j];
                    val *= chis[i](xi);
                }
                if (val != 0.0) {
                    out.lhs += val;
                    out.lattice_points++;
                }
                return;
            }
            for (long long k = (long long)std::floor(klo[pos]) - 1;
                 k <= (long long)std::ceil(khi[pos]) + 1; k++) {
                kk[pos] = k;
                rec(pos + 1);
            }
        };
        rec(0);
    }

    // rhs: dual sum in growing max-norm shells; the coefficients oscillate in
    // magnitude, so stop only after several consecutive negligible shells
    {
        double sum = 0;
        long long shell = 0;
        int quiet = 0;
        std::vector<std::map<long long, double>> cache(h); // per-coordinate memo
        auto fval = [&](std::size_t i, double yi) {
            long long key = (long long)std::llround(yi * (1LL << 32));
            auto it = cache[i].find(key);
            if (it != cache[i].end()) return it->second;
            double v = chis[i].fourier(yi);
            cache[i][key] = v;
            return v;
        };
        for (;;) {
            double shell_sum = 0, shell_max = 0;
            std::vector<long long> kk(h);
            std::function<void(std::size_t, bool)> rec = [&](std::size_t pos,
                                                             bool on_shell) {
                if (pos == h) {
                    if (!on_shell) return;
                    double val = 1.0;
                    for (std::size_t i = 0; i < h && val != 0.0; i++) {
                        double yi = 0;
                        for (std::size_t j = 0; j < h; j++) yi += Dn(i, j) * kk[j];
                        val *= fval(i, yi);
                    }
                    shell_sum += val;
                    shell_max = std::max(shell_max, std::abs(val));
                    out.dual_points++;
                    return;
                }
                for (long long k = -shell; k <= shell; k++) {
                    kk[pos] = k;
                    rec(pos + 1, on_shell || std::llabs(k) == shell);
                }
            };
            rec(0, false);
            sum += shell_sum;
            quiet = shell_max < tol / 10 ? quiet + 1 : 0;
            if (shell >= 2 && quiet >= 4) break;
            if (shell > 512)
                throw std::runtime_error("poisson_check: dual sum not converging");
            shell++;
        }
        out.rhs = sum / vol;
        out.truncation_radius = double(shell);
    }
    out.diff = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace primeineq

#endif
