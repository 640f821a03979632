#ifndef PRIMEINEQ_FORMS_HPP
#define PRIMEINEQ_FORMS_HPP

// Hypothesis validation and the rational-reduction pipeline: degeneracy
// tests, rational dimension, kernel-lattice parametrisation, residue shifts,
// normal forms.  Everything here is exact; numeric shadows of the exact
// objects are provided for the evaluators.

#include "algebraic.hpp"

#include <functional>
#include <set>

namespace primeineq {

// One inequality system ||L n + v||_inf <= eps over [N]^d.
struct LinearSystem {
    std::size_t m = 0, d = 0;
    FieldMatrix L;               // m x d
    std::vector<double> v;       // length m
    double epsilon = 0;
    long long N = 0;

    std::vector<Rat> v_exact;    // v, exactly (doubles are dyadic rationals)
    bool prediction_ready = true; // d >= m+2

    LinearSystem() = default;

    LinearSystem(FieldMatrix L_, std::vector<double> v_, double eps, long long N_,
                 double C_bound = 1e6)
        : m(L_.rows), d(L_.cols), L(std::move(L_)), v(std::move(v_)),
          epsilon(eps), N(N_)
    {
        if (m == 0 || d < m)
            throw std::invalid_argument("LinearSystem: need d >= m >= 1");
        if (v.size() != m)
            throw std::invalid_argument("LinearSystem: v has wrong length");
        if (!(epsilon > 0))
            throw std::invalid_argument("LinearSystem: epsilon must be positive");
        if (N <= 0)
            throw std::invalid_argument("LinearSystem: N must be positive");
        if (exact_rank(L) != m)
            throw std::invalid_argument("LinearSystem: rank(L) < m (not surjective)");
        for (double vi : v)
            if (std::abs(vi) > C_bound * double(N))
                throw std::invalid_argument("LinearSystem: ||v||_inf exceeds C*N");
        prediction_ready = d >= m + 2;
        for (double vi : v) v_exact.push_back(rat_from_double(vi));
    }

    const FieldPtr& field() const { return L.a.front().field(); }

    Matrix<double> L_num() const { return fe_to_double(L); }
};

// --- dual degeneracy ---------------------------------------------------------

struct DegeneracyResult {
    bool degenerate = false;
    std::size_t i = 0, j = 0;              // the (<=2)-support of the witness
    std::vector<FieldElement> witness;     // row-space vector, if degenerate
};

// L is dual-degenerate iff some nonzero row-space vector has support in a
// pair {i,j}, i.e. the submatrix with columns [d] \ {i,j} has rank < m.
inline DegeneracyResult is_dual_degenerate(const LinearSystem& ls)
{
    if (ls.d < ls.m + 2)
        throw std::invalid_argument("is_dual_degenerate: needs d >= m+2");
    const FieldPtr f = ls.field();
    DegeneracyResult res;
    for (std::size_t i = 0; i < ls.d && !res.degenerate; i++)
        for (std::size_t j = i + 1; j < ls.d && !res.degenerate; j++) {
            FieldMatrix sub(ls.m, ls.d - 2, FieldElement::zero(f));
            std::size_t idx = 0;
            for (std::size_t c = 0; c < ls.d; c++) {
                if (c == i || c == j) continue;
                for (std::size_t r = 0; r < ls.m; r++) sub(r, idx) = ls.L(r, c);
                idx++;
            }
            if (exact_rank(sub) < ls.m) {
                res.degenerate = true;
                res.i = i;
                res.j = j;
                // witness = beta^T L for beta in the left kernel of sub
                FieldMatrix K = fe_kernel(sub.transposed());
                std::vector<FieldElement> beta;
                for (std::size_t r = 0; r < ls.m; r++) beta.push_back(K(r, 0));
                res.witness.assign(ls.d, FieldElement::zero(f));
                for (std::size_t c = 0; c < ls.d; c++)
                    for (std::size_t r = 0; r < ls.m; r++)
                        res.witness[c] = res.witness[c] + beta[r] * ls.L(r, c);
            }
        }
    return res;
}

// all m-by-m minors nonvanishing; only meaningful at d = m+2 where it is
// equivalent to non-degeneracy
inline bool minor_criterion(const LinearSystem& ls)
{
    if (ls.d != ls.m + 2)
        throw std::invalid_argument("minor_criterion: requires d = m+2");
    std::vector<std::size_t> idx(ls.m);
    std::function<bool(std::size_t, std::size_t)> rec =
        [&](std::size_t pos, std::size_t from) -> bool {
        if (pos == ls.m) {
            FieldMatrix M(ls.m, ls.m, FieldElement::zero(ls.field()));
            for (std::size_t r = 0; r < ls.m; r++)
                for (std::size_t c = 0; c < ls.m; c++)
                    M(r, c) = ls.L(r, idx[c]);
            return !fe_det(M).is_zero();
        }
        for (std::size_t c = from; c < ls.d; c++) {
            idx[pos] = c;
            if (!rec(pos + 1, c + 1)) return false;
        }
        return true;
    };
    return rec(0, 0);
}

// --- rational dimension --------------------------------------------------------

struct RationalDimension {
    std::size_t u = 0;
    RatMatrix Theta;     // u x m, scaled so Theta*L is an integer matrix
    IntMatrix ThetaL;    // u x d
};

// The space {beta : beta^T L is rational} is cut out by "all non-constant
// power-basis coordinates of beta^T L vanish", a rational linear system.
inline RationalDimension rational_dimension(const LinearSystem& ls)
{
    const unsigned n = ls.field()->degree();
    RatMatrix C(ls.d * (n > 1 ? n - 1 : 1), ls.m, Rat(0));
    if (n > 1) {
        for (std::size_t j = 0; j < ls.d; j++)
            for (unsigned k = 1; k < n; k++)
                for (std::size_t i = 0; i < ls.m; i++)
                    C(j * (n - 1) + (k - 1), i) = ls.L(i, j).coords()[k];
    }
    // n == 1: no constraints, kernel is everything
    RatMatrix K = n > 1 ? rat_kernel(C) : RatMatrix::identity(ls.m, Rat(1), Rat(0));

    RationalDimension out;
    out.u = K.cols;
    out.Theta = RatMatrix(out.u, ls.m);
    out.ThetaL = IntMatrix(out.u, ls.d, Int(0));
    for (std::size_t r = 0; r < out.u; r++) {
        // image row (theta^T L)_j = sum_i theta_i * coord_0(L_ij), a rational
        std::vector<Rat> img(ls.d, Rat(0));
        for (std::size_t j = 0; j < ls.d; j++)
            for (std::size_t i = 0; i < ls.m; i++)
                img[j] += K(i, r) * ls.L(i, j).coords()[0];
        Int lcm(1);
        for (const auto& q : img)
            mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), q.get_den_mpz_t());
        int lead = 0;
        for (std::size_t i = 0; i < ls.m && lead == 0; i++) lead = sgn(K(i, r));
        Rat scale = Rat(lcm) * Rat(lead >= 0 ? 1 : -1);
        for (std::size_t i = 0; i < ls.m; i++) out.Theta(r, i) = K(i, r) * scale;
        for (std::size_t j = 0; j < ls.d; j++) {
            Rat e = img[j] * scale;
            out.ThetaL(r, j) = e.get_num(); // denominator cleared
        }
    }
    return out;
}

// --- the reduction itself -------------------------------------------------------

struct RationalReduction {
    std::size_t u = 0, m = 0, d = 0;
    RatMatrix Theta;       // u x m
    IntMatrix ThetaL;      // u x d
    IntMatrix Xi;          // d x (d-u), columns = lattice basis of Z^d meet ker(ThetaL)
    IntMatrix x_basis;     // d x u, Theta*L*x_i = lattice basis of Theta L Z^d
    IntMatrix img_basis;   // u x u, the basis Theta*L*x_i itself
    FieldMatrix Q, Q_inv;  // m x m
    FieldMatrix L_prime;   // (m-u) x (d-u)
    std::vector<double> v_prime; // length m-u

    struct Shift {
        std::vector<Int> r;          // r_tilde in Z^d
        std::vector<double> Lr_plus_v; // L r_tilde + v, numerically
        std::vector<double> g_shift;   // first-u block of Q L r + Q v (rest 0)
        Rat min_norm;                 // || Theta L r + Theta v ||_inf, exact
    };
    std::vector<Shift> shifts;     // the set R_tilde
    std::size_t minimiser = 0;     // index of the norm-minimising shift
    bool minimiser_tie = false;
    bool collapsed = false;        // |R_tilde| == 1

    Matrix<double> Lp_num;         // numeric shadow of L_prime
    Matrix<double> Qinv_num;

    // G_{r_tilde}(x) = G(Q^{-1}(x_0 + shift)); evaluator for a shift index
    std::function<double(const std::vector<double>&)>
    shifted_G(const std::function<double(const std::vector<double>&)>& G,
              std::size_t shift_idx) const
    {
        auto Qi = Qinv_num;
        auto sh = shifts.at(shift_idx).g_shift;
        std::size_t uu = u, mm = m;
        return [Qi, sh, uu, mm, G](const std::vector<double>& x) {
            std::vector<double> arg(mm, 0.0);
            for (std::size_t i = 0; i < mm; i++) {
                double acc = 0;
                for (std::size_t k = 0; k < uu; k++) acc += Qi(i, k) * sh[k];
                for (std::size_t k = uu; k < mm; k++)
                    acc += Qi(i, k) * x[k - uu];
                arg[i] = acc;
            }
            return G(arg);
        };
    }
};

namespace detail {

// dist_inf(c, ker Theta) where Theta*c is already known exactly.
// u = 0: 0.  u = m: ||c||.  u = 1: |theta . c| / ||theta||_1 (exact by LP
// duality).  Otherwise a numeric minimax descent with inflated acceptance.
inline Rat dist_to_ker_theta(const RatMatrix& Theta, const std::vector<Rat>& theta_c,
                             const std::vector<Rat>& c)
{
    std::size_t u = Theta.rows, m = Theta.cols;
    if (u == 0) return Rat(0);
    if (u == m) {
        // ker Theta = {0}
        Rat mx(0);
        for (const auto& ci : c) mx = std::max(mx, rat_abs(ci));
        return mx;
    }
    if (u == 1) {
        Rat l1(0);
        for (std::size_t j = 0; j < m; j++) l1 += rat_abs(Theta(0, j));
        return rat_abs(theta_c[0]) / l1;
    }
    // numeric fallback: minimize max_i |(z + c)_i| over z in ker Theta
    RatMatrix K = rat_kernel(Theta); // m x (m-u)
    std::size_t k = K.cols;
    std::vector<double> cn(m);
    for (std::size_t i = 0; i < m; i++) cn[i] = to_double(c[i]);
    Matrix<double> Kn(m, k);
    for (std::size_t i = 0; i < m; i++)
        for (std::size_t j = 0; j < k; j++) Kn(i, j) = to_double(K(i, j));
    std::vector<double> t(k, 0.0);
    auto score = [&](const std::vector<double>& tv) {
        double mx = 0;
        for (std::size_t i = 0; i < m; i++) {
            double z = cn[i];
            for (std::size_t j = 0; j < k; j++) z += Kn(i, j) * tv[j];
            mx = std::max(mx, std::abs(z));
        }
        return mx;
    };
    double best = score(t);
    double step = 1.0 + std::abs(best);
    while (step > 1e-12 * (1 + best)) {
        bool improved = false;
        for (std::size_t j = 0; j < k; j++)
            for (double dir : {+1.0, -1.0}) {
                auto cand = t;
                cand[j] += dir * step;
                double sc = score(cand);
                if (sc < best) { best = sc; t = cand; improved = true; }
            }
        if (!improved) step /= 2;
    }
    return rat_from_double(best * (1 + 1e-9) + 1e-12);
}

inline std::vector<Rat> rat_mat_vec(const RatMatrix& A, const std::vector<Rat>& x)
{
    std::vector<Rat> y(A.rows, Rat(0));
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t j = 0; j < A.cols; j++) y[i] += A(i, j) * x[j];
    return y;
}

} // namespace detail

// Quotient out the rational relations of L, leaving a
// purely irrational L' together with the lattice parametrisation Xi, the
// complementary basis x_i, the basis-adapting Q, and the residue shifts.
inline RationalReduction rational_reduction(const LinearSystem& ls, double eta,
                                            double G_support_radius)
{
    (void)eta; // the |R_tilde| = 1 collapse is reported, not decided by eta
    const FieldPtr f = ls.field();
    RationalReduction R;
    R.m = ls.m;
    R.d = ls.d;

    RationalDimension rd = rational_dimension(ls);
    R.u = rd.u;
    R.Theta = rd.Theta;
    R.ThetaL = rd.ThetaL;

    // Xi: canonical (HNF) basis of the kernel lattice of ThetaL
    if (R.u == 0) {
        R.Xi = IntMatrix::identity(ls.d, Int(1), Int(0));
    } else {
        R.Xi = lattice_canonical(kernel_lattice(R.ThetaL));
        if (R.Xi.cols != ls.d - R.u)
            throw std::logic_error("rational_reduction: kernel lattice rank mismatch");
    }

    // x_i: preimages of a lattice basis of Theta L Z^d, from the column HNF
    R.x_basis = IntMatrix(ls.d, R.u, Int(0));
    R.img_basis = IntMatrix(R.u, R.u, Int(0));
    if (R.u > 0) {
        HnfResult h = hnf_col(R.ThetaL);
        for (std::size_t j = 0; j < R.u; j++) {
            bool zero = true;
            for (std::size_t i = 0; i < R.u; i++)
                if (sgn(h.H(i, j)) != 0) zero = false;
            if (zero)
                throw std::logic_error("rational_reduction: image lattice rank < u");
            for (std::size_t i = 0; i < R.u; i++) R.img_basis(i, j) = h.H(i, j);
            for (std::size_t i = 0; i < ls.d; i++) R.x_basis(i, j) = h.U(i, j);
        }
        // {x_i} + {Xi columns} must be a lattice basis of Z^d
        IntMatrix B(ls.d, ls.d, Int(0));
        for (std::size_t j = 0; j < R.u; j++)
            for (std::size_t i = 0; i < ls.d; i++) B(i, j) = R.x_basis(i, j);
        for (std::size_t j = 0; j < ls.d - R.u; j++)
            for (std::size_t i = 0; i < ls.d; i++) B(i, R.u + j) = R.Xi(i, j);
        Int det = int_det(B);
        if (cmp(abs(det), 1) != 0)
            throw std::logic_error("rational_reduction: union basis not unimodular");
    }

    // Q = [Theta ; annihilator of span(L x_i)], exact over the field
    if (R.u == 0) {
        R.Q = FieldMatrix::identity(ls.m, FieldElement::one(f), FieldElement::zero(f));
    } else {
        FieldMatrix W(R.u, ls.m, FieldElement::zero(f)); // rows (L x_i)^T
        for (std::size_t r = 0; r < R.u; r++)
            for (std::size_t i = 0; i < ls.m; i++) {
                FieldElement acc = FieldElement::zero(f);
                for (std::size_t j = 0; j < ls.d; j++)
                    acc = acc + ls.L(i, j) * Rat(R.x_basis(j, r));
                W(r, i) = acc;
            }
        R.Q = FieldMatrix(ls.m, ls.m, FieldElement::zero(f));
        for (std::size_t r = 0; r < R.u; r++)
            for (std::size_t i = 0; i < ls.m; i++)
                R.Q(r, i) = FieldElement::from_rat(f, R.Theta(r, i));
        if (R.u < ls.m) {
            FieldMatrix A = fe_kernel(W); // m x (m-u), columns kill span(Lx_i)
            for (std::size_t r = 0; r < ls.m - R.u; r++)
                for (std::size_t i = 0; i < ls.m; i++)
                    R.Q(R.u + r, i) = A(i, r);
        }
    }
    R.Q_inv = fe_inverse(R.Q);

    // L' = pi_{m-u} Q L Xi  (the first u rows of Q L Xi vanish identically)
    FieldMatrix XiF(ls.d, ls.d - R.u, FieldElement::zero(f));
    for (std::size_t i = 0; i < ls.d; i++)
        for (std::size_t j = 0; j + R.u < ls.d; j++)
            XiF(i, j) = FieldElement::from_rat(f, Rat(R.Xi(i, j)));
    FieldMatrix QLXi = fe_mat_mul(fe_mat_mul(R.Q, ls.L), XiF);
    for (std::size_t j = 0; j + R.u < ls.d; j++)
        for (std::size_t r = 0; r < R.u; r++)
            if (!QLXi(r, j).is_zero())
                throw std::logic_error("rational_reduction: Q L Xi has nonzero "
                                       "rational block");
    R.L_prime = FieldMatrix(ls.m - R.u, ls.d - R.u, FieldElement::zero(f));
    for (std::size_t r = R.u; r < ls.m; r++)
        for (std::size_t j = 0; j + R.u < ls.d; j++)
            R.L_prime(r - R.u, j) = QLXi(r, j);

    // v' = pi_{m-u} Q v
    std::vector<FieldElement> Qv(ls.m, FieldElement::zero(f));
    for (std::size_t i = 0; i < ls.m; i++)
        for (std::size_t k = 0; k < ls.m; k++)
            Qv[i] = Qv[i] + R.Q(i, k) * ls.v_exact[k];
    R.v_prime.resize(ls.m - R.u);
    for (std::size_t i = R.u; i < ls.m; i++)
        R.v_prime[i - R.u] = Qv[i].to_double();

    // R_tilde: lattice points of Theta L Z^d inside Theta(support box - v),
    // filtered by continuous feasibility
    Rat grad = rat_from_double(G_support_radius);
    if (R.u == 0) {
        RationalReduction::Shift s;
        s.r.assign(ls.d, Int(0));
        s.Lr_plus_v = ls.v;
        s.min_norm = Rat(0);
        R.shifts.push_back(std::move(s));
    } else {
        // per-row interval for r_i: theta_i . (-v) +- grad * ||theta_i||_1
        std::vector<Rat> center(R.u, Rat(0)), halfw(R.u, Rat(0));
        for (std::size_t i = 0; i < R.u; i++) {
            Rat l1(0);
            for (std::size_t jj = 0; jj < ls.m; jj++) {
                center[i] -= R.Theta(i, jj) * ls.v_exact[jj];
                l1 += rat_abs(R.Theta(i, jj));
            }
            halfw[i] = grad * l1;
        }
        // enumerate r = img_basis * t over the triangular basis
        std::vector<Int> t(R.u, Int(0));
        std::vector<Rat> theta_v = detail::rat_mat_vec(
            R.Theta, std::vector<Rat>(ls.v_exact.begin(), ls.v_exact.end()));
        std::function<void(std::size_t, std::vector<Rat>)> rec =
            [&](std::size_t level, std::vector<Rat> partial) {
                if (level == R.u) {
                    // candidate r = partial; build r_tilde = sum t_i x_i
                    RationalReduction::Shift s;
                    s.r.assign(ls.d, Int(0));
                    for (std::size_t j = 0; j < ls.d; j++)
                        for (std::size_t i = 0; i < R.u; i++)
                            s.r[j] += t[i] * R.x_basis(j, i);
                    // c = L r_tilde + v (field-exact); Theta c = r + Theta v
                    std::vector<Rat> theta_c(R.u);
                    for (std::size_t i = 0; i < R.u; i++)
                        theta_c[i] = partial[i] + theta_v[i];
                    std::vector<Rat> c_num(ls.m); // rational only if field deg 1
                    std::vector<FieldElement> c(ls.m, FieldElement::zero(f));
                    bool all_rational = true;
                    for (std::size_t i = 0; i < ls.m; i++) {
                        FieldElement acc = FieldElement::from_rat(f, ls.v_exact[i]);
                        for (std::size_t j = 0; j < ls.d; j++)
                            acc = acc + ls.L(i, j) * Rat(s.r[j]);
                        c[i] = acc;
                        if (acc.is_rational()) c_num[i] = acc.rational_value();
                        else all_rational = false;
                    }
                    // feasibility: dist(c, ker Theta) <= grad
                    Rat dist;
                    if (R.u == ls.m) {
                        if (all_rational) {
                            dist = Rat(0);
                            for (auto& ci : c_num) dist = std::max(dist, rat_abs(ci));
                        } else {
                            // exact sup-norm via field signs
                            bool ok = true;
                            for (auto& ci : c) {
                                if ((ci - FieldElement::from_rat(f, grad)).sign() > 0 ||
                                    (ci + FieldElement::from_rat(f, grad)).sign() < 0)
                                    ok = false;
                            }
                            dist = ok ? Rat(0) : grad + 1;
                        }
                    } else if (R.u == 1) {
                        Rat l1(0);
                        for (std::size_t jj = 0; jj < ls.m; jj++)
                            l1 += rat_abs(R.Theta(0, jj));
                        dist = rat_abs(theta_c[0]) / l1;
                    } else {
                        std::vector<Rat> cr(ls.m);
                        for (std::size_t i = 0; i < ls.m; i++)
                            cr[i] = rat_from_double(c[i].to_double());
                        dist = detail::dist_to_ker_theta(R.Theta, theta_c, cr);
                    }
                    if (dist > grad) return;
                    s.Lr_plus_v.resize(ls.m);
                    for (std::size_t i = 0; i < ls.m; i++)
                        s.Lr_plus_v[i] = c[i].to_double();
                    s.min_norm = Rat(0);
                    for (std::size_t i = 0; i < R.u; i++)
                        s.min_norm = std::max(s.min_norm, rat_abs(theta_c[i]));
                    R.shifts.push_back(std::move(s));
                    return;
                }
                // triangular bound for t[level]: img_basis lower triangular
                Rat lo = center[level] - halfw[level];
                Rat hi = center[level] + halfw[level];
                for (std::size_t p = 0; p < level; p++) {
                    lo -= Rat(R.img_basis(level, p)) * Rat(t[p]);
                    hi -= Rat(R.img_basis(level, p)) * Rat(t[p]);
                }
                Rat diag = Rat(R.img_basis(level, level));
                Int tlo = rat_ceil(lo / diag), thi = rat_floor(hi / diag);
                for (Int tv = tlo; cmp(tv, thi) <= 0; tv += 1) {
                    t[level] = tv;
                    auto nxt = partial;
                    nxt[level] = Rat(0);
                    for (std::size_t p = 0; p <= level; p++)
                        nxt[level] += Rat(R.img_basis(level, p)) * Rat(t[p]);
                    // carry the full partial image vector
                    std::vector<Rat> np = partial;
                    np[level] = nxt[level];
                    rec(level + 1, np);
                }
            };
        rec(0, std::vector<Rat>(R.u, Rat(0)));
    }

    // deterministic order + minimiser of ||Theta L r + Theta v||
    std::sort(R.shifts.begin(), R.shifts.end(),
              [](const RationalReduction::Shift& a, const RationalReduction::Shift& b) {
                  return std::lexicographical_compare(
                      a.r.begin(), a.r.end(), b.r.begin(), b.r.end(),
                      [](const Int& x, const Int& y) { return cmp(x, y) < 0; });
              });
    R.collapsed = R.shifts.size() == 1;
    if (!R.shifts.empty()) {
        R.minimiser = 0;
        for (std::size_t i = 1; i < R.shifts.size(); i++) {
            int c = cmp(R.shifts[i].min_norm.get_num() * R.shifts[R.minimiser].min_norm.get_den(),
                        R.shifts[R.minimiser].min_norm.get_num() * R.shifts[i].min_norm.get_den());
            if (c < 0) { R.minimiser = i; R.minimiser_tie = false; }
            else if (c == 0 && i != R.minimiser) R.minimiser_tie = true;
        }
    }

    // numeric shadows + the g_shift blocks
    R.Lp_num = fe_to_double(R.L_prime);
    R.Qinv_num = fe_to_double(R.Q_inv);
    Matrix<double> Qn = fe_to_double(R.Q);
    Matrix<double> Ln = ls.L_num();
    for (auto& s : R.shifts) {
        s.g_shift.assign(R.u, 0.0);
        // Q L r + Q v, first u coordinates (the rest vanish by construction)
        std::vector<double> Lr(ls.m, 0.0);
        for (std::size_t i = 0; i < ls.m; i++) {
            for (std::size_t j = 0; j < ls.d; j++)
                Lr[i] += Ln(i, j) * s.r[j].get_d();
            Lr[i] += ls.v[i];
        }
        for (std::size_t i = 0; i < R.u; i++) {
            double acc = 0;
            for (std::size_t k = 0; k < ls.m; k++) acc += Qn(i, k) * Lr[k];
            s.g_shift[i] = acc;
        }
    }
    return R;
}

// --- form systems and normal forms ------------------------------------------------

struct FormSystem {
    std::size_t t = 0, h = 0;
    FieldMatrix Psi; // t x h, row i = coefficients of psi_i

    FormSystem() = default;
    FormSystem(FieldMatrix P) : t(P.rows), h(P.cols), Psi(std::move(P)) {}

    static FormSystem from_int(const IntMatrix& A, const FieldPtr& f)
    {
        FieldMatrix P(A.rows, A.cols, FieldElement::zero(f));
        for (std::size_t i = 0; i < A.rows; i++)
            for (std::size_t j = 0; j < A.cols; j++)
                P(i, j) = FieldElement::from_rat(f, Rat(A(i, j)));
        return FormSystem(std::move(P));
    }
};

// no two coordinate forms parallel (and no zero form when t >= 2)
inline bool is_finite_cs_complexity(const FormSystem& fs)
{
    std::vector<bool> zero_form(fs.t, true);
    for (std::size_t i = 0; i < fs.t; i++)
        for (std::size_t k = 0; k < fs.h; k++)
            if (!fs.Psi(i, k).is_zero()) { zero_form[i] = false; break; }
    if (fs.t >= 2)
        for (std::size_t i = 0; i < fs.t; i++)
            if (zero_form[i]) return false;
    for (std::size_t i = 0; i < fs.t; i++)
        for (std::size_t j = i + 1; j < fs.t; j++) {
            bool parallel = true;
            for (std::size_t a = 0; a < fs.h && parallel; a++)
                for (std::size_t b = a + 1; b < fs.h && parallel; b++) {
                    FieldElement minor = fs.Psi(i, a) * fs.Psi(j, b) -
                                         fs.Psi(i, b) * fs.Psi(j, a);
                    if (!minor.is_zero()) parallel = false;
                }
            if (parallel) return false;
        }
    return true;
}

// witness search per the definition: J_i of size <= s+1 with
// prod_{e in J_i} psi_{i'}(e) nonzero iff i' = i
inline bool verify_normal_form(const FormSystem& fs, unsigned s)
{
    std::vector<std::vector<bool>> zero(fs.t, std::vector<bool>(fs.h));
    for (std::size_t i = 0; i < fs.t; i++)
        for (std::size_t k = 0; k < fs.h; k++)
            zero[i][k] = fs.Psi(i, k).is_zero();

    for (std::size_t i = 0; i < fs.t; i++) {
        std::vector<std::size_t> cand;
        for (std::size_t k = 0; k < fs.h; k++)
            if (!zero[i][k]) cand.push_back(k);
        bool found = false;
        std::vector<std::size_t> pick;
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t from,
                                                                std::size_t left) {
            if (found) return;
            // check current pick
            if (!pick.empty()) {
                bool ok = true;
                for (std::size_t ip = 0; ip < fs.t && ok; ip++) {
                    if (ip == i) continue;
                    bool killed = false;
                    for (auto k : pick)
                        if (zero[ip][k]) { killed = true; break; }
                    if (!killed) ok = false;
                }
                if (ok) { found = true; return; }
            }
            if (left == 0) return;
            for (std::size_t c = from; c < cand.size(); c++) {
                pick.push_back(cand[c]);
                rec(c + 1, left - 1);
                pick.pop_back();
                if (found) return;
            }
        };
        rec(0, s + 1);
        if (!found) return false;
    }
    return true;
}

struct NormalFormExtension {
    FormSystem Psi_prime;
    unsigned s = 0;
    std::size_t d_prime = 0;
    std::vector<std::vector<FieldElement>> f_vectors; // added directions in R^h
};

// Greedy extension: for each form lacking a private
// witness, add one variable in a direction f from ker(psi_{i'}) avoiding the
// kernels of all other forms.  Directions are searched over small integer
// combinations of the exact kernel basis, lexicographically.
inline NormalFormExtension normal_form_extension(const FormSystem& fs)
{
    if (!is_finite_cs_complexity(fs))
        throw std::invalid_argument("normal_form_extension: infinite CS complexity");
    const FieldPtr f = fs.Psi.a.front().field();

    NormalFormExtension out;

    // already normal? report the smallest working s
    for (unsigned s = 0; s + 1 <= fs.h && s <= fs.t; s++)
        if (verify_normal_form(fs, s)) {
            out.Psi_prime = fs;
            out.s = s;
            out.d_prime = fs.h;
            return out;
        }

    FieldMatrix ext(fs.t, fs.h + fs.t, FieldElement::zero(f));
    for (std::size_t i = 0; i < fs.t; i++)
        for (std::size_t k = 0; k < fs.h; k++) ext(i, k) = fs.Psi(i, k);

    for (std::size_t ip = 0; ip < fs.t; ip++) {
        // kernel of psi_{ip} as a 1 x h system
        FieldMatrix row(1, fs.h, FieldElement::zero(f));
        for (std::size_t k = 0; k < fs.h; k++) row(0, k) = fs.Psi(ip, k);
        FieldMatrix K = fe_kernel(row); // h x (h-1) for a nonzero form
        std::size_t kd = K.cols;
        if (kd == 0)
            throw std::logic_error("normal_form_extension: zero-dimensional kernel");

        // search integer combos c of the kernel basis, by max-norm then lex
        bool placed = false;
        for (long radius = 1; radius <= 16 && !placed; radius++) {
            std::vector<long> c(kd, -radius);
            for (;;) {
                bool on_shell = false;
                for (auto x : c)
                    if (std::labs(x) == radius) on_shell = true;
                if (on_shell) {
                    std::vector<FieldElement> dir(fs.h, FieldElement::zero(f));
                    for (std::size_t k = 0; k < fs.h; k++)
                        for (std::size_t j = 0; j < kd; j++)
                            dir[k] = dir[k] + K(k, j) * Rat(c[j]);
                    bool good = true;
                    for (std::size_t i = 0; i < fs.t && good; i++) {
                        if (i == ip) continue;
                        FieldElement val = FieldElement::zero(f);
                        for (std::size_t k = 0; k < fs.h; k++)
                            val = val + fs.Psi(i, k) * dir[k];
                        if (val.is_zero()) good = false;
                    }
                    if (good) {
                        for (std::size_t i = 0; i < fs.t; i++) {
                            FieldElement val = FieldElement::zero(f);
                            for (std::size_t k = 0; k < fs.h; k++)
                                val = val + fs.Psi(i, k) * dir[k];
                            ext(i, fs.h + ip) = val;
                        }
                        out.f_vectors.push_back(dir);
                        placed = true;
                        break;
                    }
                }
                // odometer
                std::size_t pos = 0;
                while (pos < kd && c[pos] == radius) { c[pos] = -radius; pos++; }
                if (pos == kd) break;
                c[pos]++;
            }
        }
        if (!placed)
            throw std::logic_error("normal_form_extension: no witness direction found");
    }

    FormSystem extended(ext);
    unsigned s = 0;
    while (s <= fs.t && !verify_normal_form(extended, s)) s++;
    if (s > fs.t)
        throw std::logic_error("normal_form_extension: extension not in normal form");
    out.Psi_prime = std::move(extended);
    out.s = s;
    out.d_prime = fs.h + fs.t;
    return out;
}

// --- pivot selection --------------------------------------------------------------

// m column indices whose square submatrix has the largest |det| (exact
// nonvanishing, numeric magnitude); the workhorse for section slicing.
inline std::vector<std::size_t> pivot_columns_max_det(const FieldMatrix& L)
{
    std::size_t m = L.rows, d = L.cols;
    std::vector<std::size_t> idx(m), best;
    double best_det = -1;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos,
                                                            std::size_t from) {
        if (pos == m) {
            FieldMatrix M(m, m, FieldElement::zero(L.a.front().field()));
            for (std::size_t r = 0; r < m; r++)
                for (std::size_t c = 0; c < m; c++) M(r, c) = L(r, idx[c]);
            FieldElement det = fe_det(M);
            if (det.is_zero()) return;
            double mag = std::abs(det.to_double());
            if (mag > best_det) {
                best_det = mag;
                best = idx;
            }
            return;
        }
        for (std::size_t c = from; c < d; c++) {
            idx[pos] = c;
            rec(pos + 1, c + 1);
        }
    };
    rec(0, 0);
    if (best.empty())
        throw std::logic_error("pivot_columns_max_det: no invertible m x m "
                               "submatrix");
    return best;
}

// --- dual lattice ---------------------------------------------------------------

inline RatMatrix dual_lattice(const RatMatrix& M)
{
    auto inv = rat_inverse(M);
    if (!inv) throw std::domain_error("dual_lattice: singular matrix");
    return inv->transposed();
}

inline FieldMatrix dual_lattice(const FieldMatrix& M)
{
    return fe_inverse(M).transposed();
}

} // namespace primeineq

#endif
