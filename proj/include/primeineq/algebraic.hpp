#ifndef PRIMEINEQ_ALGEBRAIC_HPP
#define PRIMEINEQ_ALGEBRAIC_HPP

// Real algebraic scalars: a number field given by a monic minimal polynomial
// and an isolating interval for one real root, elements as rational vectors
// in the power basis.  Signs, ranks and determinants computed here are exact;
// numeric values come with certified rational enclosures.

#include "matrix.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace primeineq {

// --- polynomials over Q, coefficients ascending, no trailing zeros ---------

using RatPoly = std::vector<Rat>;

inline void poly_trim(RatPoly& p)
{
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

inline int poly_deg(const RatPoly& p) { return int(p.size()) - 1; }

inline RatPoly poly_add(const RatPoly& a, const RatPoly& b)
{
    RatPoly r(std::max(a.size(), b.size()), Rat(0));
    for (std::size_t i = 0; i < a.size(); i++) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); i++) r[i] += b[i];
    poly_trim(r);
    return r;
}

inline RatPoly poly_scale(RatPoly a, const Rat& c)
{
    for (auto& x : a) x *= c;
    poly_trim(a);
    return a;
}

inline RatPoly poly_mul(const RatPoly& a, const RatPoly& b)
{
    if (a.empty() || b.empty()) return {};
    RatPoly r(a.size() + b.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.size(); i++)
        for (std::size_t j = 0; j < b.size(); j++)
            r[i + j] += a[i] * b[j];
    poly_trim(r);
    return r;
}

// quotient/remainder; divisor need not be monic
inline std::pair<RatPoly, RatPoly> poly_divmod(RatPoly a, const RatPoly& b)
{
    if (b.empty()) throw std::invalid_argument("poly_divmod: divide by zero");
    RatPoly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, Rat(0));
    while (a.size() >= b.size()) {
        Rat c = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); i++)
            a[shift + i] -= c * b[i];
        poly_trim(a);
        if (a.size() >= b.size() && sgn(a.back()) == 0)
            throw std::logic_error("poly_divmod: trim failure");
        if (!a.empty() && a.size() >= b.size()) continue;
        break;
    }
    poly_trim(q);
    return {q, a};
}

inline RatPoly poly_derivative(const RatPoly& p)
{
    if (p.size() <= 1) return {};
    RatPoly d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); i++) d[i - 1] = p[i] * Rat(long(i));
    return d;
}

inline Rat poly_eval(const RatPoly& p, const Rat& x)
{
    Rat v(0);
    for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

inline RatInterval poly_eval(const RatPoly& p, const RatInterval& x)
{
    RatInterval v(Rat(0));
    for (std::size_t i = p.size(); i-- > 0;)
        v = v * x + RatInterval(p[i]);
    return v;
}

inline RatPoly poly_gcd(RatPoly a, RatPoly b)
{
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        auto [q, r] = poly_divmod(a, b);
        (void)q;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) a = poly_scale(a, 1 / a.back());
    return a;
}

// extended euclid: returns (g, s, t) with s*a + t*b = g, g monic
inline std::tuple<RatPoly, RatPoly, RatPoly> poly_ext_gcd(RatPoly a, RatPoly b)
{
    RatPoly s0{Rat(1)}, s1{}, t0{}, t1{Rat(1)};
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        auto [q, r] = poly_divmod(a, b);
        RatPoly s2 = poly_add(s0, poly_scale(poly_mul(q, s1), Rat(-1)));
        RatPoly t2 = poly_add(t0, poly_scale(poly_mul(q, t1), Rat(-1)));
        a = std::move(b);
        b = std::move(r);
        s0 = std::move(s1); s1 = std::move(s2);
        t0 = std::move(t1); t1 = std::move(t2);
    }
    if (!a.empty()) {
        Rat lead = a.back();
        a = poly_scale(a, 1 / lead);
        s0 = poly_scale(s0, 1 / lead);
        t0 = poly_scale(t0, 1 / lead);
    }
    return {a, s0, t0};
}

// --- number fields -----------------------------------------------------------

class NumberField;
using FieldPtr = std::shared_ptr<const NumberField>;

class NumberField : public std::enable_shared_from_this<NumberField> {
public:
    RatPoly min_poly;    // monic, degree = degree()
    RatInterval root;    // isolates exactly one real root (verified)
    bool irreducibility_certified = false;

    // for square-root towers: the embedded atoms sqrt(k)
    std::vector<long> atoms;
    std::vector<std::vector<Rat>> atom_coords;

    unsigned degree() const { return unsigned(min_poly.size() - 1); }

    static FieldPtr rationals()
    {
        static FieldPtr q = [] {
            auto f = std::shared_ptr<NumberField>(new NumberField);
            f->min_poly = {Rat(0), Rat(1)}; // x
            f->root = RatInterval(Rat(0));
            f->irreducibility_certified = true;
            f->refined_ = f->root;
            f->build_reduction_rows();
            return FieldPtr(f);
        }();
        return q;
    }

    // User-supplied field.  Verifies the isolating interval by a sign change
    // and rules out the cheap reducibility cases (rational roots, repeated
    // factors); beyond that irreducibility is recorded as trusted.
    static FieldPtr make(RatPoly min_poly, RatInterval root_interval)
    {
        poly_trim(min_poly);
        if (min_poly.size() < 2)
            throw std::invalid_argument("NumberField: constant polynomial");
        if (!(min_poly.back() == Rat(1)))
            min_poly = poly_scale(min_poly, 1 / min_poly.back());

        RatPoly g = poly_gcd(min_poly, poly_derivative(min_poly));
        if (poly_deg(g) > 0)
            throw std::invalid_argument("NumberField: polynomial not squarefree");
        if (min_poly.size() > 2 && has_rational_root(min_poly))
            throw std::invalid_argument("NumberField: polynomial has a rational root");

        auto f = std::shared_ptr<NumberField>(new NumberField);
        f->min_poly = std::move(min_poly);
        f->root = std::move(root_interval);
        // degree <= 3 plus no rational root certifies irreducibility over Q
        f->irreducibility_certified = f->degree() <= 3;
        f->verify_root_isolation();
        f->refined_ = f->root;
        f->build_reduction_rows();
        return f;
    }

    // Refine the cached isolating interval by bisection until width <= eps.
    // Exact rational signs at midpoints; the cache only ever narrows.
    RatInterval root_enclosure(const Rat& eps) const
    {
        std::lock_guard<std::mutex> lk(mu_);
        int guard = 0;
        while (refined_.width() > eps) {
            if (++guard > 100000)
                throw std::logic_error("root_enclosure: refinement cap exceeded");
            Rat mid = refined_.mid();
            int sm = sgn(poly_eval(min_poly, mid));
            if (sm == 0) { // landed exactly on the root
                refined_ = RatInterval(mid);
                break;
            }
            int slo = sgn(poly_eval(min_poly, refined_.lo));
            if (slo == 0) { refined_ = RatInterval(refined_.lo); break; }
            if (sm == slo)
                refined_ = RatInterval(mid, refined_.hi);
            else
                refined_ = RatInterval(refined_.lo, mid);
        }
        return refined_;
    }

    // x^(degree+k) reduced mod min_poly, for k in [0, degree-2]
    const std::vector<std::vector<Rat>>& reduction_rows() const { return red_; }

private:
    NumberField() = default;

    mutable std::mutex mu_;
    mutable RatInterval refined_;
    std::vector<std::vector<Rat>> red_;

    static bool has_rational_root(const RatPoly& p)
    {
        // rational root theorem on the integer-scaled polynomial
        Int lcm(1);
        for (const auto& c : p)
            mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.get_den_mpz_t());
        std::vector<Int> ip(p.size());
        for (std::size_t i = 0; i < p.size(); i++) {
            Rat scaled = p[i] * Rat(lcm);
            ip[i] = scaled.get_num();
        }
        Int a0 = ip.front(), an = ip.back();
        if (sgn(a0) == 0) return true; // root 0
        auto divisors = [](Int n) {
            n = abs(n);
            std::vector<Int> ds;
            for (Int d(1); d * d <= n; d += 1)
                if (sgn(n % d) == 0) { ds.push_back(d); ds.push_back(n / d); }
            return ds;
        };
        // cap the search; huge coefficients mean we fall back to "trusted"
        if (cmp(abs(a0), 100000000) > 0 || cmp(abs(an), 100000000) > 0)
            return false;
        for (const Int& num : divisors(a0))
            for (const Int& den : divisors(an))
                for (int s : {1, -1}) {
                    Rat cand(s * num, den);
                    cand.canonicalize();
                    RatPoly probe = ip_to_poly(ip);
                    if (sgn(poly_eval(probe, cand)) == 0) return true;
                }
        return false;
    }

    static RatPoly ip_to_poly(const std::vector<Int>& ip)
    {
        RatPoly p(ip.size());
        for (std::size_t i = 0; i < ip.size(); i++) p[i] = Rat(ip[i]);
        return p;
    }

    void verify_root_isolation() const
    {
        int slo = sgn(poly_eval(min_poly, root.lo));
        int shi = sgn(poly_eval(min_poly, root.hi));
        if (slo == 0 || shi == 0) {
            // endpoint is the root itself: fine for linear polys only
            if (degree() == 1) return;
            throw std::invalid_argument("NumberField: root interval endpoint is a root");
        }
        if (slo == shi)
            throw std::invalid_argument("NumberField: no sign change on root interval");
    }

    void build_reduction_rows()
    {
        unsigned n = degree();
        red_.clear();
        if (n <= 1) return;
        // x^n = -(c_0 + ... + c_{n-1} x^{n-1})
        std::vector<Rat> cur(n);
        for (unsigned i = 0; i < n; i++) cur[i] = -min_poly[i];
        red_.push_back(cur);
        for (unsigned k = 1; k + 1 < n; k++) {
            std::vector<Rat> nxt(n, Rat(0));
            // multiply by x then reduce
            Rat top = cur[n - 1];
            for (unsigned i = n - 1; i > 0; i--) nxt[i] = cur[i - 1];
            nxt[0] = Rat(0);
            if (sgn(top) != 0)
                for (unsigned i = 0; i < n; i++) nxt[i] += top * red_[0][i];
            red_.push_back(nxt);
            cur = nxt;
        }
    }

    friend FieldPtr field_from_sqrts(std::vector<long> ks, unsigned degree_cap);
};

// --- field elements ---------------------------------------------------------

class FieldElement {
public:
    FieldElement() = default;

    FieldElement(FieldPtr field, std::vector<Rat> coords)
        : field_(std::move(field)), coords_(std::move(coords))
    {
        if (!field_ || coords_.size() != field_->degree())
            throw std::invalid_argument("FieldElement: bad coordinate vector");
    }

    static FieldElement from_rat(const FieldPtr& field, Rat q)
    {
        std::vector<Rat> c(field->degree(), Rat(0));
        c[0] = std::move(q);
        return FieldElement(field, std::move(c));
    }

    static FieldElement zero(const FieldPtr& field) { return from_rat(field, Rat(0)); }
    static FieldElement one(const FieldPtr& field) { return from_rat(field, Rat(1)); }

    const FieldPtr& field() const { return field_; }
    const std::vector<Rat>& coords() const { return coords_; }
    bool valid() const { return bool(field_); }

    bool is_zero() const
    {
        for (const auto& c : coords_)
            if (sgn(c) != 0) return false;
        return true;
    }

    bool is_rational() const
    {
        for (std::size_t i = 1; i < coords_.size(); i++)
            if (sgn(coords_[i]) != 0) return false;
        return true;
    }

    Rat rational_value() const
    {
        if (!is_rational())
            throw std::logic_error("FieldElement: not rational");
        return coords_[0];
    }

    // Certified enclosure of width <= eps.
    RatInterval enclosure(const Rat& eps) const
    {
        if (is_rational()) return RatInterval(coords_[0]);
        Rat w = field_->root.width();
        if (w > Rat(1)) w = Rat(1);
        for (int iter = 0; iter < 2048; iter++) {
            RatInterval x = field_->root_enclosure(w);
            RatInterval v = horner(x);
            if (v.width() <= eps) return v;
            w /= 16;
        }
        throw std::logic_error("FieldElement::enclosure: did not converge");
    }

    double to_double() const
    {
        if (is_rational()) return ::primeineq::to_double(coords_[0]);
        return ::primeineq::to_double(enclosure(pow10_inv(25)).mid());
    }

    // Exact sign.  Bisection refinement terminates because a nonzero element
    // has a nonzero exact value; hitting the cap is a fatal internal error.
    int sign() const
    {
        if (is_zero()) return 0;
        if (is_rational()) return sgn(coords_[0]);
        Rat w = field_->root.width();
        for (int iter = 0; iter < 10000; iter++) {
            RatInterval v = horner(field_->root_enclosure(w));
            int s = v.definite_sign();
            if (s != 0) return s;
            w /= 16;
        }
        throw std::logic_error("fe_sign: refinement cap exceeded on nonzero element");
    }

    FieldElement operator-() const
    {
        std::vector<Rat> c(coords_);
        for (auto& x : c) x = -x;
        return FieldElement(field_, std::move(c));
    }

    FieldElement operator+(const FieldElement& o) const
    {
        auto [a, b] = aligned(*this, o);
        std::vector<Rat> c(a.coords_);
        for (std::size_t i = 0; i < c.size(); i++) c[i] += b.coords_[i];
        return FieldElement(a.field_, std::move(c));
    }

    FieldElement operator-(const FieldElement& o) const { return *this + (-o); }

    FieldElement operator*(const FieldElement& o) const
    {
        auto [a, b] = aligned(*this, o);
        unsigned n = a.field_->degree();
        if (n == 1)
            return from_rat(a.field_, a.coords_[0] * b.coords_[0]);
        std::vector<Rat> prod(2 * n - 1, Rat(0));
        for (unsigned i = 0; i < n; i++) {
            if (sgn(a.coords_[i]) == 0) continue;
            for (unsigned j = 0; j < n; j++)
                prod[i + j] += a.coords_[i] * b.coords_[j];
        }
        const auto& red = a.field_->reduction_rows();
        std::vector<Rat> c(prod.begin(), prod.begin() + n);
        for (unsigned k = 0; k + n < prod.size() + 0; k++) {
            const Rat& coef = prod[n + k];
            if (sgn(coef) == 0) continue;
            for (unsigned i = 0; i < n; i++) c[i] += coef * red[k][i];
        }
        return FieldElement(a.field_, std::move(c));
    }

    FieldElement inverse() const
    {
        if (is_zero()) throw std::domain_error("FieldElement: division by zero");
        if (is_rational())
            return from_rat(field_, 1 / coords_[0]);
        RatPoly a(coords_);
        poly_trim(a);
        auto [g, s, t] = poly_ext_gcd(a, field_->min_poly);
        (void)t;
        if (poly_deg(g) != 0)
            throw std::logic_error("FieldElement::inverse: min_poly not coprime "
                                   "(reducible polynomial?)");
        // s * a == g (deg 0) mod min_poly; normalize g to 1
        RatPoly inv = poly_scale(s, 1 / g[0]);
        auto [q, r] = poly_divmod(inv, field_->min_poly);
        (void)q;
        std::vector<Rat> c(field_->degree(), Rat(0));
        for (std::size_t i = 0; i < r.size(); i++) c[i] = r[i];
        return FieldElement(field_, std::move(c));
    }

    FieldElement operator/(const FieldElement& o) const { return *this * o.inverse(); }

    FieldElement operator*(const Rat& q) const
    {
        std::vector<Rat> c(coords_);
        for (auto& x : c) x *= q;
        return FieldElement(field_, std::move(c));
    }

    bool operator==(const FieldElement& o) const { return (*this - o).is_zero(); }

    std::string str() const
    {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < coords_.size(); i++)
            os << (i ? "," : "") << coords_[i].get_str();
        os << "]";
        return os.str();
    }

private:
    FieldPtr field_;
    std::vector<Rat> coords_;

    RatInterval horner(const RatInterval& x) const
    {
        RatInterval v(Rat(0));
        for (std::size_t i = coords_.size(); i-- > 0;)
            v = v * x + RatInterval(coords_[i]);
        return v;
    }

    // promote degree-1 elements into the other operand's field
    static std::pair<FieldElement, FieldElement> aligned(const FieldElement& a,
                                                         const FieldElement& b)
    {
        if (a.field_ == b.field_) return {a, b};
        if (a.field_->degree() == 1)
            return {from_rat(b.field_, a.coords_[0]), b};
        if (b.field_->degree() == 1)
            return {a, from_rat(a.field_, b.coords_[0])};
        throw std::invalid_argument("FieldElement: field mismatch");
    }
};

inline int fe_sign(const FieldElement& e) { return e.sign(); }
inline bool is_zero(const FieldElement& e) { return e.is_zero(); }

// --- compositum of square roots ----------------------------------------------

// Q(sqrt k_1, ..., sqrt k_t) with a primitive element alpha = sum c_i sqrt k_i.
// Elements are manipulated in the multiquadratic basis {prod_{i in S} sqrt k_i}
// while the field is being built, then everything is re-expressed in the
// power basis of alpha.
inline FieldPtr field_from_sqrts(std::vector<long> ks, unsigned degree_cap = 64)
{
    std::sort(ks.begin(), ks.end());
    for (std::size_t i = 0; i < ks.size(); i++) {
        long k = ks[i];
        if (k <= 1)
            throw std::invalid_argument("field_from_sqrts: arguments must be >= 2");
        if (i && ks[i] == ks[i - 1])
            throw std::invalid_argument("field_from_sqrts: duplicate argument");
        for (long d = 2; d * d <= k; d++)
            if (k % (d * d) == 0)
                throw std::invalid_argument("field_from_sqrts: argument not squarefree");
    }
    unsigned t = unsigned(ks.size());
    if (t == 0) return NumberField::rationals();
    if ((1ull << t) > degree_cap)
        throw std::invalid_argument("field_from_sqrts: degree cap exceeded");
    std::size_t D = std::size_t(1) << t;

    using MQ = std::vector<Rat>; // indexed by subset mask
    auto mq_mul = [&](const MQ& u, const MQ& v) {
        MQ r(D, Rat(0));
        for (std::size_t S = 0; S < D; S++) {
            if (sgn(u[S]) == 0) continue;
            for (std::size_t T = 0; T < D; T++) {
                if (sgn(v[T]) == 0) continue;
                long square = 1;
                std::size_t both = S & T;
                for (unsigned i = 0; i < t; i++)
                    if (both & (std::size_t(1) << i)) square *= ks[i];
                r[S ^ T] += u[S] * v[T] * Rat(square);
            }
        }
        return r;
    };

    // search for a primitive combination; (1,...,1) works for distinct
    // squarefree k_i, the loop is a safety net
    for (long stride = 1; stride <= 8; stride++) {
        MQ alpha(D, Rat(0));
        std::vector<long> weights(t);
        for (unsigned i = 0; i < t; i++) {
            weights[i] = 1 + (stride - 1) * long(i);
            alpha[std::size_t(1) << i] = Rat(weights[i]);
        }

        // powers alpha^0 .. alpha^D in the multiquadratic basis
        std::vector<MQ> pw(D + 1, MQ(D, Rat(0)));
        pw[0][0] = 1;
        for (std::size_t j = 1; j <= D; j++) pw[j] = mq_mul(pw[j - 1], alpha);

        // primitivity: alpha^0..alpha^{D-1} must be independent
        RatMatrix P(D, D);
        for (std::size_t j = 0; j < D; j++)
            for (std::size_t S = 0; S < D; S++) P(S, j) = pw[j][S];
        if (rat_rank(P) != D) continue;

        // min poly: alpha^D = sum_j x_j alpha^j
        RatMatrix Aug(D, D + 1);
        for (std::size_t S = 0; S < D; S++) {
            for (std::size_t j = 0; j < D; j++) Aug(S, j) = pw[j][S];
            Aug(S, D) = pw[D][S];
        }
        rref(Aug);
        RatPoly mp(D + 1, Rat(0));
        mp[D] = 1;
        for (std::size_t j = 0; j < D; j++) mp[j] = -Aug(j, D);

        auto f = std::shared_ptr<NumberField>(new NumberField);
        f->min_poly = mp;

        // isolating interval around the numeric value of alpha; conjugates
        // differ by at least 2*sqrt(k_min), so +-1/4 isolates
        double av = 0;
        for (unsigned i = 0; i < t; i++) av += weights[i] * std::sqrt(double(ks[i]));
        Rat center = rat_from_double(av);
        f->root = RatInterval(center - make_rat(1, 4), center + make_rat(1, 4));
        f->irreducibility_certified = true; // primitive element of a genuine field
        f->verify_root_isolation();
        f->refined_ = f->root;
        f->build_reduction_rows();

        // express each sqrt(k_i) in the power basis: solve P y = e_{1<<i}
        f->atoms.assign(ks.begin(), ks.end());
        for (unsigned i = 0; i < t; i++) {
            RatMatrix Sys(D, D + 1);
            for (std::size_t S = 0; S < D; S++) {
                for (std::size_t j = 0; j < D; j++) Sys(S, j) = pw[j][S];
                Sys(S, D) = (S == (std::size_t(1) << i)) ? Rat(1) : Rat(0);
            }
            rref(Sys);
            std::vector<Rat> y(D);
            for (std::size_t j = 0; j < D; j++) y[j] = Sys(j, D);
            f->atom_coords.push_back(std::move(y));
        }
        return f;
    }
    throw std::logic_error("field_from_sqrts: no primitive element found");
}

inline FieldElement sqrt_embedding(const FieldPtr& f, long k)
{
    for (std::size_t i = 0; i < f->atoms.size(); i++)
        if (f->atoms[i] == k) return FieldElement(f, f->atom_coords[i]);
    throw std::invalid_argument("sqrt_embedding: atom not in field");
}

// --- textual scalar syntax ----------------------------------------------------
//
//   scalar  := term (('+'|'-') term)*
//   term    := coef | coef '*' atom | atom
//   atom    := 'sqrt' INT
//   coef    := rational literal ("3", "-3/7", "0.25")
//
// sqrt arguments are normalized to squarefree form (sqrt12 -> 2*sqrt3).

struct ParsedScalar {
    Rat rational_part;
    std::map<long, Rat> surd_part; // squarefree k -> coefficient of sqrt(k)
};

namespace detail {
inline void parse_scalar_term(const std::string& tok, ParsedScalar& out, int sign_)
{
    std::string body = tok;
    Rat coef(sign_);
    auto star = body.find('*');
    if (star != std::string::npos) {
        coef *= parse_rat(body.substr(0, star));
        body = body.substr(star + 1);
    }
    if (body.rfind("sqrt", 0) == 0) {
        long k = std::stol(body.substr(4));
        if (k < 0)
            throw std::invalid_argument("scalar parser: sqrt of negative");
        if (k == 0) return;         // sqrt0 == 0
        long sq = 1;
        for (long d = 2; d * d <= k; d++)
            while (k % (d * d) == 0) { k /= d * d; sq *= d; }
        coef *= Rat(sq);
        if (k == 1)
            out.rational_part += coef;
        else
            out.surd_part[k] += coef;
    } else {
        if (star != std::string::npos)
            throw std::invalid_argument("scalar parser: '*' without surd in '" + tok + "'");
        out.rational_part += coef * parse_rat(body);
    }
}
} // namespace detail

inline ParsedScalar parse_scalar(const std::string& text)
{
    ParsedScalar out;
    out.rational_part = 0;
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty())
        throw std::invalid_argument("scalar parser: empty scalar");
    std::size_t pos = 0;
    int sign_ = 1;
    if (s[0] == '+' || s[0] == '-') {
        sign_ = s[0] == '-' ? -1 : 1;
        pos = 1;
    }
    std::size_t start = pos;
    for (; pos <= s.size(); pos++) {
        if (pos == s.size() || s[pos] == '+' || s[pos] == '-') {
            if (pos == start)
                throw std::invalid_argument("scalar parser: empty term in '" + text + "'");
            detail::parse_scalar_term(s.substr(start, pos - start), out, sign_);
            if (pos < s.size()) sign_ = s[pos] == '-' ? -1 : 1;
            start = pos + 1;
        }
    }
    for (auto it = out.surd_part.begin(); it != out.surd_part.end();)
        it = sgn(it->second) == 0 ? out.surd_part.erase(it) : std::next(it);
    return out;
}

// field containing every surd that appears in a batch of parsed scalars
inline FieldPtr field_for_scalars(const std::vector<ParsedScalar>& scalars,
                                  unsigned degree_cap = 64)
{
    std::vector<long> ks;
    for (const auto& s : scalars)
        for (const auto& [k, c] : s.surd_part) {
            (void)c;
            if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
        }
    if (ks.empty()) return NumberField::rationals();
    return field_from_sqrts(ks, degree_cap);
}

inline FieldElement embed_scalar(const FieldPtr& f, const ParsedScalar& s)
{
    FieldElement e = FieldElement::from_rat(f, s.rational_part);
    for (const auto& [k, c] : s.surd_part)
        e = e + sqrt_embedding(f, k) * c;
    return e;
}

// --- exact linear algebra over a field -----------------------------------------

using FieldMatrix = Matrix<FieldElement>;

inline FieldMatrix fe_matrix_from_rat(const FieldPtr& f, const RatMatrix& A)
{
    FieldMatrix M(A.rows, A.cols, FieldElement::zero(f));
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t j = 0; j < A.cols; j++)
            M(i, j) = FieldElement::from_rat(f, A(i, j));
    return M;
}

inline FieldMatrix fe_mat_mul(const FieldMatrix& A, const FieldMatrix& B)
{
    if (A.cols != B.rows)
        throw std::invalid_argument("fe_mat_mul: dimension mismatch");
    const FieldPtr& f = A.a.empty() ? B.a.front().field() : A.a.front().field();
    FieldMatrix C(A.rows, B.cols, FieldElement::zero(f));
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t k = 0; k < A.cols; k++) {
            if (A(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < B.cols; j++)
                C(i, j) = C(i, j) + A(i, k) * B(k, j);
        }
    return C;
}

// rank over the reals, by Gaussian elimination with exact sign pivoting
inline std::size_t exact_rank(FieldMatrix M)
{
    std::size_t rank = 0;
    for (std::size_t col = 0; col < M.cols && rank < M.rows; col++) {
        std::size_t piv = M.rows;
        for (std::size_t i = rank; i < M.rows; i++)
            if (!M(i, col).is_zero()) { piv = i; break; }
        if (piv == M.rows) continue;
        M.swap_rows(rank, piv);
        FieldElement inv = M(rank, col).inverse();
        for (std::size_t i = rank + 1; i < M.rows; i++) {
            if (M(i, col).is_zero()) continue;
            FieldElement factor = M(i, col) * inv;
            for (std::size_t j = col; j < M.cols; j++)
                M(i, j) = M(i, j) - factor * M(rank, j);
        }
        rank++;
    }
    return rank;
}

inline FieldElement fe_det(FieldMatrix M)
{
    if (M.rows != M.cols) throw std::invalid_argument("fe_det: not square");
    const FieldPtr f = M.a.front().field();
    FieldElement det = FieldElement::one(f);
    std::size_t n = M.rows;
    for (std::size_t col = 0; col < n; col++) {
        std::size_t piv = n;
        for (std::size_t i = col; i < n; i++)
            if (!M(i, col).is_zero()) { piv = i; break; }
        if (piv == n) return FieldElement::zero(f);
        if (piv != col) { M.swap_rows(col, piv); det = -det; }
        det = det * M(col, col);
        FieldElement inv = M(col, col).inverse();
        for (std::size_t i = col + 1; i < n; i++) {
            if (M(i, col).is_zero()) continue;
            FieldElement factor = M(i, col) * inv;
            for (std::size_t j = col; j < n; j++)
                M(i, j) = M(i, j) - factor * M(col, j);
        }
    }
    return det;
}

// basis (columns) of {x : Mx = 0} over the field
inline FieldMatrix fe_kernel(FieldMatrix M)
{
    const FieldPtr f = M.a.empty() ? NumberField::rationals() : M.a.front().field();
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < M.cols && row < M.rows; col++) {
        std::size_t piv = M.rows;
        for (std::size_t i = row; i < M.rows; i++)
            if (!M(i, col).is_zero()) { piv = i; break; }
        if (piv == M.rows) continue;
        M.swap_rows(row, piv);
        FieldElement inv = M(row, col).inverse();
        for (std::size_t j = col; j < M.cols; j++)
            M(row, j) = M(row, j) * inv;
        for (std::size_t i = 0; i < M.rows; i++) {
            if (i == row || M(i, col).is_zero()) continue;
            FieldElement factor = M(i, col);
            for (std::size_t j = col; j < M.cols; j++)
                M(i, j) = M(i, j) - factor * M(row, j);
        }
        pivots.push_back(col);
        row++;
    }
    std::vector<bool> is_pivot(M.cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    FieldMatrix K(M.cols, M.cols - pivots.size(), FieldElement::zero(f));
    std::size_t idx = 0;
    for (std::size_t j = 0; j < M.cols; j++) {
        if (is_pivot[j]) continue;
        K(j, idx) = FieldElement::one(f);
        for (std::size_t r = 0; r < pivots.size(); r++)
            K(pivots[r], idx) = -M(r, j);
        idx++;
    }
    return K;
}

inline FieldMatrix fe_inverse(const FieldMatrix& A)
{
    if (A.rows != A.cols) throw std::invalid_argument("fe_inverse: not square");
    const FieldPtr f = A.a.front().field();
    std::size_t n = A.rows;
    FieldMatrix M(n, 2 * n, FieldElement::zero(f));
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) M(i, j) = A(i, j);
        M(i, n + i) = FieldElement::one(f);
    }
    std::size_t row = 0;
    for (std::size_t col = 0; col < n; col++) {
        std::size_t piv = n;
        for (std::size_t i = row; i < n; i++)
            if (!M(i, col).is_zero()) { piv = i; break; }
        if (piv == n) throw std::domain_error("fe_inverse: singular matrix");
        M.swap_rows(row, piv);
        FieldElement inv = M(row, col).inverse();
        for (std::size_t j = 0; j < 2 * n; j++) M(row, j) = M(row, j) * inv;
        for (std::size_t i = 0; i < n; i++) {
            if (i == row || M(i, col).is_zero()) continue;
            FieldElement factor = M(i, col);
            for (std::size_t j = 0; j < 2 * n; j++)
                M(i, j) = M(i, j) - factor * M(row, j);
        }
        row++;
    }
    FieldMatrix Inv(n, n, FieldElement::zero(f));
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < n; j++) Inv(i, j) = M(i, n + j);
    return Inv;
}

inline Matrix<double> fe_to_double(const FieldMatrix& A)
{
    Matrix<double> D(A.rows, A.cols, 0.0);
    for (std::size_t i = 0; i < A.a.size(); i++) D.a[i] = A.a[i].to_double();
    return D;
}

} // namespace primeineq

#endif
