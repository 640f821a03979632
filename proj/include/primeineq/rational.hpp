#ifndef PRIMEINEQ_RATIONAL_HPP
#define PRIMEINEQ_RATIONAL_HPP

// Exact integer/rational scalars and rational interval arithmetic.
// Everything downstream that claims exactness (sign tests, ranks, lattice
// normal forms, local densities) bottoms out here.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace primeineq {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1)
{
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// mpz_class has no long long constructor; on LP64 long is wide enough
inline Int int_of(long long v) { return Int(static_cast<long>(v)); }

// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_from_double(double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("rat_from_double: non-finite value");
    Rat q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

inline double to_double(const Rat& q) { return q.get_d(); }

inline int sgn(const Rat& q) { return mpq_sgn(q.get_mpq_t()); }
inline int sgn(const Int& z) { return mpz_sgn(z.get_mpz_t()); }

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline Int floor_div(const Int& a, const Int& b)
{
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Int rat_floor(const Rat& q)
{
    Int z;
    mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return z;
}

inline Int rat_ceil(const Rat& q)
{
    Int z;
    mpz_cdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return z;
}

// Closed interval with rational endpoints.  All operations give exact
// enclosures; there is no rounding anywhere.
struct RatInterval {
    Rat lo, hi;

    RatInterval() : lo(0), hi(0) {}
    RatInterval(Rat point) : lo(point), hi(point) {}
    RatInterval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h))
    {
        if (lo > hi)
            throw std::invalid_argument("RatInterval: lo > hi");
    }

    Rat width() const { return hi - lo; }
    Rat mid() const { return (lo + hi) / 2; }
    bool contains(const Rat& q) const { return lo <= q && q <= hi; }
    bool contains_zero() const { return sgn(lo) <= 0 && sgn(hi) >= 0; }

    // Sign if the interval determines it, 0 if zero is (possibly) inside.
    int definite_sign() const
    {
        if (sgn(lo) > 0) return 1;
        if (sgn(hi) < 0) return -1;
        return 0;
    }

    RatInterval operator-() const { return RatInterval(-hi, -lo); }

    RatInterval operator+(const RatInterval& o) const
    {
        return RatInterval(lo + o.lo, hi + o.hi);
    }
    RatInterval operator-(const RatInterval& o) const
    {
        return RatInterval(lo - o.hi, hi - o.lo);
    }
    RatInterval operator*(const RatInterval& o) const
    {
        Rat a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
        Rat mn = a, mx = a;
        for (const Rat* t : {&b, &c, &d}) {
            if (*t < mn) mn = *t;
            if (*t > mx) mx = *t;
        }
        return RatInterval(mn, mx);
    }
    RatInterval operator*(const Rat& q) const
    {
        return q >= 0 ? RatInterval(lo * q, hi * q) : RatInterval(hi * q, lo * q);
    }
    RatInterval& operator+=(const RatInterval& o) { *this = *this + o; return *this; }
};

// pow(10, -k) as an exact rational, used for precision targets.
inline Rat pow10_inv(unsigned k)
{
    Int d;
    mpz_ui_pow_ui(d.get_mpz_t(), 10, k);
    return Rat(Int(1), d);
}

// --- rational literal parsing -------------------------------------------

// Accepts "7", "-3/4", "0.25", "-1.5e2"-free (no exponents; config files
// are hand-written).  Throws std::invalid_argument on junk.
inline Rat parse_rat(const std::string& s)
{
    if (s.empty())
        throw std::invalid_argument("parse_rat: empty string");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rat q;
        if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
            throw std::invalid_argument("parse_rat: bad rational '" + s + "'");
        if (sgn(Rat(Int(q.get_den()), 1)) == 0)
            throw std::invalid_argument("parse_rat: zero denominator '" + s + "'");
        q.canonicalize();
        return q;
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        Int z;
        if (mpz_set_str(z.get_mpz_t(), s.c_str(), 10) != 0)
            throw std::invalid_argument("parse_rat: bad integer '" + s + "'");
        return Rat(z);
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac_len = s.size() - dot - 1;
    if (frac_len == 0 || digits.empty() || digits == "-" || digits == "+")
        throw std::invalid_argument("parse_rat: bad decimal '" + s + "'");
    Int num;
    if (mpz_set_str(num.get_mpz_t(), digits.c_str(), 10) != 0)
        throw std::invalid_argument("parse_rat: bad decimal '" + s + "'");
    Int den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// --- misc shared utilities ----------------------------------------------

// splitmix64: the deterministic seed expander used by every randomized
// component (quadrature scrambles, property-test generators).
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state)
{
    return double(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Pairwise (cascade) summation; deterministic and far more accurate than a
// running sum on the long weighted sums in counter/quad.
inline double pairwise_sum(const double* v, std::size_t n)
{
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; i++) s += v[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v)
{
    return pairwise_sum(v.data(), v.size());
}

} // namespace primeineq

#endif
