#ifndef PRIMEINEQ_MATRIX_HPP
#define PRIMEINEQ_MATRIX_HPP

// Dense matrices over exact scalars, plus the integer lattice algorithms
// (Hermite and Smith normal forms) that the reduction pipeline leans on.

#include "rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>

namespace primeineq {

template <class T>
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<T> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, const T& fill = T())
        : rows(r), cols(c), a(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Matrix identity(std::size_t n, const T& one, const T& zero)
    {
        Matrix m(n, n, zero);
        for (std::size_t i = 0; i < n; i++) m(i, i) = one;
        return m;
    }

    Matrix transposed() const
    {
        Matrix t(cols, rows, a.empty() ? T() : a[0]);
        for (std::size_t i = 0; i < rows; i++)
            for (std::size_t j = 0; j < cols; j++)
                t(j, i) = (*this)(i, j);
        return t;
    }

    void swap_rows(std::size_t i, std::size_t k)
    {
        if (i == k) return;
        for (std::size_t j = 0; j < cols; j++)
            std::swap((*this)(i, j), (*this)(k, j));
    }
    void swap_cols(std::size_t j, std::size_t k)
    {
        if (j == k) return;
        for (std::size_t i = 0; i < rows; i++)
            std::swap((*this)(i, j), (*this)(i, k));
    }

    std::vector<T> col(std::size_t j) const
    {
        std::vector<T> v;
        v.reserve(rows);
        for (std::size_t i = 0; i < rows; i++) v.push_back((*this)(i, j));
        return v;
    }

    bool operator==(const Matrix& o) const
    {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

using IntMatrix = Matrix<Int>;
using RatMatrix = Matrix<Rat>;

template <class T>
Matrix<T> mat_mul(const Matrix<T>& A, const Matrix<T>& B)
{
    if (A.cols != B.rows)
        throw std::invalid_argument("mat_mul: dimension mismatch");
    Matrix<T> C(A.rows, B.cols, T());
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t k = 0; k < A.cols; k++) {
            const T& aik = A(i, k);
            if (aik == T()) continue;
            for (std::size_t j = 0; j < B.cols; j++)
                C(i, j) += aik * B(k, j);
        }
    return C;
}

template <class T>
std::vector<T> mat_vec(const Matrix<T>& A, const std::vector<T>& x)
{
    if (A.cols != x.size())
        throw std::invalid_argument("mat_vec: dimension mismatch");
    std::vector<T> y(A.rows, T());
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t j = 0; j < A.cols; j++)
            y[i] += A(i, j) * x[j];
    return y;
}

inline RatMatrix to_rat(const IntMatrix& A)
{
    RatMatrix B(A.rows, A.cols);
    for (std::size_t i = 0; i < A.a.size(); i++) B.a[i] = Rat(A.a[i]);
    return B;
}

// --- rational Gaussian elimination ----------------------------------------

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(RatMatrix& M)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < M.cols && row < M.rows; col++) {
        std::size_t piv = row;
        while (piv < M.rows && sgn(M(piv, col)) == 0) piv++;
        if (piv == M.rows) continue;
        M.swap_rows(row, piv);
        Rat inv = 1 / M(row, col);
        for (std::size_t j = col; j < M.cols; j++) M(row, j) *= inv;
        for (std::size_t i = 0; i < M.rows; i++) {
            if (i == row || sgn(M(i, col)) == 0) continue;
            Rat f = M(i, col);
            for (std::size_t j = col; j < M.cols; j++)
                M(i, j) -= f * M(row, j);
        }
        pivots.push_back(col);
        row++;
    }
    return pivots;
}

inline std::size_t rat_rank(RatMatrix M) { return rref(M).size(); }

// Basis of {x : Mx = 0} as columns, from the RREF (canonical, deterministic).
inline RatMatrix rat_kernel(RatMatrix M)
{
    auto pivots = rref(M);
    std::vector<bool> is_pivot(M.cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::size_t k = M.cols - pivots.size();
    RatMatrix K(M.cols, k);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < M.cols; j++) {
        if (is_pivot[j]) continue;
        K(j, idx) = 1;
        for (std::size_t r = 0; r < pivots.size(); r++)
            K(pivots[r], idx) = -M(r, j);
        idx++;
    }
    return K;
}

inline std::optional<RatMatrix> rat_inverse(const RatMatrix& A)
{
    if (A.rows != A.cols)
        throw std::invalid_argument("rat_inverse: not square");
    std::size_t n = A.rows;
    RatMatrix M(n, 2 * n);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) M(i, j) = A(i, j);
        M(i, n + i) = 1;
    }
    auto piv = rref(M);
    if (piv.size() != n || piv.back() != n - 1) {
        // need pivots exactly in the first n columns
        for (std::size_t i = 0; i < piv.size(); i++)
            if (piv[i] != i) return std::nullopt;
        if (piv.size() != n) return std::nullopt;
    }
    RatMatrix Inv(n, n);
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < n; j++) Inv(i, j) = M(i, n + j);
    return Inv;
}

inline Rat rat_det(RatMatrix M)
{
    if (M.rows != M.cols)
        throw std::invalid_argument("rat_det: not square");
    Rat det(1);
    std::size_t n = M.rows;
    for (std::size_t col = 0; col < n; col++) {
        std::size_t piv = col;
        while (piv < n && sgn(M(piv, col)) == 0) piv++;
        if (piv == n) return Rat(0);
        if (piv != col) { M.swap_rows(col, piv); det = -det; }
        det *= M(col, col);
        Rat inv = 1 / M(col, col);
        for (std::size_t i = col + 1; i < n; i++) {
            if (sgn(M(i, col)) == 0) continue;
            Rat f = M(i, col) * inv;
            for (std::size_t j = col; j < n; j++)
                M(i, j) -= f * M(col, j);
        }
    }
    return det;
}

// --- Hermite normal form ---------------------------------------------------

struct HnfResult {
    IntMatrix H; // U*A = H (row form) or A*U = H (column form)
    IntMatrix U; // unimodular
};

// Row-style HNF: U*A = H, H in row echelon form with positive pivots and
// entries above each pivot reduced into [0, pivot).
inline HnfResult hnf_row(const IntMatrix& A)
{
    IntMatrix H = A;
    IntMatrix U = IntMatrix::identity(A.rows, Int(1), Int(0));
    std::size_t row = 0;
    for (std::size_t col = 0; col < H.cols && row < H.rows; col++) {
        // clear the column below `row` by gcd-style reduction
        for (;;) {
            std::size_t best = H.rows;
            for (std::size_t i = row; i < H.rows; i++) {
                if (sgn(H(i, col)) == 0) continue;
                if (best == H.rows ||
                    cmp(abs(H(i, col)), abs(H(best, col))) < 0)
                    best = i;
            }
            if (best == H.rows) break;
            H.swap_rows(row, best);
            U.swap_rows(row, best);
            bool clean = true;
            for (std::size_t i = row + 1; i < H.rows; i++) {
                if (sgn(H(i, col)) == 0) continue;
                Int q = floor_div(H(i, col), H(row, col));
                if (sgn(q) != 0) {
                    for (std::size_t j = 0; j < H.cols; j++)
                        H(i, j) -= q * H(row, j);
                    for (std::size_t j = 0; j < U.cols; j++)
                        U(i, j) -= q * U(row, j);
                }
                if (sgn(H(i, col)) != 0) clean = false;
            }
            if (clean) break;
        }
        if (sgn(H(row, col)) == 0) continue;
        if (sgn(H(row, col)) < 0) {
            for (std::size_t j = 0; j < H.cols; j++) H(row, j) = -H(row, j);
            for (std::size_t j = 0; j < U.cols; j++) U(row, j) = -U(row, j);
        }
        for (std::size_t i = 0; i < row; i++) {
            Int q = floor_div(H(i, col), H(row, col));
            if (sgn(q) == 0) continue;
            for (std::size_t j = 0; j < H.cols; j++)
                H(i, j) -= q * H(row, j);
            for (std::size_t j = 0; j < U.cols; j++)
                U(i, j) -= q * U(row, j);
        }
        row++;
    }
    return {H, U};
}

// Column-style HNF: A*U = H.
// the columns of H are a canonical basis of the column lattice of A.
inline HnfResult hnf_col(const IntMatrix& A)
{
    HnfResult r = hnf_row(A.transposed());
    return {r.H.transposed(), r.U.transposed()};
}

// Canonical basis of the lattice spanned by the columns of A: column HNF
// with zero columns dropped.  Two generating sets span the same lattice
// iff these agree.
inline IntMatrix lattice_canonical(const IntMatrix& A)
{
    IntMatrix H = hnf_col(A).H;
    std::size_t nz = 0;
    for (std::size_t j = 0; j < H.cols; j++) {
        bool zero = true;
        for (std::size_t i = 0; i < H.rows; i++)
            if (sgn(H(i, j)) != 0) { zero = false; break; }
        if (!zero) nz++;
    }
    IntMatrix B(H.rows, nz);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < H.cols; j++) {
        bool zero = true;
        for (std::size_t i = 0; i < H.rows; i++)
            if (sgn(H(i, j)) != 0) { zero = false; break; }
        if (zero) continue;
        for (std::size_t i = 0; i < H.rows; i++) B(i, idx) = H(i, j);
        idx++;
    }
    return B;
}

inline bool same_column_lattice(const IntMatrix& A, const IntMatrix& B)
{
    if (A.rows != B.rows) return false;
    return lattice_canonical(A) == lattice_canonical(B);
}

// --- Smith normal form ------------------------------------------------------

struct SnfResult {
    IntMatrix S, U, V; // U*A*V = S, S diagonal with d1 | d2 | ...
};

inline SnfResult snf(const IntMatrix& A)
{
    IntMatrix S = A;
    IntMatrix U = IntMatrix::identity(A.rows, Int(1), Int(0));
    IntMatrix V = IntMatrix::identity(A.cols, Int(1), Int(0));
    std::size_t n = std::min(A.rows, A.cols);

    for (std::size_t t = 0; t < n; t++) {
        // locate a nonzero entry in the trailing block
        std::size_t pi = S.rows, pj = S.cols;
        for (std::size_t i = t; i < S.rows; i++)
            for (std::size_t j = t; j < S.cols; j++)
                if (sgn(S(i, j)) != 0 &&
                    (pi == S.rows || cmp(abs(S(i, j)), abs(S(pi, pj))) < 0)) {
                    pi = i;
                    pj = j;
                }
        if (pi == S.rows) break;
        S.swap_rows(t, pi); U.swap_rows(t, pi);
        S.swap_cols(t, pj); V.swap_cols(t, pj);

        for (;;) {
            bool again = false;
            for (std::size_t i = t + 1; i < S.rows; i++) {
                if (sgn(S(i, t)) == 0) continue;
                Int q = floor_div(S(i, t), S(t, t));
                for (std::size_t j = 0; j < S.cols; j++) S(i, j) -= q * S(t, j);
                for (std::size_t j = 0; j < U.cols; j++) U(i, j) -= q * U(t, j);
                if (sgn(S(i, t)) != 0) {
                    S.swap_rows(t, i); U.swap_rows(t, i);
                    again = true;
                }
            }
            for (std::size_t j = t + 1; j < S.cols; j++) {
                if (sgn(S(t, j)) == 0) continue;
                Int q = floor_div(S(t, j), S(t, t));
                for (std::size_t i = 0; i < S.rows; i++) S(i, j) -= q * S(i, t);
                for (std::size_t i = 0; i < V.rows; i++) V(i, j) -= q * V(i, t);
                if (sgn(S(t, j)) != 0) {
                    S.swap_cols(t, j); V.swap_cols(t, j);
                    again = true;
                }
            }
            if (again) continue;

            // enforce divisibility of the trailing block by S(t,t)
            bool fixed = true;
            for (std::size_t i = t + 1; i < S.rows && fixed; i++)
                for (std::size_t j = t + 1; j < S.cols && fixed; j++)
                    if (sgn(S(i, j) % S(t, t)) != 0) {
                        for (std::size_t jj = 0; jj < S.cols; jj++)
                            S(t, jj) += S(i, jj);
                        for (std::size_t jj = 0; jj < U.cols; jj++)
                            U(t, jj) += U(i, jj);
                        fixed = false;
                    }
            if (fixed) break;
        }
        if (sgn(S(t, t)) < 0) {
            for (std::size_t j = 0; j < S.cols; j++) S(t, j) = -S(t, j);
            for (std::size_t j = 0; j < U.cols; j++) U(t, j) = -U(t, j);
        }
    }
    return {S, U, V};
}

// Basis (as columns) of the saturated kernel lattice {x in Z^c : Ax = 0}.
inline IntMatrix kernel_lattice(const IntMatrix& A)
{
    SnfResult s = snf(A);
    std::size_t n = std::min(A.rows, A.cols);
    std::size_t rank = 0;
    while (rank < n && sgn(s.S(rank, rank)) != 0) rank++;
    IntMatrix K(A.cols, A.cols - rank);
    for (std::size_t j = rank; j < A.cols; j++)
        for (std::size_t i = 0; i < A.cols; i++)
            K(i, j - rank) = s.V(i, j);
    return K;
}

inline Int int_det(const IntMatrix& A)
{
    Rat d = rat_det(to_rat(A));
    return d.get_num(); // denominator is 1 for integer input
}

// Particular integer solution of A x = b, if one exists.
inline std::optional<std::vector<Int>> solve_integer(const IntMatrix& A,
                                                     const std::vector<Int>& b)
{
    if (b.size() != A.rows)
        throw std::invalid_argument("solve_integer: dimension mismatch");
    SnfResult s = snf(A);
    std::vector<Int> ub(A.rows, Int(0));
    for (std::size_t i = 0; i < A.rows; i++)
        for (std::size_t j = 0; j < A.rows; j++)
            ub[i] += s.U(i, j) * b[j];
    std::size_t n = std::min(A.rows, A.cols);
    std::vector<Int> y(A.cols, Int(0));
    for (std::size_t i = 0; i < A.rows; i++) {
        if (i < n && sgn(s.S(i, i)) != 0) {
            if (sgn(ub[i] % s.S(i, i)) != 0) return std::nullopt;
            y[i] = ub[i] / s.S(i, i);
        } else if (sgn(ub[i]) != 0) {
            return std::nullopt;
        }
    }
    std::vector<Int> x(A.cols, Int(0));
    for (std::size_t i = 0; i < A.cols; i++)
        for (std::size_t j = 0; j < A.cols; j++)
            x[i] += s.V(i, j) * y[j];
    return x;
}

} // namespace primeineq

#endif
