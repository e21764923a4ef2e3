#pragma once

// Exact arithmetic on 2x2 integral and half-integral symmetric matrices,
// GL(2,Z) reduction theory, automorphism / representation counting and
// elementary divisors.
//
// Convention used everywhere (CLI, JSON, code): a half-integral form is the
// integer triple (a, b, c) with b = 2 * (off-diagonal entry), i.e. the matrix
//
//     [[a, b/2], [b/2, c]],      A[x] = a x1^2 + b x1 x2 + c x2^2.
//
// A[x] is therefore always an integer, and det = (4ac - b^2) / 4.

#include <array>
#include <compare>
#include <iosfwd>
#include <string>
#include <vector>

#include "siegel/errors.hpp"
#include "siegel/rational.hpp"

namespace siegel {

using Vec2 = std::array<i64, 2>;

/// Plain 2x2 integer matrix [[a, b], [c, d]].
struct Mat2 {
    i64 a = 1, b = 0, c = 0, d = 1;

    static constexpr Mat2 identity() { return {1, 0, 0, 1}; }
    static constexpr Mat2 diag(i64 x, i64 y) { return {x, 0, 0, y}; }

    i64 det() const { return narrow_i64(static_cast<i128>(a) * d - static_cast<i128>(b) * c); }
    i64 trace() const { return a + d; }
    Mat2 transpose() const { return {a, c, b, d}; }
    /// adj(M) with M * adj(M) = det(M) * I.
    Mat2 adjugate() const { return {d, -b, -c, a}; }
    bool is_symmetric() const { return b == c; }
    Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
    Vec2 row(int i) const { return i == 0 ? Vec2{a, b} : Vec2{c, d}; }
    Vec2 apply(const Vec2& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        auto m = [](i64 p, i64 q, i64 r, i64 s) {
            return narrow_i64(static_cast<i128>(p) * q + static_cast<i128>(r) * s);
        };
        return {m(x.a, y.a, x.b, y.c), m(x.a, y.b, x.b, y.d), m(x.c, y.a, x.d, y.c),
                m(x.c, y.b, x.d, y.d)};
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend Mat2 operator*(i64 s, const Mat2& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
    friend bool operator==(const Mat2&, const Mat2&) = default;
    friend auto operator<=>(const Mat2&, const Mat2&) = default;
};

std::ostream& operator<<(std::ostream& os, const Mat2& m);

/// Element of GL(2,Z). Construction checks det = +-1.
class Unimodular {
public:
    Unimodular() = default;
    explicit Unimodular(const Mat2& m);

    const Mat2& matrix() const { return m_; }
    operator const Mat2&() const { return m_; } // NOLINT(google-explicit-constructor)
    i64 det() const { return m_.det(); }
    Unimodular inverse() const;
    Unimodular transpose() const { return Unimodular(m_.transpose()); }

    friend Unimodular operator*(const Unimodular& x, const Unimodular& y) {
        return Unimodular(x.m_ * y.m_);
    }
    friend bool operator==(const Unimodular&, const Unimodular&) = default;

private:
    Mat2 m_ = Mat2::identity();
};

/// Complete a primitive vector to a matrix of determinant +1 having it as the
/// given column (0 or 1).
Unimodular complete_column(const Vec2& v, int column);
/// Same, with the vector placed as a row.
Unimodular complete_row(const Vec2& v, int row);

/// Element of Lambda*: half-integral symmetric matrix, stored with doubled b.
struct HalfIntegralForm {
    i64 a = 0, b = 0, c = 0;

    /// 4 * det = 4ac - b^2.
    i64 det4() const { return narrow_i64(4 * static_cast<i128>(a) * c - static_cast<i128>(b) * b); }
    Rational determinant() const { return Rational(det4(), 4); }
    i64 trace() const { return a + c; }
    bool is_positive_definite() const { return a > 0 && det4() > 0; }

    /// A[x] = x^t A x (always an integer).
    i64 value(const Vec2& x) const {
        return narrow_i64(static_cast<i128>(a) * x[0] * x[0] + static_cast<i128>(b) * x[0] * x[1] +
                          static_cast<i128>(c) * x[1] * x[1]);
    }
    /// Twice the bilinear form: 2 B(x, y) with B(x, x) = A[x].
    i64 polar(const Vec2& x, const Vec2& y) const {
        return narrow_i64(2 * static_cast<i128>(a) * x[0] * y[0] +
                          static_cast<i128>(b) * (static_cast<i128>(x[0]) * y[1] + static_cast<i128>(x[1]) * y[0]) +
                          2 * static_cast<i128>(c) * x[1] * y[1]);
    }
    /// A[G] = G^t A G.
    HalfIntegralForm congruent(const Mat2& g) const;
    /// A[G^t] = G A G^t, the action written Q[tU] in the literature.
    HalfIntegralForm act(const Mat2& u) const { return congruent(u.transpose()); }
    /// 2A as an integer matrix [[2a, b], [b, 2c]].
    Mat2 doubled() const { return {2 * a, b, b, 2 * c}; }

    std::string to_string() const;
    friend bool operator==(const HalfIntegralForm&, const HalfIntegralForm&) = default;
    friend auto operator<=>(const HalfIntegralForm&, const HalfIntegralForm&) = default;
};

std::ostream& operator<<(std::ostream& os, const HalfIntegralForm& f);

/// Parse "a b c" (doubled-b convention). Throws DomainError on malformed input.
HalfIntegralForm parse_form(const std::string& text);

/// Element of Lambda: integer symmetric [[s1, s2], [s2, s4]].
struct IntegralSymmetric {
    i64 s1 = 0, s2 = 0, s4 = 0;

    Mat2 matrix() const { return {s1, s2, s2, s4}; }
    /// S[G] = G^t S G.
    IntegralSymmetric congruent(const Mat2& g) const;
    friend bool operator==(const IntegralSymmetric&, const IntegralSymmetric&) = default;
};

/// Result of gauss_reduce: reduced == input.act(U) == U A U^t.
struct Reduction {
    HalfIntegralForm reduced;
    Unimodular U;
};

/// GL(2,Z)-reduce a positive-definite form to the unique representative with
/// 0 <= b <= a <= c.
Reduction gauss_reduce(const HalfIntegralForm& form);

/// min { A[x] : x in Z^2 \ {0} }.
i64 form_minimum(const HalfIntegralForm& form);

/// e(G) = gcd(a, b, c) in the doubled-b convention. G must be nonzero.
i64 content(const HalfIntegralForm& form);

/// #{ U in GL(2,Z) : U A U^t = A } for positive-definite A.
i64 automorphism_count(const HalfIntegralForm& form);

/// delta(Q, T) = #{ U in GL(2,Z) : U Q U^t = T }.
i64 delta(const HalfIntegralForm& q, const HalfIntegralForm& t);

/// All primitive x in Z^2 with T[x] = m, sorted lexicographically.
std::vector<Vec2> primitive_vectors_with_value(const HalfIntegralForm& form, i64 m);

/// A(m, T): number of primitive representations of m by T.
i64 repr_count(i64 m, const HalfIntegralForm& form);

/// C = U^{-1} diag(c1, c2) V^{-1} with 0 < c1 | c2 (equivalently U C V = diag).
struct ElementaryDivisorDecomposition {
    i64 c1 = 1, c2 = 1;
    Unimodular U, V;
};

ElementaryDivisorDecomposition elementary_divisors(const Mat2& c);

/// Representatives of GL(2,Z)/P(n), P(n) = { [[a, b], [c, d]] : b = 0 mod n }.
/// The coset of V is determined by its second column modulo n up to units.
std::vector<Unimodular> coset_reps_P(i64 n);

/// Canonical key of the coset V P(n): the second column of V reduced mod n
/// and normalized under multiplication by units of Z/n.
Vec2 coset_key_P(const Mat2& v, i64 n);

// Small number-theory helpers shared across modules.

struct ExtGcd {
    i64 g, x, y; // g = a x + b y, g >= 0
};
ExtGcd ext_gcd(i64 a, i64 b);
/// Inverse of a modulo m (m >= 1; returns 0 for m == 1). Throws if not a unit.
i64 mod_inverse(i64 a, i64 m);
/// floor(sqrt(n)) for n >= 0.
i64 isqrt(i64 n);
/// Euler's totient.
i64 euler_phi(i64 n);

} // namespace siegel
