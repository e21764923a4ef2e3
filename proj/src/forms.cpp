#include "siegel/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace siegel {

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

std::ostream& operator<<(std::ostream& os, const Mat2& m) {
    return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

std::ostream& operator<<(std::ostream& os, const HalfIntegralForm& f) { return os << f.to_string(); }

// ---------------------------------------------------------------------------
// number theory helpers

ExtGcd ext_gcd(i64 a, i64 b) {
    i64 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        const i64 q = old_r / r;
        old_r -= q * r; std::swap(old_r, r);
        old_s -= q * s; std::swap(old_s, s);
        old_t -= q * t; std::swap(old_t, t);
    }
    if (old_r < 0) { old_r = -old_r; old_s = -old_s; old_t = -old_t; }
    return {old_r, old_s, old_t};
}

i64 mod_inverse(i64 a, i64 m) {
    if (m < 1) throw DomainError("mod_inverse: modulus must be positive");
    if (m == 1) return 0;
    const auto [g, x, y] = ext_gcd(mod_floor(a, m), m);
    (void)y;
    if (g != 1) throw DomainError("mod_inverse: " + std::to_string(a) + " is not a unit mod " + std::to_string(m));
    return mod_floor(x, m);
}

i64 isqrt(i64 n) {
    if (n < 0) throw DomainError("isqrt of negative number");
    auto r = static_cast<i64>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && static_cast<i128>(r) * r > n) --r;
    while (static_cast<i128>(r + 1) * (r + 1) <= n) ++r;
    return r;
}

i64 euler_phi(i64 n) {
    i64 result = n;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

// ---------------------------------------------------------------------------
// matrices

Unimodular::Unimodular(const Mat2& m) : m_(m) {
    const i64 d = m.det();
    if (d != 1 && d != -1)
        throw DomainError("matrix is not unimodular (det = " + std::to_string(d) + ")");
}

Unimodular Unimodular::inverse() const {
    // det = +-1, so M^{-1} = det * adj(M).
    return Unimodular(m_.det() * m_.adjugate());
}

Unimodular complete_column(const Vec2& v, int column) {
    if (column == 0) {
        const auto [g, s, t] = ext_gcd(v[0], v[1]);
        if (g != 1) throw DomainError("complete_column: vector is not primitive");
        return Unimodular(Mat2{v[0], -t, v[1], s});
    }
    const auto [g, s, t] = ext_gcd(v[1], v[0]);
    if (g != 1) throw DomainError("complete_column: vector is not primitive");
    return Unimodular(Mat2{s, v[0], -t, v[1]});
}

Unimodular complete_row(const Vec2& v, int row) {
    if (row == 0) {
        const auto [g, s, t] = ext_gcd(v[0], v[1]);
        if (g != 1) throw DomainError("complete_row: vector is not primitive");
        return Unimodular(Mat2{v[0], v[1], -t, s});
    }
    const auto [g, s, t] = ext_gcd(v[1], v[0]);
    if (g != 1) throw DomainError("complete_row: vector is not primitive");
    return Unimodular(Mat2{s, -t, v[0], v[1]});
}

// ---------------------------------------------------------------------------
// forms

HalfIntegralForm HalfIntegralForm::congruent(const Mat2& g) const {
    const Vec2 g1 = g.col(0), g2 = g.col(1);
    return {value(g1), polar(g1, g2), value(g2)};
}

std::string HalfIntegralForm::to_string() const {
    return std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c);
}

HalfIntegralForm parse_form(const std::string& text) {
    std::istringstream in(text);
    HalfIntegralForm f;
    std::string extra;
    if (!(in >> f.a >> f.b >> f.c) || (in >> extra))
        throw DomainError("expected a form as three integers \"a b c\" (b doubled), got \"" + text + "\"");
    return f;
}

IntegralSymmetric IntegralSymmetric::congruent(const Mat2& g) const {
    const Mat2 r = g.transpose() * matrix() * g;
    return {r.a, r.b, r.d};
}

namespace {

void require_positive_definite(const HalfIntegralForm& f, const char* what) {
    if (!f.is_positive_definite())
        throw DomainError(std::string(what) + ": form (" + f.to_string() + ") is not positive definite");
}

// All x (primitive or not) with form[x] == m.
std::vector<Vec2> vectors_with_value(const HalfIntegralForm& f, i64 m) {
    std::vector<Vec2> out;
    if (m <= 0) return out;
    const i64 d4 = f.det4();
    // f[x] = c (x2 + b x1 / 2c)^2 + d4 x1^2 / 4c  =>  x1^2 <= 4 c m / d4.
    const i64 x1max = isqrt(narrow_i64(4 * static_cast<i128>(f.c) * m / d4));
    for (i64 x1 = -x1max; x1 <= x1max; ++x1) {
        const i128 disc = 4 * static_cast<i128>(f.c) * m - static_cast<i128>(d4) * x1 * x1;
        if (disc < 0) continue;
        const i64 s = isqrt(narrow_i64(disc));
        if (static_cast<i128>(s) * s != disc) continue;
        const i64 den = 2 * f.c;
        for (const i64 num : {-f.b * x1 - s, -f.b * x1 + s}) {
            if (num % den == 0) {
                const Vec2 x{x1, num / den};
                if (f.value(x) == m) out.push_back(x);
            }
            if (s == 0) break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

Reduction gauss_reduce(const HalfIntegralForm& form) {
    require_positive_definite(form, "gauss_reduce");
    HalfIntegralForm cur = form;
    Mat2 g = Mat2::identity(); // cur == form.congruent(g)
    for (;;) {
        // translate b into (-a, a]
        const i64 two_a = 2 * cur.a;
        i64 num = cur.a - cur.b;
        i64 t = num >= 0 ? num / two_a : -((-num + two_a - 1) / two_a);
        if (t != 0) {
            const Mat2 step{1, t, 0, 1};
            cur = cur.congruent(step);
            g = g * step;
        }
        if (cur.a > cur.c) {
            const Mat2 swap{0, 1, 1, 0};
            cur = cur.congruent(swap);
            g = g * swap;
            continue;
        }
        break;
    }
    if (cur.b < 0) {
        const Mat2 flip{1, 0, 0, -1};
        cur = cur.congruent(flip);
        g = g * flip;
    }
    return {cur, Unimodular(g.transpose())};
}

i64 form_minimum(const HalfIntegralForm& form) { return gauss_reduce(form).reduced.a; }

i64 content(const HalfIntegralForm& form) {
    const i64 g = std::gcd(std::gcd(form.a, form.b), form.c);
    if (g == 0) throw DomainError("content: zero form");
    return g;
}

i64 automorphism_count(const HalfIntegralForm& form) {
    const HalfIntegralForm r = gauss_reduce(form).reduced;
    // Rows u1, u2 of an automorphism satisfy r[u1] = a, r[u2] = c, 2B(u1, u2) = b.
    const auto first = vectors_with_value(r, r.a);
    const auto second = vectors_with_value(r, r.c);
    i64 count = 0;
    for (const auto& u1 : first)
        for (const auto& u2 : second) {
            const i64 det = u1[0] * u2[1] - u1[1] * u2[0];
            if ((det == 1 || det == -1) && r.polar(u1, u2) == r.b) ++count;
        }
    return count;
}

i64 delta(const HalfIntegralForm& q, const HalfIntegralForm& t) {
    require_positive_definite(q, "delta");
    require_positive_definite(t, "delta");
    if (q.det4() != t.det4()) return 0;
    const auto rq = gauss_reduce(q).reduced;
    const auto rt = gauss_reduce(t).reduced;
    if (rq != rt) return 0;
    return automorphism_count(rq);
}

std::vector<Vec2> primitive_vectors_with_value(const HalfIntegralForm& form, i64 m) {
    require_positive_definite(form, "primitive_vectors_with_value");
    if (m < 1) throw DomainError("primitive_vectors_with_value: m must be positive");
    auto all = vectors_with_value(form, m);
    std::erase_if(all, [](const Vec2& x) { return std::gcd(x[0], x[1]) != 1; });
    return all;
}

i64 repr_count(i64 m, const HalfIntegralForm& form) {
    return static_cast<i64>(primitive_vectors_with_value(form, m).size());
}

// ---------------------------------------------------------------------------
// elementary divisors

ElementaryDivisorDecomposition elementary_divisors(const Mat2& c) {
    if (c.det() == 0) throw DomainError("elementary_divisors: singular matrix");
    Mat2 m = c, left = Mat2::identity(), right = Mat2::identity(); // m == left * c * right
    auto row_op = [&](const Mat2& e) { m = e * m; left = e * left; };
    auto col_op = [&](const Mat2& f) { m = m * f; right = right * f; };
    const Mat2 swap{0, 1, 1, 0};
    for (;;) {
        // move the smallest nonzero entry to the top-left
        i64 best = -1;
        int pos = 0;
        const i64 entries[4] = {m.a, m.b, m.c, m.d};
        for (int i = 0; i < 4; ++i)
            if (entries[i] != 0 && (best < 0 || std::abs(entries[i]) < best)) {
                best = std::abs(entries[i]);
                pos = i;
            }
        if (pos == 1 || pos == 3) col_op(swap);
        if (pos == 2 || pos == 3) row_op(swap);
        if (m.c != 0) row_op(Mat2{1, 0, -(m.c / m.a), 1});
        if (m.b != 0) col_op(Mat2{1, -(m.b / m.a), 0, 1});
        if (m.b != 0 || m.c != 0) continue;
        if (m.d % m.a != 0) {
            row_op(Mat2{1, 1, 0, 1}); // bring d into the first row and repeat
            continue;
        }
        break;
    }
    if (m.a < 0) row_op(Mat2{-1, 0, 0, 1});
    if (m.d < 0) row_op(Mat2{1, 0, 0, -1});
    return {m.a, m.d, Unimodular(left), Unimodular(right)};
}

// ---------------------------------------------------------------------------
// GL(2,Z)/P(n)

namespace {

Vec2 normalize_mod_units(i64 x, i64 y, i64 n) {
    Vec2 best{mod_floor(x, n), mod_floor(y, n)};
    for (i64 w = 2; w < n; ++w) {
        if (std::gcd(w, n) != 1) continue;
        const Vec2 cand{mod_floor(w * x, n), mod_floor(w * y, n)};
        if (cand < best) best = cand;
    }
    return best;
}

} // namespace

Vec2 coset_key_P(const Mat2& v, i64 n) {
    if (n < 1) throw DomainError("coset_key_P: n must be positive");
    if (n == 1) return {0, 0};
    return normalize_mod_units(v.b, v.d, n);
}

std::vector<Unimodular> coset_reps_P(i64 n) {
    if (n < 1) throw DomainError("coset_reps_P: n must be positive");
    if (n == 1) return {Unimodular()};
    // Key = smallest point of the unit orbit. Its first entry is d = gcd(x, n)
    // (0 when x = 0); points (d, y) in one orbit differ by units w = 1 mod n/d.
    std::vector<Vec2> keys{{0, 1}};
    for (i64 d = 1; d < n; ++d) {
        if (n % d) continue;
        const i64 m = n / d;
        std::vector<i64> H;
        for (i64 w = 1; w < n; w += m)
            if (std::gcd(w, n) == 1) H.push_back(w);
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (i64 y = 0; y < n; ++y) {
            if (seen[static_cast<std::size_t>(y)] || std::gcd(d, y) != 1) continue;
            for (const i64 w : H) seen[static_cast<std::size_t>(w * y % n)] = 1;
            keys.push_back({d, y});
        }
    }
    std::vector<Unimodular> reps;
    reps.reserve(keys.size());
    for (const auto& k : keys) {
        // lift (k0, k1) mod n to a primitive integer vector
        Vec2 lift{0, 0};
        bool found = false;
        for (i64 j = 0; !found; ++j)
            for (const i64 s : {j, -j}) {
                const i64 d = k[1] + s * n;
                if (std::gcd(k[0], d) == 1) { lift = {k[0], d}; found = true; break; }
            }
        reps.push_back(complete_column(lift, 1));
    }
    return reps;
}

} // namespace siegel
