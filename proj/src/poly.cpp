#include "smallforms/poly.hpp"

#include <algorithm>

#include "smallforms/errors.hpp"

namespace smallforms {

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::monomial(const Rat& coeff, int degree) {
    std::vector<Rat> c(degree + 1, Rat(0));
    c[degree] = coeff;
    return Poly(std::move(c));
}

Rat Poly::eval(const Rat& x) const {
    Rat acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Rat> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * Rat((long)k);
    return Poly(std::move(d));
}

Poly Poly::derivative(int order) const {
    Poly p = *this;
    for (int i = 0; i < order; ++i) p = p.derivative();
    return p;
}

Poly Poly::operator+(const Poly& o) const {
    std::vector<Rat> r(std::max(c_.size(), o.c_.size()), Rat(0));
    for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
    return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const {
    std::vector<Rat> r(std::max(c_.size(), o.c_.size()), Rat(0));
    for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (size_t k = 0; k < o.c_.size(); ++k) r[k] -= o.c_[k];
    return Poly(std::move(r));
}

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    std::vector<Rat> r(c_.size() + o.c_.size() - 1, Rat(0));
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(r));
}

Poly Poly::operator*(const Rat& s) const {
    std::vector<Rat> r = c_;
    for (auto& v : r) v *= s;
    return Poly(std::move(r));
}

Rat Poly::sup_bound(const Rat& radius) const {
    Rat b(0), pw(1);
    for (const Rat& v : c_) {
        b += abs(v) * pw;
        pw *= radius;
    }
    return b;
}

IntPoly int_poly_from(const Poly& p, Int& denominator_out) {
    Int d(1);
    for (const Rat& v : p.coeffs()) {
        Int den = v.get_den();
        Int g;
        mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), den.get_mpz_t());
        d = d / g * den;
    }
    IntPoly out(p.coeffs().size());
    for (size_t k = 0; k < out.size(); ++k) {
        const Rat& v = p.coeffs()[k];
        out[k] = v.get_num() * (d / v.get_den());
    }
    denominator_out = d;
    return out;
}

Int int_poly_eval_int(const IntPoly& p, const Int& x) {
    Int acc(0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
}

namespace {

// sum c_k n^k d^{deg-k}: numerator of p(n/d) over d^deg.
Int scaled_eval(const IntPoly& p, const Int& n, const Int& d) {
    if (p.empty()) return Int(0);
    std::vector<Int> dpow(p.size());
    dpow[p.size() - 1] = 1;
    for (int k = (int)p.size() - 2; k >= 0; --k) dpow[k] = dpow[k + 1] * d;
    Int acc(0);
    for (int k = (int)p.size() - 1; k >= 0; --k) acc = acc * n + p[k] * dpow[k];
    return acc;
}

}  // namespace

Rat int_poly_eval(const IntPoly& p, const Rat& x) {
    if (p.empty()) return Rat(0);
    const Int &n = x.get_num(), &d = x.get_den();
    Int num = scaled_eval(p, n, d);
    Int den(1);
    for (size_t k = 1; k < p.size(); ++k) den *= d;
    Rat q(num, den);
    q.canonicalize();
    return q;
}

int int_poly_sign_at(const IntPoly& p, const Rat& x) {
    if (p.empty()) return 0;
    return sgn(scaled_eval(p, x.get_num(), x.get_den()));
}

IntPoly int_poly_derivative(const IntPoly& p) {
    if (p.size() <= 1) return {};
    IntPoly d(p.size() - 1);
    for (size_t k = 1; k < p.size(); ++k) d[k - 1] = p[k] * (long)k;
    return d;
}

namespace {

void trim_int(IntPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

Int content(const IntPoly& p) {
    Int g(0);
    for (const Int& c : p) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    return g == 0 ? Int(1) : g;
}

void make_primitive(IntPoly& p) {
    trim_int(p);
    if (p.empty()) return;
    Int g = content(p);
    if (sgn(p.back()) < 0) g = -g;
    for (Int& c : p) c /= g;
}

// r = primitive pseudo-remainder of a by b (deg a >= deg b >= 0).
IntPoly pseudo_rem(IntPoly a, const IntPoly& b) {
    int db = (int)b.size() - 1;
    const Int& lb = b.back();
    while ((int)a.size() - 1 >= db && !a.empty()) {
        int da = (int)a.size() - 1;
        Int la = a.back();
        for (Int& c : a) c *= lb;
        for (int k = 0; k <= db; ++k) a[da - db + k] -= la * b[k];
        trim_int(a);
    }
    return a;
}

}  // namespace

IntPoly int_poly_gcd(IntPoly a, IntPoly b) {
    make_primitive(a);
    make_primitive(b);
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.size() < b.size()) std::swap(a, b);
    while (!b.empty()) {
        IntPoly r = pseudo_rem(a, b);
        make_primitive(r);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

IntPoly square_free_part(const IntPoly& p) {
    IntPoly q = p;
    trim_int(q);
    if (q.size() <= 1) return q;
    IntPoly g = int_poly_gcd(q, int_poly_derivative(q));
    if (g.size() <= 1) {
        make_primitive(q);
        return q;
    }
    // exact division q / g over Q, then primitive part
    int dg = (int)g.size() - 1;
    int dq = (int)q.size() - 1;
    std::vector<Rat> quot(dq - dg + 1, Rat(0));
    std::vector<Rat> rem(q.size());
    for (size_t k = 0; k < q.size(); ++k) rem[k] = Rat(q[k]);
    for (int k = dq - dg; k >= 0; --k) {
        Rat f = rem[k + dg] / Rat(g.back());
        quot[k] = f;
        for (int j = 0; j <= dg; ++j) rem[k + j] -= f * Rat(g[j]);
    }
    Poly qp{std::vector<Rat>(quot.begin(), quot.end())};
    Int den;
    IntPoly out = int_poly_from(qp, den);
    make_primitive(out);
    return out;
}

Rat MPoly::eval(const std::vector<Rat>& x) const {
    Rat acc(0);
    for (const Term& t : terms) {
        Rat v = t.coeff;
        for (int i = 0; i < vars; ++i)
            for (int e = 0; e < t.exp[i]; ++e) v *= x[i];
        acc += v;
    }
    return acc;
}

}  // namespace smallforms
