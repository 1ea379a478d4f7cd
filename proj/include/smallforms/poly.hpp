#pragma once

#include <vector>

#include "smallforms/rational.hpp"

namespace smallforms {

// Univariate polynomial with exact rational coefficients, c[k] * x^k.
class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly constant(const Rat& v) { return Poly({v}); }
    static Poly monomial(const Rat& coeff, int degree);

    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero poly
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rat>& coeffs() const { return c_; }
    Rat coeff(int k) const { return k >= 0 && k < (int)c_.size() ? c_[k] : Rat(0); }

    Rat eval(const Rat& x) const;
    Poly derivative() const;
    Poly derivative(int order) const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator*(const Rat& s) const;

    bool operator==(const Poly& o) const { return c_ == o.c_; }

    // Sum of |c_k| * R^k: certified bound for |p| on [-R, R].
    Rat sup_bound(const Rat& radius) const;

  private:
    void trim();
    std::vector<Rat> c_;
};

// Integer polynomial, used by the root isolator.  Kept primitive-free;
// only signs of values matter there.
using IntPoly = std::vector<Int>;

// Clears denominators: returns integer polynomial D*p and the common
// denominator D > 0.
IntPoly int_poly_from(const Poly& p, Int& denominator_out);

Int int_poly_eval_int(const IntPoly& p, const Int& x);
Rat int_poly_eval(const IntPoly& p, const Rat& x);
int int_poly_sign_at(const IntPoly& p, const Rat& x);
IntPoly int_poly_derivative(const IntPoly& p);

// gcd over Q[x] scaled to a primitive integer polynomial (content 1,
// positive leading coefficient); used for square-free reduction.
IntPoly int_poly_gcd(IntPoly a, IntPoly b);
IntPoly square_free_part(const IntPoly& p);

// Multivariate polynomial with rational coefficients, for curve coordinates
// given in several variables (each term is coeff * prod x_i^{e_i}).
struct MPoly {
    struct Term {
        Rat coeff;
        std::vector<int> exp;  // one exponent per variable
    };
    int vars = 0;
    std::vector<Term> terms;

    Rat eval(const std::vector<Rat>& x) const;
};

}  // namespace smallforms
