#include "smallforms/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "smallforms/errors.hpp"

namespace smallforms {

Rat rat_from_string(const std::string& s) {
    if (s.empty()) throw ConfigError("empty rational literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rat q;
        if (q.set_str(s, 10) != 0)
            throw ConfigError("bad rational literal: " + s);
        if (q.get_den() == 0) throw ConfigError("zero denominator: " + s);
        q.canonicalize();
        return q;
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        Rat q;
        if (q.set_str(s, 10) != 0)
            throw ConfigError("bad integer literal: " + s);
        return q;
    }
    // decimal: sign, integer part, fractional part
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac_len = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
        throw ConfigError("bad decimal literal: " + s);
    Int num;
    if (num.set_str(digits, 10) != 0)
        throw ConfigError("bad decimal literal: " + s);
    Int den = 1;
    for (size_t i = 0; i < frac_len; ++i) den *= 10;
    Rat q(num, den);
    q.canonicalize();
    return q;
}

Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw OverflowError("non-finite value has no rational image");
    Rat q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

double rat_to_double(const Rat& q) {
    mpf_class f(q, 128);
    return f.get_d();
}

std::string rat_to_string(const Rat& q) { return q.get_str(); }

Int sup_norm(const std::vector<Int>& v) {
    Int s = 0;
    for (const Int& c : v) {
        Int a = abs(c);
        if (a > s) s = a;
    }
    return s;
}

Rat approx_sqrt(const Rat& x, unsigned bits) {
    if (x < 0) throw ConfigError("approx_sqrt of negative value");
    if (x == 0) return Rat(0);
    // sqrt(n/d) = sqrt(n*d)/d; bracket sqrt(n*d * 4^bits) by integer sqrt.
    Int n = x.get_num(), d = x.get_den();
    Int scaled = n * d;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * bits);
    Int root;
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    Int den = d;
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), bits);
    Rat q(root, den);
    q.canonicalize();
    return q;
}

Int floor_rat(const Rat& q) {
    Int r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return r;
}

Int strict_floor(const Rat& q) {
    Int f = floor_rat(q);
    if (Rat(f) == q) f -= 1;
    return f;
}

}  // namespace smallforms
