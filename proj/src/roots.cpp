#include "smallforms/roots.hpp"

#include <algorithm>

#include "smallforms/errors.hpp"

namespace smallforms {

namespace {

// Sign variations in the coefficient sequence, zeros skipped.
int sign_variations(const IntPoly& p) {
    int v = 0, last = 0;
    for (const Int& c : p) {
        int s = sgn(c);
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    return v;
}

// Taylor shift by one: p(x) <- p(x + 1), in-place Pascal accumulation.
void shift_by_one(IntPoly& p) {
    int n = (int)p.size() - 1;
    for (int i = 0; i < n; ++i)
        for (int k = n - 1; k >= i; --k) p[k] += p[k + 1];
}

// Descartes bound for the number of roots in the open interval (0, 1):
// variations of (1+x)^n p(1/(1+x)), i.e. reversal followed by a unit shift.
int descartes_01(const IntPoly& p) {
    IntPoly q(p.rbegin(), p.rend());
    shift_by_one(q);
    return sign_variations(q);
}

// p(x/2) * 2^n, the left half of a dyadic split rescaled back to (0,1).
IntPoly scale_left(const IntPoly& p) {
    IntPoly q = p;
    int n = (int)q.size() - 1;
    for (int k = 0; k <= n; ++k) mpz_mul_2exp(q[k].get_mpz_t(), q[k].get_mpz_t(), n - k);
    return q;
}

// Exact synthetic division by (x - 1); requires p(1) == 0.
void deflate_at_one(IntPoly& p) {
    IntPoly b(p.size() - 1);
    Int carry = p.back();
    for (int k = (int)p.size() - 2; k >= 0; --k) {
        b[k] = carry;
        carry += p[k];
    }
    p = std::move(b);
}

// Division by x; requires p[0] == 0.
void deflate_at_zero(IntPoly& p) { p.erase(p.begin()); }

struct Frame {
    IntPoly poly;  // roots in (0,1) correspond to (lo, hi) below
    Rat lo, hi;
};

// Core bisection.  `p01` must be square-free with p01(0) != 0 and p01(1) != 0;
// exact roots hit at split points are emitted and deflated away, so every
// sign-change bracket has nonzero endpoint values.
void isolate_01(IntPoly p01, const Rat& lo0, const Rat& hi0, std::vector<RootBracket>& out) {
    std::vector<Frame> stack;
    stack.push_back({std::move(p01), lo0, hi0});
    long steps = 0;
    while (!stack.empty()) {
        if (++steps > 2000000) throw DegenerateInputError("root isolation failed to terminate");
        Frame f = std::move(stack.back());
        stack.pop_back();
        int v = descartes_01(f.poly);
        if (v == 0) continue;
        if (v == 1) {
            out.push_back({f.lo, f.hi, false});
            continue;
        }
        Rat mid = (f.lo + f.hi) / 2;
        IntPoly left = scale_left(f.poly);
        IntPoly right = left;
        shift_by_one(right);
        if (!right.empty() && right[0] == 0) {
            out.push_back({mid, mid, true});
            deflate_at_zero(right);
            deflate_at_one(left);
        }
        stack.push_back({std::move(left), f.lo, mid});
        stack.push_back({std::move(right), mid, f.hi});
    }
}

}  // namespace

std::vector<RootBracket> isolate_roots(const IntPoly& p, const Rat& a, const Rat& b) {
    if (a > b) throw ConfigError("isolate_roots: empty interval");
    IntPoly sf = square_free_part(p);
    if (sf.empty()) throw DegenerateInputError("isolate_roots: zero polynomial");
    std::vector<RootBracket> out;
    if (sf.size() == 1) return out;  // nonzero constant

    if (int_poly_sign_at(sf, a) == 0) out.push_back({a, a, true});
    if (b > a && int_poly_sign_at(sf, b) == 0) out.push_back({b, b, true});
    if (b == a) return out;

    // Compose with the affine map [0,1] -> [a,b]: q(x) = sf(a + (b-a) x).
    Rat w = b - a;
    int n = (int)sf.size() - 1;
    std::vector<Rat> comp{Rat(sf[n])};
    for (int k = n - 1; k >= 0; --k) {
        std::vector<Rat> next(comp.size() + 1, Rat(0));
        for (size_t i = 0; i < comp.size(); ++i) {
            next[i] += comp[i] * a;
            next[i + 1] += comp[i] * w;
        }
        next[0] += Rat(sf[k]);
        comp = std::move(next);
    }
    Int den;
    IntPoly p01 = int_poly_from(Poly(std::move(comp)), den);
    while (!p01.empty() && p01[0] == 0) deflate_at_zero(p01);  // root at a, already reported
    if (!p01.empty() && int_poly_eval_int(p01, Int(1)) == 0) deflate_at_one(p01);  // root at b, ditto

    isolate_01(std::move(p01), a, b, out);
    std::sort(out.begin(), out.end(),
              [](const RootBracket& x, const RootBracket& y) { return x.lo < y.lo; });
    return out;
}

namespace {

// A foreign root of p may sit exactly on a bracket endpoint (endpoints are
// subdivision points).  Walk the endpoint inward until its sign is nonzero,
// using p' for the sign of p just inside the foreign root.
void clear_endpoint_roots(const IntPoly& p, RootBracket& br) {
    IntPoly dp = int_poly_derivative(p);
    for (int guard = 0; guard < 4096; ++guard) {
        bool lo_zero = int_poly_sign_at(p, br.lo) == 0;
        bool hi_zero = int_poly_sign_at(p, br.hi) == 0;
        if (!lo_zero && !hi_zero) return;
        Rat m = (br.lo + br.hi) / 2;
        int sm = int_poly_sign_at(p, m);
        if (sm == 0) {
            br = {m, m, true};
            return;
        }
        if (lo_zero) {
            int s_in = int_poly_sign_at(dp, br.lo);  // sign of p on (lo, lo+eps)
            if (sm == s_in)
                br.lo = m;  // the bracketed root lies beyond m
            else
                br.hi = m;  // sign already flipped: root in (lo, m)
        } else {
            int s_in = -int_poly_sign_at(dp, br.hi);  // sign of p on (hi-eps, hi)
            if (sm == s_in)
                br.hi = m;
            else
                br.lo = m;
        }
    }
    throw DegenerateInputError("bracket endpoint cleanup failed to converge");
}

}  // namespace

void refine_bracket(const IntPoly& p, RootBracket& br, const Rat& tol, int max_iter) {
    if (br.exact) return;
    IntPoly sf = square_free_part(p);  // bisection signs; p itself may have
                                       // even-multiplicity roots
    clear_endpoint_roots(sf, br);
    if (br.exact) return;
    int sl = int_poly_sign_at(sf, br.lo);
    for (int it = 0; it < max_iter; ++it) {
        Rat m = br.mid();
        if (br.width() <= tol && abs(int_poly_eval(p, m)) <= tol) return;
        int sm = int_poly_sign_at(sf, m);
        if (sm == 0) {
            br = {m, m, true};
            return;
        }
        if (sm == sl)
            br.lo = m;
        else
            br.hi = m;
    }
}

void separate_brackets(const std::vector<IntPoly>& polys,
                       std::vector<std::vector<RootBracket>>& brackets) {
    struct Ref {
        size_t set, idx;
    };
    std::vector<Ref> all;
    for (size_t s = 0; s < brackets.size(); ++s)
        for (size_t i = 0; i < brackets[s].size(); ++i) all.push_back({s, i});
    auto lo_of = [&](const Ref& r) -> const Rat& { return brackets[r.set][r.idx].lo; };
    auto hi_of = [&](const Ref& r) -> const Rat& { return brackets[r.set][r.idx].hi; };

    for (int round = 0; round < 512; ++round) {
        std::sort(all.begin(), all.end(), [&](const Ref& x, const Ref& y) {
            return lo_of(x) < lo_of(y) || (lo_of(x) == lo_of(y) && hi_of(x) < hi_of(y));
        });
        bool clash = false;
        for (size_t i = 0; i + 1 < all.size(); ++i) {
            if (hi_of(all[i]) >= lo_of(all[i + 1])) {
                clash = true;
                for (size_t j : {i, i + 1}) {
                    RootBracket& br = brackets[all[j].set][all[j].idx];
                    if (br.exact) continue;
                    refine_bracket(polys[all[j].set], br, br.width() / 4, 4);
                }
            }
        }
        if (!clash) return;
    }
    throw DegenerateInputError("separate_brackets: failed to separate (coincident roots?)");
}

}  // namespace smallforms
