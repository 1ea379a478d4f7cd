#pragma once

#include <vector>

#include "smallforms/poly.hpp"
#include "smallforms/rational.hpp"

namespace smallforms {

// Isolating bracket for one real root.  Either exact (lo == hi, the root is
// rational) or a strict sign-change interval lo < root < hi.
struct RootBracket {
    Rat lo, hi;
    bool exact = false;

    Rat mid() const { return exact ? lo : (lo + hi) / 2; }
    Rat width() const { return hi - lo; }
};

// All real roots of p in the closed interval [a, b], as disjoint brackets in
// ascending order.  Descartes' rule of signs on the square-free part drives
// the bisection; all arithmetic is exact.  Endpoint roots come back as exact
// brackets.
std::vector<RootBracket> isolate_roots(const IntPoly& p, const Rat& a, const Rat& b);

// Shrinks a sign-change bracket by bisection until width <= tol and the
// midpoint residual satisfies |p(mid)| <= tol (best effort under iteration
// cap; exact brackets pass through untouched).
void refine_bracket(const IntPoly& p, RootBracket& br, const Rat& tol, int max_iter = 220);

// Refines members of `brackets` (which may come from different polynomials)
// until they are pairwise disjoint with strict gaps.  Requires all bracketed
// roots distinct.
void separate_brackets(const std::vector<IntPoly>& polys, std::vector<std::vector<RootBracket>>& brackets);

}  // namespace smallforms
