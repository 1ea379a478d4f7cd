#pragma once

#include <cstdint>
#include <vector>

#include "smallforms/rational.hpp"

namespace smallforms::lattice {

// Column-major exact basis: cols[i] is the i-th basis vector in Q^rows.
struct Basis {
    std::vector<std::vector<Rat>> cols;
    int rows() const { return cols.empty() ? 0 : (int)cols[0].size(); }
    int rank() const { return (int)cols.size(); }
};

// LLL-reduces the basis in floating point while tracking the exact integer
// transform U (new basis = old basis * U, U unimodular).  The reduction is a
// speed heuristic only; enumeration soundness never depends on it.
std::vector<std::vector<long long>> lll_transform(const Basis& basis, double delta = 0.99);

struct EnumOptions {
    double radius_sq;            // enumerate ||v||_2^2 <= radius_sq (plus guard slack)
    long long node_limit = 200000000;
};

// All nonzero integer combinations a (coefficients w.r.t. the ORIGINAL basis
// columns) whose lattice vector lies in the L2 ball.  The tree search runs on
// double Gram-Schmidt data of the exactly transformed basis with inflated
// bounds, so the result is a superset of the true ball; callers filter
// exactly.  +/-a pairs are both reported.
std::vector<std::vector<long long>> enumerate_ball(const Basis& basis, const EnumOptions& opts);

}  // namespace smallforms::lattice
