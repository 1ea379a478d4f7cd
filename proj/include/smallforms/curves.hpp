#pragma once

#include <string>
#include <utility>
#include <vector>

#include "smallforms/matrix.hpp"
#include "smallforms/poly.hpp"
#include "smallforms/rational.hpp"

namespace smallforms::curves {

// One coordinate map f = (f_0, ..., f_n) on a closed interval, polynomial
// coordinates with rational coefficients.  Construction verifies the
// Wronskian at the interval midpoint is nonzero.
class CurveMap {
  public:
    CurveMap(std::vector<Poly> coords, Rat lo, Rat hi);

    int n() const { return n_; }
    const Rat& lo() const { return lo_; }
    const Rat& hi() const { return hi_; }
    Rat midpoint() const { return (lo_ + hi_) / 2; }
    const std::vector<Poly>& coords() const { return coords_; }
    // f_i^(order), cached up to order n+1 (higher orders on demand are fine
    // for polynomials but never needed here)
    const Poly& coord_deriv(int i, int order) const;

    Rat eval(int i, int order, const Rat& x) const { return coord_deriv(i, order).eval(x); }
    bool contains(const Rat& x) const { return lo_ <= x && x <= hi_; }
    bool interior(const Rat& x) const { return lo_ < x && x < hi_; }

    // certified sup bound of |f_i^(order)| over the interval
    Rat sup_bound(int i, int order) const;

  private:
    int n_;
    Rat lo_, hi_;
    std::vector<Poly> coords_;
    std::vector<std::vector<Poly>> derivs_;  // [i][order], order <= n+1
};

CurveMap veronese_curve(int n, const Rat& lo, const Rat& hi);
// coordinates x^e for the given exponent list
CurveMap monomial_curve(const std::vector<int>& exponents, const Rat& lo, const Rat& hi);

// m curves sharing the same n, with the product box domain.
class SystemMap {
  public:
    explicit SystemMap(std::vector<CurveMap> curves);

    int m() const { return (int)curves_.size(); }
    int n() const { return curves_[0].n(); }
    const CurveMap& curve(int j) const { return curves_[j]; }
    const std::vector<CurveMap>& curves() const { return curves_; }

    bool interior(const std::vector<Rat>& x) const;
    bool contains(const std::vector<Rat>& x) const;

    // certified upper bound for max_j max_{l<=n+1} max_i sup |f_{j,i}^(l)|
    double derivative_bound() const { return M_; }
    Rat derivative_bound_exact() const { return M_exact_; }

  private:
    std::vector<CurveMap> curves_;
    Rat M_exact_;
    double M_ = 0.0;
};

SystemMap veronese_system(int n, int m, const Rat& lo, const Rat& hi);

// Stacked evaluation matrices Y^(0..order), each m x (n+1),
// Y^(i)[j][k] = f_{j,k}^(i)(x_j).
std::vector<RatMatrix> evaluate_system_matrix(const SystemMap& system, const std::vector<Rat>& x,
                                              int order);

// det of the (n+1)x(n+1) matrix with entry (k, i) = f_i^(k)(x).
Rat wronskian(const CurveMap& curve, const Rat& x);

// Square matrix built from derivative multiplicities l_j with
// sum (l_j + 1) = n + 1: rows f_j, f_j', ..., f_j^(l_j) stacked per curve.
struct SquareSystemSpec {
    std::vector<int> multiplicities;  // l_j per curve
    void validate(const SystemMap& system) const;
};

RatMatrix square_system_matrix(const SystemMap& system, const SquareSystemSpec& spec,
                               const std::vector<Rat>& x);

struct NearZero {
    std::vector<double> x;
    std::string which;  // "wronskian[j]", "minor_m", "minor_m_plus_1[j]"
    double value;
};

struct NondegeneracyReport {
    double M_estimate = 0.0;       // grid max of |f^(l)|
    double M_certified = 0.0;      // coefficient bound, >= true sup
    double c0_wronskian = 0.0;     // grid min over axes of min_j |W(f_j)|
    double c0_minor_m = 0.0;       // grid min of the m x m minor
    double c0_minor_m_plus_1 = 0.0;
    std::vector<NearZero> near_zero_locations;
    // grid-doubling guard: refined extrema and whether they moved < 10%
    bool refinement_checked = false;
    bool refinement_stable = false;
    double M_refined = 0.0, c0_wronskian_refined = 0.0;
};

struct NondegeneracyOptions {
    double near_zero_threshold = 1e-9;
    bool check_refinement = true;
    bool parallel = true;
};

NondegeneracyReport nondegeneracy_report(const SystemMap& system, int grid_points_per_axis,
                                         const NondegeneracyOptions& opts = {});
// plain reference implementation used to validate the parallel scan
NondegeneracyReport nondegeneracy_report_serial(const SystemMap& system, int grid_points_per_axis,
                                                const NondegeneracyOptions& opts = {});

// One-variable restriction of multivariate coordinates along the monomial arc
//   x_i = u_i t^(D^(i-1) + D^k),  u_1 = 1,
// retried with D+1 while the restricted curve fails its independence check.
struct FiberResult {
    CurveMap curve;
    int used_D;
};

FiberResult fiber_substitution(const std::vector<MPoly>& coords, const std::vector<Rat>& u,
                               const std::vector<std::pair<Rat, Rat>>& domain_box, int D,
                               int D_cap = 8);

struct CramerCheck {
    bool preconditions_ok = false;
    std::string precondition_failure;
    bool holds = false;
    Rat lhs;  // |G a|_inf
    Rat rhs;  // C1 / (k! C2^(k-1)) |a|_inf
};

// |G a|_inf >= C1/(k! C2^(k-1)) |a|_inf for |det G| >= C1, entries <= C2.
CramerCheck cramer_lower_bound_check(const RatMatrix& G, const std::vector<Int>& a, const Rat& C1,
                                     const Rat& C2);

}  // namespace smallforms::curves
