#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smallforms/roots.hpp"
#include "smallforms/solver.hpp"
#include "smallforms/stats.hpp"

namespace smallforms::measure {

using approx::ApproxFunction;
using curves::SystemMap;
using solver::Form;
using solver::SolverConfig;

// Sampling box B inside the system domain, with the seed that keys the
// per-point splittable streams.
struct SampleRegion {
    std::vector<std::pair<Rat, Rat>> box;
    long long samples = 100;
    uint64_t seed = 1;

    void validate_in(const SystemMap& system) const;
    double volume() const;
    Rat volume_exact() const;
};

// ---------------------------------------------------------------------------
// theta tuples

struct ThetaTuple {
    std::vector<std::vector<double>> groups;  // theta_{j,0..l_j}

    int total() const;
    static ThetaTuple from_groups(std::vector<std::vector<double>> groups);
};

struct ThetaDiagnostics {
    double theta = 0.0;        // geometric mean
    double theta_pow_k = 0.0;  // plain product (theta^(n+1), no rounding detour)
    double theta0 = 0.0;       // min_j theta_{j,0}
    double theta_inf = 0.0;    // max_j theta_{j,l_j}
    std::vector<bool> group_property_M;
    bool property_M_ok = false;
    bool bound_applicable = false;  // theta <= 1 and all groups Property M
    double theta_hat_bound = 0.0;   // max{theta0/theta^(n+1), 1/theta_inf}
};

ThetaDiagnostics theta_diagnostics(const ThetaTuple& tuple);

// ---------------------------------------------------------------------------
// membership in A(G, theta)

struct MembershipResult {
    bool member = false;
    std::optional<Form> witness;
    Int height_box;  // search bound from the Cramer inversion
};

// Exists a nonzero integer a with |(G a)_i| <= theta_i for all i, G the
// square system matrix at x.  The search box radius comes from the Cramer
// bound; inequality tests are exact and non-strict.
MembershipResult small_form_membership(const SystemMap& system,
                                       const curves::SquareSystemSpec& spec,
                                       const std::vector<Rat>& x, const ThetaTuple& tuple,
                                       double work_limit = 1e9, double det_floor = 0.0);

struct MeasureEstimate {
    double estimate = 0.0;  // hit fraction x region volume
    double ci_lo = 0.0, ci_hi = 0.0;
    long long hits = 0, samples = 0, failures = 0;
};

MeasureEstimate monte_carlo_membership_measure(const SystemMap& system,
                                               const curves::SquareSystemSpec& spec,
                                               const ThetaTuple& tuple, const SampleRegion& region,
                                               double work_limit = 1e9, double det_floor = 0.0,
                                               bool parallel = true);

// ---------------------------------------------------------------------------
// solution cells

struct CellInterval {
    RootBracket left, right;  // endpoint brackets (exact for rational endpoints)
    Rat inside_point;         // rational point with |F_j| < psi(H), exact
    Rat inf_deriv;            // certified lower bound for inf |F_j'| on the hull
    double length() const { return rat_to_double(right.hi - left.lo); }
    Rat length_outer() const { return right.hi - left.lo; }
    Rat length_inner() const;
};

struct CellDecomposition {
    Form form;
    int j = 0;
    Rat psi_H;  // rational image of psi(H(F))
    std::vector<CellInterval> intervals;
    int K_bound = 0;  // n(n+1)/2 + 1
};

// sigma_j(F) = {x in U_j : |F_j(x)| < psi(H)}, exact isolation of the
// boundary roots of F_j -+ psi(H), endpoint brackets refined to `tol`.
CellDecomposition solution_cells(const Form& form, const SystemMap& system,
                                 const ApproxFunction& psi, int j,
                                 const Rat& tol = Rat(1, Int("1000000000000000000000000")));

// same, restricted to a sub-interval of U_j
CellDecomposition solution_cells_on(const Form& form, const SystemMap& system,
                                    const ApproxFunction& psi, int j, const Rat& lo, const Rat& hi,
                                    const Rat& tol = Rat(1, Int("1000000000000000000000000")));

// ---------------------------------------------------------------------------
// Borel-Cantelli cell sums

struct BorelCantelliPoint {
    long long H_max = 0;
    double cell_sum = 0.0;        // sum over canonical forms of prod_j |sigma_j(F) cap B_j|
    double comparison_sum = 0.0;  // sum h^(n-m) psi(h)^m
    long long contributing_forms = 0;
};

struct BorelCantelliOptions {
    double work_limit = 1e9;  // candidate box budget
    bool parallel = true;
};

std::vector<BorelCantelliPoint> borel_cantelli_partial_sums(const SystemMap& system,
                                                            const ApproxFunction& psi,
                                                            const SampleRegion& region,
                                                            std::vector<long long> H_cutoffs,
                                                            const BorelCantelliOptions& opts = {});

std::pair<double, double> borel_cantelli_partial_sum(const SystemMap& system,
                                                     const ApproxFunction& psi,
                                                     const SampleRegion& region, long long H_max,
                                                     const BorelCantelliOptions& opts = {});

// ---------------------------------------------------------------------------
// dichotomy experiment

struct DichotomyRow {
    int t = 0;
    double hit_fraction = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double mean_count = 0.0;
    double heuristic = 0.0;
};

struct DichotomyResult {
    std::vector<DichotomyRow> rows;
    long long points_ok = 0, points_failed = 0;
};

struct DichotomyConfig {
    SolverConfig solver;
    int t_max = 6;
    int point_precision_bits = 30;  // sampled coordinates are dyadic at this precision
    bool parallel = true;
};

DichotomyResult dichotomy_experiment(const SystemMap& system, const ApproxFunction& psi,
                                     const SampleRegion& region, const DichotomyConfig& cfg);
// reference implementation: same statistics computed without the parallel path
DichotomyResult dichotomy_experiment_serial(const SystemMap& system, const ApproxFunction& psi,
                                            const SampleRegion& region, const DichotomyConfig& cfg);

}  // namespace smallforms::measure
