#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smallforms/approx.hpp"
#include "smallforms/roots.hpp"
#include "smallforms/solver.hpp"

namespace smallforms::ubiquity {

using approx::ApproxFunction;
using curves::SystemMap;
using solver::Form;

// Root tuple (gamma_1, ..., gamma_m) of one form, weighted by
// beta = H(F) / delta0 and tagged with the dyadic level it enters at.
struct ResonantPoint {
    Form form;
    std::vector<RootBracket> gammas;  // refined isolating brackets, one per axis
    long long height = 0;
    double beta = 0.0;
    int level_t = 0;
};

struct UbiquityConfig {
    std::vector<std::pair<Rat, Rat>> omega;  // closed box inside U
    double eta = 1.0;
    double delta0 = 0.0;  // <= 0 selects ((n+1) M)^-1
    double k0 = 0.0;      // <= 0 selects 2^-(m+1)
    Rat root_tol = Rat(1, Int("1000000000000000000000000000000"));  // 1e-30
    bool parallel = true;

    void validate_in(const SystemMap& system) const;
    double effective_delta0(const SystemMap& system) const;
    double effective_k0(const SystemMap& system) const;
};

// rho(r) = (2/eta) r^(-(n+1)/m)
double rho_of(const SystemMap& system, double eta, double r);

struct ResonantSet {
    std::vector<ResonantPoint> points;
    long long forms_scanned = 0;
    long long forms_skipped_degenerate = 0;
};

// All root tuples of canonical forms with H(F) <= delta0 * 2^t inside omega.
ResonantSet resonant_points(const SystemMap& system, const UbiquityConfig& cfg, int t);

struct CoveringResult {
    double fraction = 0.0;
    double fraction_lower = 0.0;  // certified (exact path) or Wilson low
    double fraction_upper = 0.0;
    bool exact = false;           // true for the 1-d interval-union path
    bool empty_warning = false;
    long long samples = 0;
};

// lambda( union of sup-norm balls B(R_alpha, rho(2^t)) cap ball ) / lambda(ball)
CoveringResult covering_fraction(const std::vector<ResonantPoint>& points,
                                 const SystemMap& system, const UbiquityConfig& cfg, int t,
                                 const std::vector<std::pair<Rat, Rat>>& ball,
                                 long long samples = 20000, uint64_t seed = 1);

struct MvtCheck {
    enum class Status { Ok, PreconditionViolated, OutsideDomain };
    Status status = Status::Ok;
    bool holds = false;
    double max_residual = 0.0;
    double psi_H = 0.0;
    double phi_beta = 0.0;        // psi(beta)/beta
    double predicted_bound = 0.0; // (n+1) M H delta0 psi(H)/H
};

// Verifies max_j |F_j(x_j)| < psi(H) for x within sup-distance Phi(beta) of
// the root tuple; exact arithmetic on the residual side.
MvtCheck mvt_inclusion_check(const std::vector<Rat>& x, const ResonantPoint& rp,
                             const ApproxFunction& psi, const SystemMap& system,
                             const UbiquityConfig& cfg);

struct RegularityReport {
    double rho_ratio = 0.0;             // 2^(-(n+1)/m), constant in t
    std::vector<double> rho;            // rho(2^t), t = 1..t_max
    double sum_lemma = 0.0;             // sum g~(Phi(2^t)) / rho(2^t)^m
    double sum_condensed = 0.0;         // sum 2^(t(n+1)) g~(psi(2^t)/2^t)
    double per_term_const = 0.0;        // (eta/2)^m
    double max_term_ratio_error = 0.0;  // worst |term1/(term2*const) - 1|
};

RegularityReport regularity_and_condensation(int n, int m, int d, double eta,
                                             const ApproxFunction& psi,
                                             const approx::DimensionFunction& g, int t_max);

// Smallest eta in the dyadic sweep {2^-4, ..., 2^4} whose covering fraction
// meets k0 on the reference ball at every listed level.
double calibrate_eta(const SystemMap& system, const UbiquityConfig& base,
                     const std::vector<int>& levels,
                     const std::vector<std::pair<Rat, Rat>>& ball, long long samples = 20000,
                     uint64_t seed = 1);

}  // namespace smallforms::ubiquity
