#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallforms/approx.hpp"
#include "smallforms/curves.hpp"
#include "smallforms/matrix.hpp"
#include "smallforms/rational.hpp"

namespace smallforms::solver {

using approx::ApproxFunction;
using curves::SystemMap;

// Nonzero integer coefficient vector, sign-normalized so the first nonzero
// coefficient is positive.
struct Form {
    std::vector<Int> a;

    Int height() const { return sup_norm(a); }
    static std::vector<Int> canonical(std::vector<Int> a);
    bool operator==(const Form& o) const { return a == o.a; }
};

// (H, lexicographic coefficients) order
bool form_less(const Form& x, const Form& y);

struct SolutionRecord {
    Form form;
    long long height = 0;
    int block_t = 0;  // 2^t <= H < 2^(t+1)
    std::vector<Rat> residuals_exact;          // |F_j(x_j)|
    std::vector<double> residuals;             // double views of the above
    std::vector<std::vector<double>> derivative_profile;  // [j][order], order <= n
};

enum class Backend { Exhaustive, Lattice, Hybrid };

struct SolverConfig {
    Backend backend = Backend::Exhaustive;
    long long H_max = 16;
    double work_limit = 1e9;          // exhaustive candidate-box budget
    long long node_limit = 50000000;  // lattice search tree budget
    double delta_lll = 0.99;
    double radius_multiplier = 1.0;   // >= 1; scales the enumeration ball
    int exhaustive_t_cap = 7;         // hybrid: blocks t <= cap scan, rest lattice
    bool parallel = true;
    bool include_both_signs = false;  // diagnostic: emit a and -a
};

// Exact evaluation data for a fixed system and rational point: row-cleared
// integer coordinates N[j][i] = f_{j,i}(x_j) * D_j and strict thresholds
// T[j][H] with |F_j(x_j)| < psi(H)  <=>  |sum_i a_i N[j][i]| <= T[j][H].
class EvalContext {
  public:
    EvalContext(const SystemMap& system, std::vector<Rat> x);

    const SystemMap& system() const { return *system_; }
    const std::vector<Rat>& x() const { return x_; }
    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<std::vector<Rat>>& fx() const { return fx_; }
    const std::vector<Int>& row_denoms() const { return D_; }
    const std::vector<std::vector<Int>>& N() const { return N_; }

    void build_thresholds(const ApproxFunction& psi, long long H_max);
    long long threshold_H_max() const { return thr_H_max_; }
    // strict residual test at exact height H (thresholds must cover H)
    bool accepts(const std::vector<Int>& a, long long H) const;
    const Int& threshold(int j, long long H) const { return T_[j][H]; }
    // max_{H' in [H, H_max]} T[j][H']
    const Int& threshold_suffix(int j, long long H) const { return Tsfx_[j][H]; }

    // residuals |F_j| as exact rationals
    std::vector<Rat> residuals(const std::vector<Int>& a) const;

  private:
    const SystemMap* system_;
    std::vector<Rat> x_;
    int n_, m_;
    std::vector<std::vector<Rat>> fx_;
    std::vector<Int> D_;
    std::vector<std::vector<Int>> N_;
    std::vector<std::vector<Int>> T_, Tsfx_;
    long long thr_H_max_ = 0;
};

// Every canonical form with 1 <= H <= cfg.H_max and max_j |F_j(x_j)| < psi(H),
// sorted by (H, lex).  Backend per cfg; the lattice route requires monotone
// psi and reproduces the exhaustive set exactly.
std::vector<SolutionRecord> enumerate_solutions(const SystemMap& system, const std::vector<Rat>& x,
                                                const ApproxFunction& psi, const SolverConfig& cfg);

// Plain reference scan (serial, no pruning); the oracle the fast paths are
// tested against.
std::vector<SolutionRecord> enumerate_solutions_reference(const SystemMap& system,
                                                          const std::vector<Rat>& x,
                                                          const ApproxFunction& psi,
                                                          long long H_max);

struct BlockRow {
    int t = 0;
    long long count = 0;
    double heuristic = 0.0;  // sum over the block of H^(n-m) psi(H)^m
};

std::vector<BlockRow> count_by_dyadic_block(const SystemMap& system, const std::vector<Rat>& x,
                                            const ApproxFunction& psi, int t_max,
                                            const SolverConfig& cfg);

struct DirichletWitness {
    SolutionRecord record;
    double value_bound = 0.0;   // C * 2^(-(n+1-m)t/m)
    double height_cap = 0.0;    // delta0 * 2^t
    double C = 0.0;
};

// delta0 <= 0 selects the default ((n+1) M)^-1.
DirichletWitness dirichlet_witness(const SystemMap& system, const std::vector<Rat>& x, int t,
                                   double delta0, const SolverConfig& cfg);

double default_delta0(const SystemMap& system);

// F_j^(i)(x_j) for 0 <= i <= max_order, exact; entry (j, i).
RatMatrix evaluate_form(const Form& form, const SystemMap& system, const std::vector<Rat>& x,
                        int max_order);

SolutionRecord make_record(const EvalContext& ctx, Form form);

}  // namespace smallforms::solver
