#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smallforms/rational.hpp"

namespace smallforms::approx {

enum class PsiKind { PowerLaw, LogPowerLaw, Tabulated };

// Approximation function psi on positive integer heights.
//   power law:      c * h^-tau            (c > 0, tau >= 0)
//   log-corrected:  c * h^-tau * (1 + ln h)^-kappa
//   tabulated:      right-continuous step extension of a sample table,
//                   monotone non-increasing, values >= 0
class ApproxFunction {
  public:
    static ApproxFunction power_law(double c, double tau);
    static ApproxFunction log_power_law(double c, double tau, double kappa);
    static ApproxFunction tabulated(std::vector<std::pair<long long, double>> table);
    // Two-column CSV (h, value); optional header; strictly increasing h.
    static ApproxFunction tabulated_from_csv(const std::string& path);

    PsiKind kind() const { return kind_; }
    double c() const { return c_; }
    double tau() const { return tau_; }
    double kappa() const { return kappa_; }
    bool monotone_non_increasing() const { return monotone_; }

    double evaluate(long long h) const;       // h >= 1
    double evaluate_real(double h) const;     // formula kinds at real argument;
                                              // tabulated uses floor(h)
    // evaluate(h) as an exact rational of the double value; the library's
    // comparison convention everywhere.
    Rat evaluate_exact(long long h) const;

    std::string describe() const;

  private:
    ApproxFunction() = default;
    PsiKind kind_ = PsiKind::PowerLaw;
    double c_ = 1.0, tau_ = 0.0, kappa_ = 0.0;
    std::vector<std::pair<long long, double>> table_;
    bool monotone_ = true;
};

// Dimension function g with reduced form g~(r) = r^(m-d) g(r).
class DimensionFunction {
  public:
    static DimensionFunction power(double s);  // g(r) = r^s, s > 0
    static DimensionFunction sampled(std::vector<std::pair<double, double>> table);

    bool is_power() const { return power_; }
    double s() const { return s_; }
    double evaluate(double r) const;
    // r^(m-d) g(r)
    double reduced(double r, int d, int m) const;
    // grid checks: g increasing, g -> 0, and r^-m g~ non-increasing
    void validate_for(int d, int m) const;

  private:
    DimensionFunction() = default;
    bool power_ = true;
    double s_ = 1.0;
    std::vector<std::pair<double, double>> table_;
};

enum class Classification { Convergent, Divergent, Undetermined };

struct SumVerdict {
    Classification classification = Classification::Undetermined;
    double index = 0.0;       // n - m - m*tau + 1; sum behaves like sum h^index / h
    double threshold = 0.0;   // (n + 1 - m) / m
    bool boundary = false;
    std::vector<std::pair<long long, double>> partial_sums;  // (H_max, value)
};

const char* to_string(Classification c);

// S_{n,m}(psi) truncated at H_max, compensated ascending accumulation.
double partial_sum_khintchine(const ApproxFunction& psi, int n, int m, long long H_max);

SumVerdict classify(const ApproxFunction& psi, int n, int m,
                    const std::vector<long long>& cutoffs = {});

// sum_{r<=R_max} psi(r)^(s-nm) r^((n+1)m-s), for nm < s <= m(n+1).
double partial_sum_hausdorff(const ApproxFunction& psi, int n, int m, double s, long long R_max);

struct DivergencePartialSums {
    double direct = 0.0;     // sum h^n g~(psi(h)/h)
    double condensed = 0.0;  // sum over 2^t <= H_max of 2^(t(n+1)) g~(psi(2^t)/2^t)
};

DivergencePartialSums partial_sum_divergence_g(const ApproxFunction& psi,
                                               const DimensionFunction& g, int n, int d, int m,
                                               long long H_max);

struct LowerOrder {
    double value = 0.0;
    bool exact = false;  // true when read off a formula kind
};

// liminf of -log psi(h) / log h estimated on the tail of the grid.
LowerOrder lower_order(const ApproxFunction& psi, const std::vector<long long>& h_grid);

// min{d, (n+1)/(tau+1) + d - m}
double dimension_lower_bound(int n, int m, int d, double tau);
Rat dimension_lower_bound_exact(int n, int m, int d, const Rat& tau);

}  // namespace smallforms::approx
