#include "smallforms/approx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "smallforms/errors.hpp"
#include "smallforms/stats.hpp"

namespace smallforms::approx {

ApproxFunction ApproxFunction::power_law(double c, double tau) {
    if (!(c > 0)) throw ConfigError("power law needs c > 0");
    if (tau < 0) throw ConfigError("power law needs tau >= 0");
    ApproxFunction f;
    f.kind_ = PsiKind::PowerLaw;
    f.c_ = c;
    f.tau_ = tau;
    f.monotone_ = true;
    return f;
}

ApproxFunction ApproxFunction::log_power_law(double c, double tau, double kappa) {
    if (!(c > 0)) throw ConfigError("log power law needs c > 0");
    if (tau < 0) throw ConfigError("log power law needs tau >= 0");
    ApproxFunction f;
    f.kind_ = PsiKind::LogPowerLaw;
    f.c_ = c;
    f.tau_ = tau;
    f.kappa_ = kappa;
    f.monotone_ = kappa >= 0.0;
    return f;
}

ApproxFunction ApproxFunction::tabulated(std::vector<std::pair<long long, double>> table) {
    if (table.empty()) throw ConfigError("tabulated psi needs at least one point");
    for (size_t i = 0; i < table.size(); ++i) {
        if (table[i].second < 0) throw ConfigError("tabulated psi needs values >= 0");
        if (i > 0) {
            if (table[i].first <= table[i - 1].first)
                throw ConfigError("tabulated psi needs strictly increasing h");
            if (table[i].second > table[i - 1].second)
                throw ConfigError("tabulated psi must be monotone non-increasing");
        }
    }
    if (table[0].first < 1) throw ConfigError("tabulated psi needs h >= 1");
    ApproxFunction f;
    f.kind_ = PsiKind::Tabulated;
    f.table_ = std::move(table);
    f.monotone_ = true;
    return f;
}

ApproxFunction ApproxFunction::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open psi table: " + path);
    std::vector<std::pair<long long, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        long long h;
        double v;
        if (!(ss >> h >> v)) {
            if (rows.empty()) continue;  // header
            throw ConfigError("bad psi table row: " + line);
        }
        rows.emplace_back(h, v);
    }
    return tabulated(std::move(rows));
}

double ApproxFunction::evaluate(long long h) const {
    if (h < 1) throw ConfigError("psi is defined for h >= 1");
    switch (kind_) {
        case PsiKind::PowerLaw:
            return c_ * std::pow(double(h), -tau_);
        case PsiKind::LogPowerLaw:
            return c_ * std::pow(double(h), -tau_) * std::pow(1.0 + std::log(double(h)), -kappa_);
        case PsiKind::Tabulated: {
            if (h < table_.front().first)
                throw ConfigError("tabulated psi queried below first table point");
            auto it = std::upper_bound(
                table_.begin(), table_.end(), h,
                [](long long key, const std::pair<long long, double>& row) { return key < row.first; });
            return std::prev(it)->second;
        }
    }
    return 0.0;
}

double ApproxFunction::evaluate_real(double h) const {
    if (!(h >= 1.0)) throw ConfigError("psi is defined for h >= 1");
    switch (kind_) {
        case PsiKind::PowerLaw:
            return c_ * std::pow(h, -tau_);
        case PsiKind::LogPowerLaw:
            return c_ * std::pow(h, -tau_) * std::pow(1.0 + std::log(h), -kappa_);
        case PsiKind::Tabulated:
            return evaluate((long long)std::floor(h));
    }
    return 0.0;
}

Rat ApproxFunction::evaluate_exact(long long h) const { return rat_from_double(evaluate(h)); }

std::string ApproxFunction::describe() const {
    std::ostringstream ss;
    switch (kind_) {
        case PsiKind::PowerLaw:
            ss << "power(c=" << c_ << ",tau=" << tau_ << ")";
            break;
        case PsiKind::LogPowerLaw:
            ss << "logpower(c=" << c_ << ",tau=" << tau_ << ",kappa=" << kappa_ << ")";
            break;
        case PsiKind::Tabulated:
            ss << "table(" << table_.size() << " points)";
            break;
    }
    return ss.str();
}

DimensionFunction DimensionFunction::power(double s) {
    if (!(s > 0)) throw ConfigError("dimension function needs s > 0");
    DimensionFunction g;
    g.power_ = true;
    g.s_ = s;
    return g;
}

DimensionFunction DimensionFunction::sampled(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw ConfigError("sampled dimension function needs >= 2 points");
    for (size_t i = 0; i < table.size(); ++i) {
        if (!(table[i].first > 0) || !(table[i].second > 0))
            throw ConfigError("sampled dimension function needs positive entries");
        if (i > 0) {
            if (table[i].first <= table[i - 1].first)
                throw ConfigError("sampled dimension function needs increasing r");
            if (table[i].second < table[i - 1].second)
                throw ConfigError("dimension function must be increasing on the grid");
        }
    }
    DimensionFunction g;
    g.power_ = false;
    g.table_ = std::move(table);
    return g;
}

double DimensionFunction::evaluate(double r) const {
    if (r <= 0) return 0.0;
    if (power_) return std::pow(r, s_);
    // log-log interpolation between samples, edge-slope extrapolation
    const auto& t = table_;
    size_t i = 0;
    while (i + 2 < t.size() && t[i + 1].first < r) ++i;
    double x0 = std::log(t[i].first), x1 = std::log(t[i + 1].first);
    double y0 = std::log(t[i].second), y1 = std::log(t[i + 1].second);
    double slope = (y1 - y0) / (x1 - x0);
    return std::exp(y0 + slope * (std::log(r) - x0));
}

double DimensionFunction::reduced(double r, int d, int m) const {
    if (r <= 0) return 0.0;
    return std::pow(r, double(m - d)) * evaluate(r);
}

void DimensionFunction::validate_for(int d, int m) const {
    if (power_) {
        if (!(s_ - d + m > 0))
            throw ConfigError("reduced dimension function is not increasing (s <= d - m)");
        if (!(s_ <= d)) throw ConfigError("r^-m g~(r) is not non-increasing (s > d)");
        return;
    }
    double prev_red = -1.0, prev_ratio = -1.0;
    bool first = true;
    for (const auto& [r, gv] : table_) {
        (void)gv;
        double red = reduced(r, d, m);
        double ratio = red / std::pow(r, double(m));
        if (!first) {
            if (red < prev_red)
                throw ConfigError("reduced dimension function not increasing on grid");
            if (ratio > prev_ratio * (1.0 + 1e-12))
                throw ConfigError("r^-m g~(r) not non-increasing on grid");
        }
        prev_red = red;
        prev_ratio = ratio;
        first = false;
    }
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Convergent: return "Convergent";
        case Classification::Divergent: return "Divergent";
        case Classification::Undetermined: return "Undetermined";
    }
    return "?";
}

namespace {

// One khintchine term; power kinds go through a single pow to dodge
// intermediate overflow of h^(n-m).
double khintchine_term(const ApproxFunction& psi, int n, int m, long long h) {
    if (psi.kind() == PsiKind::PowerLaw)
        return std::pow(psi.c(), m) * std::pow(double(h), double(n - m) - m * psi.tau());
    if (psi.kind() == PsiKind::LogPowerLaw)
        return std::pow(psi.c(), m) * std::pow(double(h), double(n - m) - m * psi.tau()) *
               std::pow(1.0 + std::log(double(h)), -m * psi.kappa());
    double v = psi.evaluate(h);
    return std::pow(double(h), double(n - m)) * std::pow(v, double(m));
}

}  // namespace

double partial_sum_khintchine(const ApproxFunction& psi, int n, int m, long long H_max) {
    if (!(n >= m && m >= 1)) throw ConfigError("need n >= m >= 1");
    if (H_max < 1) throw ConfigError("need H_max >= 1");
    CompensatedSum acc;
    for (long long h = 1; h <= H_max; ++h) acc.add(khintchine_term(psi, n, m, h));
    return acc.value();
}

SumVerdict classify(const ApproxFunction& psi, int n, int m, const std::vector<long long>& cutoffs) {
    if (!(n >= m && m >= 1)) throw ConfigError("need n >= m >= 1");
    SumVerdict v;
    v.threshold = double(n + 1 - m) / double(m);
    for (long long cut : cutoffs) v.partial_sums.emplace_back(cut, partial_sum_khintchine(psi, n, m, cut));
    if (psi.kind() == PsiKind::Tabulated) {
        v.classification = Classification::Undetermined;
        return v;
    }
    v.index = double(n - m) - m * psi.tau() + 1.0;
    if (v.index < 0)
        v.classification = Classification::Convergent;
    else if (v.index > 0)
        v.classification = Classification::Divergent;
    else {
        v.boundary = true;
        if (psi.kind() == PsiKind::LogPowerLaw && m * psi.kappa() > 1.0)
            v.classification = Classification::Convergent;
        else
            v.classification = Classification::Divergent;
    }
    return v;
}

double partial_sum_hausdorff(const ApproxFunction& psi, int n, int m, double s, long long R_max) {
    if (!(n >= m && m >= 1)) throw ConfigError("need n >= m >= 1");
    if (!(s > double(n) * m && s <= double(m) * (n + 1)))
        throw ConfigError("need nm < s <= m(n+1)");
    if (R_max < 1) throw ConfigError("need R_max >= 1");
    double e_psi = s - double(n) * m;
    double e_r = double(n + 1) * m - s;
    CompensatedSum acc;
    for (long long r = 1; r <= R_max; ++r) {
        double v = psi.evaluate(r);
        double term = (v == 0.0) ? 0.0 : std::pow(v, e_psi) * std::pow(double(r), e_r);
        acc.add(term);
    }
    return acc.value();
}

DivergencePartialSums partial_sum_divergence_g(const ApproxFunction& psi,
                                               const DimensionFunction& g, int n, int d, int m,
                                               long long H_max) {
    if (!psi.monotone_non_increasing())
        throw ConfigError("divergence sum needs monotone psi");
    g.validate_for(d, m);
    if (H_max < 1) throw ConfigError("need H_max >= 1");
    DivergencePartialSums out;
    CompensatedSum direct;
    for (long long h = 1; h <= H_max; ++h) {
        double r = psi.evaluate(h) / double(h);
        direct.add(r > 0 ? std::pow(double(h), double(n)) * g.reduced(r, d, m) : 0.0);
    }
    out.direct = direct.value();
    CompensatedSum cond;
    for (long long p2 = 1, t = 0; p2 <= H_max; p2 <<= 1, ++t) {
        double r = psi.evaluate(p2) / double(p2);
        cond.add(r > 0 ? std::pow(2.0, double(t) * (n + 1)) * g.reduced(r, d, m) : 0.0);
    }
    out.condensed = cond.value();
    return out;
}

LowerOrder lower_order(const ApproxFunction& psi, const std::vector<long long>& h_grid) {
    if (h_grid.size() < 3) throw ConfigError("lower_order needs >= 3 grid points");
    for (size_t i = 0; i < h_grid.size(); ++i) {
        if (h_grid[i] == 1) throw ConfigError("lower_order grid must exclude h = 1");
        if (i > 0 && h_grid[i] <= h_grid[i - 1])
            throw ConfigError("lower_order grid must be strictly increasing");
    }
    if (psi.kind() != PsiKind::Tabulated) return {psi.tau(), true};
    size_t tail_start = h_grid.size() / 2;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = tail_start; i < h_grid.size(); ++i) {
        double v = psi.evaluate(h_grid[i]);
        if (v <= 0) continue;  // -log 0 would be +inf; skip
        best = std::min(best, -std::log(v) / std::log(double(h_grid[i])));
    }
    if (!std::isfinite(best)) throw ConfigError("lower_order: psi vanishes on the whole tail");
    return {best, false};
}

double dimension_lower_bound(int n, int m, int d, double tau) {
    if (!(n >= m && m >= 1 && d >= m)) throw ConfigError("need n >= m >= 1 and d >= m");
    if (tau == -1.0) throw ConfigError("tau = -1 is a pole");
    if (tau < 0) throw ConfigError("need tau >= 0");
    return std::min(double(d), double(n + 1) / (tau + 1.0) + double(d) - double(m));
}

Rat dimension_lower_bound_exact(int n, int m, int d, const Rat& tau) {
    if (!(n >= m && m >= 1 && d >= m)) throw ConfigError("need n >= m >= 1 and d >= m");
    if (tau == Rat(-1)) throw ConfigError("tau = -1 is a pole");
    if (tau < 0) throw ConfigError("need tau >= 0");
    Rat alt = Rat(n + 1) / (tau + 1) + Rat(d) - Rat(m);
    return std::min(Rat(d), alt);
}

}  // namespace smallforms::approx
