#include "smallforms/ubiquity.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "smallforms/errors.hpp"
#include "smallforms/intervals.hpp"
#include "smallforms/rng.hpp"
#include "smallforms/stats.hpp"

namespace smallforms::ubiquity {

void UbiquityConfig::validate_in(const SystemMap& system) const {
    if ((int)omega.size() != system.m()) throw ConfigError("omega dimension mismatch");
    for (int j = 0; j < system.m(); ++j) {
        if (!(omega[j].first < omega[j].second)) throw ConfigError("omega needs lo < hi");
        if (omega[j].first < system.curve(j).lo() || omega[j].second > system.curve(j).hi())
            throw ConfigError("omega must lie inside the system domain");
    }
    if (!(eta > 0)) throw ConfigError("eta must be positive");
}

double UbiquityConfig::effective_delta0(const SystemMap& system) const {
    if (delta0 > 0) {
        if (delta0 > 1) throw ConfigError("delta0 must lie in (0, 1]");
        return delta0;
    }
    return solver::default_delta0(system);
}

double UbiquityConfig::effective_k0(const SystemMap& system) const {
    if (k0 > 0) return k0;
    return std::pow(2.0, -double(system.m()) - 1.0);
}

double rho_of(const SystemMap& system, double eta, double r) {
    return 2.0 / eta * std::pow(r, -double(system.n() + 1) / double(system.m()));
}

ResonantSet resonant_points(const SystemMap& system, const UbiquityConfig& cfg, int t) {
    cfg.validate_in(system);
    double d0 = cfg.effective_delta0(system);
    Rat cap_r = rat_from_double(d0) * rat_from_double(std::ldexp(1.0, t));
    Int cap = floor_rat(cap_r);
    if (cap < 1) throw ConfigError("resonant level too small: delta0 * 2^t < 1");
    long long H_cap = cap.get_si();
    int n = system.n(), m = system.m();

    // canonical forms, collected first so root isolation can run per form
    std::vector<std::vector<long>> forms;
    {
        std::vector<long> a(n + 1, (long)-H_cap);
        bool done = false;
        while (!done) {
            int first = -1;
            for (int i = 0; i <= n; ++i)
                if (a[i] != 0) {
                    first = i;
                    break;
                }
            if (first >= 0 && a[first] > 0) forms.push_back(a);
            int d = 0;
            while (d <= n && a[d] == (long)H_cap) {
                a[d] = (long)-H_cap;
                ++d;
            }
            if (d > n)
                done = true;
            else
                a[d] += 1;
        }
    }

    ResonantSet out;
    out.forms_scanned = (long long)forms.size();
    std::vector<std::vector<ResonantPoint>> per_form(forms.size());
    std::vector<int8_t> degenerate(forms.size(), 0);
    std::string task_error;

#pragma omp parallel for schedule(dynamic, 64) if (cfg.parallel)
    for (long long fi = 0; fi < (long long)forms.size(); ++fi) {
        try {
            std::vector<Int> a(n + 1);
            for (int i = 0; i <= n; ++i) a[i] = forms[(size_t)fi][i];
            long long H = sup_norm(a).get_si();
            std::vector<std::vector<RootBracket>> roots_per_axis(m);
            bool degen = false;
            for (int j = 0; j < m && !degen; ++j) {
                Poly F;
                for (int i = 0; i <= n; ++i)
                    F = F + system.curve(j).coords()[i] * Rat(a[i]);
                if (F.is_zero()) {
                    degen = true;
                    break;
                }
                Int den;
                IntPoly ip = int_poly_from(F, den);
                auto brs = isolate_roots(ip, cfg.omega[j].first, cfg.omega[j].second);
                for (RootBracket& br : brs) refine_bracket(ip, br, cfg.root_tol);
                roots_per_axis[j] = std::move(brs);
            }
            if (degen) {
                degenerate[(size_t)fi] = 1;
            } else {
                bool any_empty = false;
                for (int j = 0; j < m; ++j) any_empty |= roots_per_axis[j].empty();
                if (!any_empty) {
                    // cartesian product of per-axis roots
                    std::vector<size_t> idx(m, 0);
                    while (true) {
                        ResonantPoint rp;
                        rp.form.a = a;
                        rp.height = H;
                        rp.beta = double(H) / d0;
                        rp.level_t = t;
                        for (int j = 0; j < m; ++j) rp.gammas.push_back(roots_per_axis[j][idx[j]]);
                        per_form[(size_t)fi].push_back(std::move(rp));
                        int j = 0;
                        while (j < m && ++idx[j] == roots_per_axis[j].size()) {
                            idx[j] = 0;
                            ++j;
                        }
                        if (j == m) break;
                    }
                }
            }
        } catch (const std::exception& e) {
#pragma omp critical
            task_error = e.what();
        }
    }
    if (!task_error.empty()) throw Error("resonant point scan failed: " + task_error);
    for (size_t fi = 0; fi < forms.size(); ++fi) {
        out.forms_skipped_degenerate += degenerate[fi];
        for (ResonantPoint& rp : per_form[fi]) out.points.push_back(std::move(rp));
    }
    return out;
}

CoveringResult covering_fraction(const std::vector<ResonantPoint>& points,
                                 const SystemMap& system, const UbiquityConfig& cfg, int t,
                                 const std::vector<std::pair<Rat, Rat>>& ball, long long samples,
                                 uint64_t seed) {
    cfg.validate_in(system);
    if ((int)ball.size() != system.m()) throw ConfigError("ball dimension mismatch");
    for (int j = 0; j < system.m(); ++j) {
        if (!(ball[j].first < ball[j].second)) throw ConfigError("ball needs lo < hi");
        if (ball[j].first < cfg.omega[j].first || ball[j].second > cfg.omega[j].second)
            throw ConfigError("ball must lie inside omega");
    }
    CoveringResult res;
    if (points.empty()) {
        res.empty_warning = true;
        res.exact = system.m() == 1;
        return res;
    }
    double rho_d = rho_of(system, cfg.eta, std::ldexp(1.0, t));
    Rat rho = rat_from_double(rho_d);

    if (system.m() == 1) {
        std::vector<RatInterval> outer, inner;
        const Rat &blo = ball[0].first, &bhi = ball[0].second;
        for (const ResonantPoint& rp : points) {
            const RootBracket& g = rp.gammas[0];
            outer.push_back(intersect({g.lo - rho, g.hi + rho}, {blo, bhi}));
            RatInterval in{g.hi - rho, g.lo + rho};
            if (!in.empty()) inner.push_back(intersect(in, {blo, bhi}));
        }
        Rat blen = bhi - blo;
        Rat out_len = union_length(std::move(outer));
        Rat in_len = union_length(std::move(inner));
        res.exact = true;
        res.fraction_lower = rat_to_double(in_len / blen);
        res.fraction_upper = rat_to_double(out_len / blen);
        res.fraction = 0.5 * (res.fraction_lower + res.fraction_upper);
        return res;
    }

    // sup-norm ball cover, seeded Monte Carlo
    if (samples < 1) throw ConfigError("covering estimate needs samples >= 1");
    long long hits = 0;
    std::vector<std::vector<double>> centers(points.size(), std::vector<double>(system.m()));
    for (size_t i = 0; i < points.size(); ++i)
        for (int j = 0; j < system.m(); ++j)
            centers[i][j] = rat_to_double(points[i].gammas[j].mid());
    for (long long p = 0; p < samples; ++p) {
        SplitMix64 rng = stream_for(seed, (uint64_t)p);
        std::vector<double> x(system.m());
        for (int j = 0; j < system.m(); ++j)
            x[j] = rng.next_in(rat_to_double(ball[j].first), rat_to_double(ball[j].second));
        bool hit = false;
        for (const auto& c : centers) {
            double d = 0;
            for (int j = 0; j < system.m(); ++j) d = std::max(d, std::abs(x[j] - c[j]));
            if (d <= rho_d) {
                hit = true;
                break;
            }
        }
        hits += hit ? 1 : 0;
    }
    res.samples = samples;
    res.fraction = double(hits) / double(samples);
    auto ci = wilson95(hits, samples);
    res.fraction_lower = ci.lo;
    res.fraction_upper = ci.hi;
    return res;
}

MvtCheck mvt_inclusion_check(const std::vector<Rat>& x, const ResonantPoint& rp,
                             const ApproxFunction& psi, const SystemMap& system,
                             const UbiquityConfig& cfg) {
    cfg.validate_in(system);
    MvtCheck out;
    if ((int)x.size() != system.m()) throw ConfigError("point dimension mismatch");
    for (int j = 0; j < system.m(); ++j)
        if (x[j] < cfg.omega[j].first || x[j] > cfg.omega[j].second) {
            out.status = MvtCheck::Status::OutsideDomain;
            return out;
        }
    double d0 = cfg.effective_delta0(system);
    out.phi_beta = psi.evaluate_real(rp.beta) / rp.beta;
    Rat phi = rat_from_double(out.phi_beta);

    // strict sup-distance precondition, conservative against bracket width
    Rat dist_upper(0);
    for (int j = 0; j < system.m(); ++j) {
        Rat lo_side = abs(Rat(x[j] - rp.gammas[j].lo));
        Rat hi_side = abs(Rat(rp.gammas[j].hi - x[j]));
        Rat d = std::max(lo_side, hi_side);
        if (d > dist_upper) dist_upper = d;
    }
    if (!(dist_upper < phi)) {
        out.status = MvtCheck::Status::PreconditionViolated;
        return out;
    }

    long long H = rp.height;
    out.psi_H = psi.evaluate(H);
    Rat psiH = rat_from_double(out.psi_H);
    RatMatrix vals = solver::evaluate_form(rp.form, system, x, 0);
    Rat worst(0);
    for (int j = 0; j < system.m(); ++j) {
        Rat av = abs(vals.at(j, 0));
        if (av > worst) worst = av;
    }
    out.max_residual = rat_to_double(worst);
    out.holds = worst < psiH;
    out.predicted_bound =
        double(system.n() + 1) * system.derivative_bound() * d0 * out.psi_H;
    out.status = MvtCheck::Status::Ok;
    return out;
}

RegularityReport regularity_and_condensation(int n, int m, int d, double eta,
                                             const ApproxFunction& psi,
                                             const approx::DimensionFunction& g, int t_max) {
    if (t_max < 2) throw ConfigError("need t_max >= 2");
    if (!(eta > 0)) throw ConfigError("eta must be positive");
    if (!(n >= m && m >= 1)) throw ConfigError("need n >= m >= 1");
    RegularityReport rep;
    rep.rho_ratio = std::pow(2.0, -double(n + 1) / double(m));
    rep.per_term_const = std::pow(eta / 2.0, double(m));
    CompensatedSum s1, s2;
    for (int t = 1; t <= t_max; ++t) {
        double r = std::ldexp(1.0, t);
        double rho = 2.0 / eta * std::pow(r, -double(n + 1) / double(m));
        rep.rho.push_back(rho);
        double phi = psi.evaluate((long long)r) / r;
        double term2 = std::pow(2.0, double(t) * (n + 1)) * g.reduced(phi, d, m);
        double term1 = phi > 0 ? g.reduced(phi, d, m) / std::pow(rho, double(m)) : 0.0;
        s1.add(term1);
        s2.add(term2);
        if (term2 > 0) {
            double ratio = term1 / (term2 * rep.per_term_const);
            rep.max_term_ratio_error = std::max(rep.max_term_ratio_error, std::abs(ratio - 1.0));
        }
    }
    rep.sum_lemma = s1.value();
    rep.sum_condensed = s2.value();
    return rep;
}

double calibrate_eta(const SystemMap& system, const UbiquityConfig& base,
                     const std::vector<int>& levels,
                     const std::vector<std::pair<Rat, Rat>>& ball, long long samples,
                     uint64_t seed) {
    if (levels.empty()) throw ConfigError("calibration needs at least one level");
    double k0 = base.effective_k0(system);
    std::vector<std::vector<ResonantPoint>> pts;
    for (int t : levels) pts.push_back(resonant_points(system, base, t).points);
    for (int e = -4; e <= 4; ++e) {
        UbiquityConfig cfg = base;
        cfg.eta = std::ldexp(1.0, e);
        bool ok = true;
        for (size_t i = 0; i < levels.size() && ok; ++i) {
            CoveringResult cr =
                covering_fraction(pts[i], system, cfg, levels[i], ball, samples, seed);
            double achieved = cr.exact ? cr.fraction_lower : cr.fraction;
            if (achieved < k0) ok = false;
        }
        if (ok) return cfg.eta;
    }
    throw WitnessNotFoundError("no eta in the dyadic sweep reaches the covering target");
}

}  // namespace smallforms::ubiquity
