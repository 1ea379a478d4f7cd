#include "smallforms/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smallforms/errors.hpp"
#include "smallforms/lattice.hpp"
#include "smallforms/stats.hpp"

namespace smallforms::solver {

std::vector<Int> Form::canonical(std::vector<Int> a) {
    for (const Int& c : a) {
        if (c == 0) continue;
        if (c < 0)
            for (Int& v : a) v = -v;
        break;
    }
    return a;
}

bool form_less(const Form& x, const Form& y) {
    Int hx = x.height(), hy = y.height();
    if (hx != hy) return hx < hy;
    return std::lexicographical_compare(x.a.begin(), x.a.end(), y.a.begin(), y.a.end());
}

EvalContext::EvalContext(const SystemMap& system, std::vector<Rat> x)
    : system_(&system), x_(std::move(x)), n_(system.n()), m_(system.m()) {
    if (!system.interior(x_)) throw ConfigError("evaluation point must be interior to the domain");
    fx_.resize(m_);
    D_.resize(m_);
    N_.resize(m_);
    for (int j = 0; j < m_; ++j) {
        fx_[j].resize(n_ + 1);
        for (int i = 0; i <= n_; ++i) fx_[j][i] = system.curve(j).eval(i, 0, x_[j]);
        Int d(1);
        for (const Rat& v : fx_[j]) {
            Int den = v.get_den(), g;
            mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), den.get_mpz_t());
            d = d / g * den;
        }
        D_[j] = d;
        N_[j].resize(n_ + 1);
        for (int i = 0; i <= n_; ++i) N_[j][i] = fx_[j][i].get_num() * (d / fx_[j][i].get_den());
    }
}

void EvalContext::build_thresholds(const ApproxFunction& psi, long long H_max) {
    if (H_max < 1) throw ConfigError("need H_max >= 1");
    thr_H_max_ = H_max;
    T_.assign(m_, std::vector<Int>(H_max + 1));
    Tsfx_.assign(m_, std::vector<Int>(H_max + 1));
    for (int j = 0; j < m_; ++j) {
        for (long long h = 1; h <= H_max; ++h) {
            // |r| <= T  <=>  |r|/D < psi(h), strict
            Rat bound = rat_from_double(psi.evaluate(h)) * Rat(D_[j]);
            T_[j][h] = strict_floor(bound);
        }
        Tsfx_[j][H_max] = T_[j][H_max];
        for (long long h = H_max - 1; h >= 1; --h)
            Tsfx_[j][h] = std::max(T_[j][h], Tsfx_[j][h + 1]);
    }
}

bool EvalContext::accepts(const std::vector<Int>& a, long long H) const {
    if (H < 1 || H > thr_H_max_) return false;
    for (int j = 0; j < m_; ++j) {
        Int r(0);
        for (int i = 0; i <= n_; ++i) r += a[i] * N_[j][i];
        if (abs(r) > T_[j][H]) return false;
    }
    return true;
}

std::vector<Rat> EvalContext::residuals(const std::vector<Int>& a) const {
    std::vector<Rat> out(m_);
    for (int j = 0; j < m_; ++j) {
        Rat r(0);
        for (int i = 0; i <= n_; ++i) r += Rat(a[i]) * fx_[j][i];
        out[j] = abs(r);
    }
    return out;
}

namespace {

inline double to_dbl(long long v) { return double(v); }
inline double to_dbl(const Int& v) { return v.get_d(); }

template <typename W>
W w_cast(long long v);
template <>
long long w_cast<long long>(long long v) {
    return v;
}
template <>
Int w_cast<Int>(long long v) {
    return Int((long)v);
}

// Exhaustive windowed scan.  Outer dimensions run over full ranges while the
// inner dimension is restricted to the residual window of the best-scaled
// row; every candidate is confirmed with exact integer comparisons, so the
// window math only has to over-cover.
template <typename W>
struct Scanner {
    const EvalContext* ctx;
    long long H;  // height cap
    bool both_signs;
    int n, m, inner, wrow;
    std::vector<int> outer;                // dims in loop order
    std::vector<std::vector<W>> N;         // [j][i]
    std::vector<std::vector<W>> T, Tsfx;   // [j][h]
    std::vector<long long> a;              // current coefficients
    std::vector<W> prefix;                 // per-row partial residual over outer dims
    std::vector<Form> out;

    void init(const EvalContext& c, long long H_max, bool signs) {
        ctx = &c;
        H = H_max;
        both_signs = signs;
        n = c.n();
        m = c.m();
        N.assign(m, {});
        T.assign(m, {});
        Tsfx.assign(m, {});
        for (int j = 0; j < m; ++j) {
            N[j].resize(n + 1);
            for (int i = 0; i <= n; ++i) N[j][i] = convert(c.N()[j][i]);
            T[j].resize(H_max + 1);
            Tsfx[j].resize(H_max + 1);
            for (long long h = 1; h <= H_max; ++h) {
                T[j][h] = convert(c.threshold(j, h));
                Tsfx[j][h] = convert(c.threshold_suffix(j, h));
            }
        }
        // the inner dimension takes the entry of largest magnitude, which
        // keeps windows narrow and never degenerate unless the whole row is
        double best = -1.0;
        inner = 0;
        wrow = 0;
        for (int j = 0; j < m; ++j)
            for (int i = 0; i <= n; ++i) {
                double v = std::abs(to_dbl(N[j][i]));
                if (v > best) {
                    best = v;
                    inner = i;
                    wrow = j;
                }
            }
        for (int i = 0; i <= n; ++i)
            if (i != inner) outer.push_back(i);
        a.assign(n + 1, 0);
        prefix.assign(m, w_cast<W>(0));
    }

    static W convert(const Int& v);

    bool canonical_sign_ok() const {
        for (int i = 0; i <= n; ++i) {
            if (a[i] == 0) continue;
            return a[i] > 0;
        }
        return false;  // zero vector
    }

    void emit(long long height) {
        Form f;
        f.a.resize(n + 1);
        for (int i = 0; i <= n; ++i) f.a[i] = (long)a[i];
        out.push_back(f);
        (void)height;
    }

    void try_candidate(long long v, long long preH) {
        long long height = std::max(preH, std::llabs(v));
        if (height < 1 || height > H) return;
        a[inner] = v;
        bool sign_ok = canonical_sign_ok();
        if (!sign_ok && !both_signs) return;
        for (int j = 0; j < m; ++j) {
            W r = prefix[j] + w_cast<W>(v) * N[j][inner];
            if (r < 0) r = -r;
            if (r > T[j][height]) return;
        }
        emit(height);
    }

    void inner_loop(long long preH) {
        const W& Ts = preH >= 1 ? Tsfx[wrow][preH] : Tsfx[wrow][1];
        if (Ts < 0) return;
        double Nn = to_dbl(N[wrow][inner]);
        if (std::abs(Nn) < 1e-300) {  // whole row vanishes only if x is a joint root
            for (long long v = -H; v <= H; ++v) try_candidate(v, preH);
            return;
        }
        double p = to_dbl(prefix[wrow]);
        double tsd = to_dbl(Ts);
        double b1 = (-tsd - p) / Nn, b2 = (tsd - p) / Nn;
        if (b1 > b2) std::swap(b1, b2);
        double widen = 2.0 + 1e-9 * std::max(std::abs(b1), std::abs(b2));
        long long lo = (long long)std::floor(b1 - widen);
        long long hi = (long long)std::ceil(b2 + widen);
        if (lo < -H) lo = -H;
        if (hi > H) hi = H;
        for (long long v = lo; v <= hi; ++v) try_candidate(v, preH);
    }

    void walk(size_t depth, long long preH) {
        if (depth == outer.size()) {
            inner_loop(preH);
            return;
        }
        int dim = outer[depth];
        for (int j = 0; j < m; ++j) prefix[j] += w_cast<W>(-H) * N[j][dim];
        for (long long v = -H; v <= H; ++v) {
            a[dim] = v;
            walk(depth + 1, std::max(preH, std::llabs(v)));
            if (v < H)
                for (int j = 0; j < m; ++j) prefix[j] += N[j][dim];
        }
        for (int j = 0; j < m; ++j) prefix[j] -= w_cast<W>(H) * N[j][dim];
        a[dim] = 0;
    }

    // positions the scanner at first outer dim = v and walks the rest
    void walk_task(long long v) {
        int dim = outer[0];
        a[dim] = v;
        for (int j = 0; j < m; ++j) prefix[j] += w_cast<W>(v) * N[j][dim];
        walk(1, std::llabs(v));
        for (int j = 0; j < m; ++j) prefix[j] -= w_cast<W>(v) * N[j][dim];
        a[dim] = 0;
    }
};

template <>
long long Scanner<long long>::convert(const Int& v) {
    if (!v.fits_slong_p()) throw OverflowError("int64 scanner fed oversized value");
    return v.get_si();
}
template <>
Int Scanner<Int>::convert(const Int& v) {
    return v;
}

bool fits_int64(const EvalContext& ctx, long long H_max) {
    Int maxN(0);
    for (int j = 0; j < ctx.m(); ++j)
        for (int i = 0; i <= ctx.n(); ++i) maxN = std::max(maxN, Int(abs(ctx.N()[j][i])));
    Int bound = maxN * Int(ctx.n() + 1) * Int((long)(H_max + 1));
    Int cap(1);
    mpz_mul_2exp(cap.get_mpz_t(), cap.get_mpz_t(), 62);
    if (bound >= cap) return false;
    for (int j = 0; j < ctx.m(); ++j)
        for (long long h = 1; h <= H_max; ++h)
            if (abs(ctx.threshold(j, h)) >= cap) return false;
    return true;
}

void check_box_budget(int n, long long H_max, double work_limit) {
    double box = std::pow(2.0 * double(H_max) + 1.0, double(n + 1));
    if (box > work_limit) {
        std::ostringstream ss;
        ss << "exhaustive box of " << box << " candidates exceeds the work limit " << work_limit;
        throw WorkLimitError(ss.str());
    }
}

template <typename W>
std::vector<Form> run_scan(const EvalContext& ctx, long long H_max, const SolverConfig& cfg) {
    long long tasks = 2 * H_max + 1;
    std::vector<std::vector<Form>> per_task((size_t)tasks);
    Scanner<W> proto;
    proto.init(ctx, H_max, cfg.include_both_signs);
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel) firstprivate(proto)
    for (long long ti = 0; ti < tasks; ++ti) {
        proto.out.clear();
        proto.walk_task(ti - H_max);
        per_task[(size_t)ti] = proto.out;
    }
    std::vector<Form> all;
    for (auto& v : per_task)
        for (Form& f : v) all.push_back(std::move(f));
    return all;
}

std::vector<Form> scan_exhaustive(const EvalContext& ctx, long long H_max, const SolverConfig& cfg) {
    check_box_budget(ctx.n(), H_max, cfg.work_limit);
    if (fits_int64(ctx, H_max)) return run_scan<long long>(ctx, H_max, cfg);
    return run_scan<Int>(ctx, H_max, cfg);
}

// Per-block lattice search: scale residual rows by the block maximum of psi
// and coefficient rows by 2^(t+1); solutions land strictly inside the unit
// sup-ball, which sits inside the L2 ball of radius sqrt(m+n+1).
std::vector<Form> scan_lattice_block(const EvalContext& ctx, const ApproxFunction& psi, int t,
                                     long long H_max, const SolverConfig& cfg) {
    int n = ctx.n(), m = ctx.m();
    long long lo = 1LL << t;
    long long hi = std::min(H_max, (1LL << (t + 1)) - 1);
    if (lo > hi) return {};
    double block_psi_max = psi.evaluate(lo);
    if (!(block_psi_max > 0)) return {};
    Rat scale_f = Rat(1) / rat_from_double(block_psi_max);
    Rat scale_a = Rat(1, 1);
    {
        Int two_t1(1);
        mpz_mul_2exp(two_t1.get_mpz_t(), two_t1.get_mpz_t(), t + 1);
        scale_a = Rat(1, two_t1);
        scale_a.canonicalize();
    }

    lattice::Basis basis;
    basis.cols.assign(n + 1, std::vector<Rat>(m + n + 1, Rat(0)));
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j < m; ++j) basis.cols[i][j] = ctx.fx()[j][i] * scale_f;
        basis.cols[i][m + i] = scale_a;
    }
    lattice::EnumOptions opts;
    double mult = std::max(1.0, cfg.radius_multiplier);
    opts.radius_sq = double(m + n + 1) * mult * mult;
    opts.node_limit = cfg.node_limit;

    std::vector<Form> out;
    for (const auto& cand : lattice::enumerate_ball(basis, opts)) {
        std::vector<Int> a(n + 1);
        long long height = 0;
        for (int i = 0; i <= n; ++i) {
            a[i] = (long)cand[i];
            height = std::max(height, std::llabs(cand[i]));
        }
        if (height < lo || height > hi) continue;
        bool canon = false;
        for (int i = 0; i <= n; ++i) {
            if (a[i] == 0) continue;
            canon = a[i] > 0;
            break;
        }
        if (!canon && !cfg.include_both_signs) continue;
        if (!ctx.accepts(a, height)) continue;
        out.push_back({std::move(a)});
    }
    return out;
}

std::vector<Form> collect(const EvalContext& ctx, const ApproxFunction& psi, long long H_max,
                          const SolverConfig& cfg) {
    std::vector<Form> forms;
    auto lattice_blocks = [&](int t_from) {
        if (!psi.monotone_non_increasing())
            throw ConfigError("lattice backend requires monotone psi");
        for (int t = t_from; (1LL << t) <= H_max; ++t) {
            std::vector<Form> blk = scan_lattice_block(ctx, psi, t, H_max, cfg);
            for (Form& f : blk) forms.push_back(std::move(f));
        }
    };
    switch (cfg.backend) {
        case Backend::Exhaustive: {
            forms = scan_exhaustive(ctx, H_max, cfg);
            break;
        }
        case Backend::Lattice: {
            lattice_blocks(0);
            break;
        }
        case Backend::Hybrid: {
            long long cap_h = std::min(H_max, (1LL << (cfg.exhaustive_t_cap + 1)) - 1);
            forms = scan_exhaustive(ctx, cap_h, cfg);
            lattice_blocks(cfg.exhaustive_t_cap + 1);
            break;
        }
    }
    std::sort(forms.begin(), forms.end(), form_less);
    forms.erase(std::unique(forms.begin(), forms.end(),
                            [](const Form& x, const Form& y) { return x.a == y.a; }),
                forms.end());
    return forms;
}

}  // namespace

SolutionRecord make_record(const EvalContext& ctx, Form form) {
    SolutionRecord rec;
    rec.height = sup_norm(form.a).get_si();
    rec.block_t = 63 - __builtin_clzll((unsigned long long)rec.height);
    rec.residuals_exact = ctx.residuals(form.a);
    for (const Rat& r : rec.residuals_exact) rec.residuals.push_back(rat_to_double(r));
    RatMatrix profile = evaluate_form(form, ctx.system(), ctx.x(), ctx.n());
    rec.derivative_profile.assign(ctx.m(), std::vector<double>(ctx.n() + 1, 0.0));
    for (int j = 0; j < ctx.m(); ++j)
        for (int i = 0; i <= ctx.n(); ++i)
            rec.derivative_profile[j][i] = std::abs(rat_to_double(profile.at(j, i)));
    rec.form = std::move(form);
    return rec;
}

std::vector<SolutionRecord> enumerate_solutions(const SystemMap& system, const std::vector<Rat>& x,
                                                const ApproxFunction& psi, const SolverConfig& cfg) {
    if (cfg.H_max < 1) throw ConfigError("need H_max >= 1");
    EvalContext ctx(system, x);
    ctx.build_thresholds(psi, cfg.H_max);
    std::vector<Form> forms = collect(ctx, psi, cfg.H_max, cfg);
    std::vector<SolutionRecord> out;
    out.reserve(forms.size());
    for (Form& f : forms) out.push_back(make_record(ctx, std::move(f)));
    return out;
}

std::vector<SolutionRecord> enumerate_solutions_reference(const SystemMap& system,
                                                          const std::vector<Rat>& x,
                                                          const ApproxFunction& psi,
                                                          long long H_max) {
    if (H_max < 1) throw ConfigError("need H_max >= 1");
    EvalContext ctx(system, x);
    ctx.build_thresholds(psi, H_max);
    int n = ctx.n();
    std::vector<Int> a(n + 1, Int((long)-H_max));
    std::vector<SolutionRecord> out;
    // plain odometer over the full box; canonical filter; exact residuals
    bool done = false;
    while (!done) {
        int first = -1;
        for (int i = 0; i <= n; ++i)
            if (a[i] != 0) {
                first = i;
                break;
            }
        if (first >= 0 && a[first] > 0) {
            Int h = sup_norm(a);
            long long H = h.get_si();
            if (ctx.accepts(a, H)) out.push_back(make_record(ctx, Form{a}));
        }
        int d = 0;
        while (d <= n && a[d] == (long)H_max) {
            a[d] = (long)-H_max;
            ++d;
        }
        if (d > n)
            done = true;
        else
            a[d] += 1;
    }
    std::sort(out.begin(), out.end(),
              [](const SolutionRecord& p, const SolutionRecord& q) { return form_less(p.form, q.form); });
    return out;
}

std::vector<BlockRow> count_by_dyadic_block(const SystemMap& system, const std::vector<Rat>& x,
                                            const ApproxFunction& psi, int t_max,
                                            const SolverConfig& cfg) {
    if (t_max < 0) throw ConfigError("need t_max >= 0");
    long long H_max = (1LL << (t_max + 1)) - 1;
    SolverConfig c = cfg;
    c.H_max = H_max;
    EvalContext ctx(system, x);
    ctx.build_thresholds(psi, H_max);
    std::vector<Form> forms = collect(ctx, psi, H_max, c);

    std::vector<BlockRow> rows(t_max + 1);
    for (int t = 0; t <= t_max; ++t) {
        rows[t].t = t;
        CompensatedSum acc;
        for (long long h = 1LL << t; h < (2LL << t); ++h) {
            double v = psi.evaluate(h);
            double term = std::pow(double(h), double(ctx.n() - ctx.m()));
            acc.add(v == 0.0 ? 0.0 : term * std::pow(v, double(ctx.m())));
        }
        rows[t].heuristic = acc.value();
    }
    for (const Form& f : forms) {
        long long H = sup_norm(f.a).get_si();
        int t = 63 - __builtin_clzll((unsigned long long)H);
        if (t <= t_max) rows[t].count += 1;
    }
    return rows;
}

double default_delta0(const SystemMap& system) {
    return 1.0 / (double(system.n() + 1) * system.derivative_bound());
}

DirichletWitness dirichlet_witness(const SystemMap& system, const std::vector<Rat>& x, int t,
                                   double delta0, const SolverConfig& cfg) {
    if (t < 1) throw ConfigError("need t >= 1");
    if (delta0 <= 0) delta0 = default_delta0(system);
    if (delta0 > 1) throw ConfigError("need delta0 in (0, 1]");
    int n = system.n(), m = system.m();
    double q = double(n + 1 - m) / double(m);
    double M = system.derivative_bound();
    double C = 4.0 * double(n + 1) * M * std::pow(delta0, -q);
    double value_bound = C * std::pow(2.0, -q * double(t));
    Int two_t(1);
    mpz_mul_2exp(two_t.get_mpz_t(), two_t.get_mpz_t(), (mp_bitcnt_t)t);
    Rat height_cap = rat_from_double(delta0) * Rat(two_t);
    Int acap = floor_rat(height_cap);
    std::ostringstream ctx_msg;
    ctx_msg << "t=" << t << ", C=" << C;
    if (acap < 1)
        throw WitnessNotFoundError("empty admissible box (delta0 * 2^t < 1) at " + ctx_msg.str());

    EvalContext ctx(system, x);
    Rat vb = rat_from_double(value_bound);
    if (!(vb > 0)) throw WitnessNotFoundError("degenerate value bound at " + ctx_msg.str());

    lattice::Basis basis;
    basis.cols.assign(n + 1, std::vector<Rat>(m + n + 1, Rat(0)));
    Rat inv_vb = Rat(1) / vb;
    Rat inv_cap = Rat(1) / Rat(acap);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j < m; ++j) basis.cols[i][j] = ctx.fx()[j][i] * inv_vb;
        basis.cols[i][m + i] = inv_cap;
    }
    lattice::EnumOptions opts;
    double mult = std::max(1.0, cfg.radius_multiplier);
    opts.radius_sq = double(m + n + 1) * mult * mult;
    opts.node_limit = cfg.node_limit;

    std::vector<Int> strict_T(m);
    for (int j = 0; j < m; ++j) strict_T[j] = strict_floor(vb * Rat(ctx.row_denoms()[j]));

    std::optional<Form> best;
    for (const auto& cand : lattice::enumerate_ball(basis, opts)) {
        std::vector<Int> a(n + 1);
        for (int i = 0; i <= n; ++i) a[i] = (long)cand[i];
        if (sup_norm(a) > acap) continue;
        bool ok = true;
        for (int j = 0; j < m && ok; ++j) {
            Int r(0);
            for (int i = 0; i <= n; ++i) r += a[i] * ctx.N()[j][i];
            if (abs(r) > strict_T[j]) ok = false;
        }
        if (!ok) continue;
        Form f{Form::canonical(std::move(a))};
        if (!best || form_less(f, *best)) best = std::move(f);
    }
    if (!best)
        throw WitnessNotFoundError("no pigeonhole witness found at " + ctx_msg.str() +
                                   " (t may be below the existence threshold)");
    DirichletWitness w;
    w.value_bound = value_bound;
    w.height_cap = rat_to_double(height_cap);
    w.C = C;
    w.record = make_record(ctx, std::move(*best));
    return w;
}

RatMatrix evaluate_form(const Form& form, const SystemMap& system, const std::vector<Rat>& x,
                        int max_order) {
    if ((int)form.a.size() != system.n() + 1) throw ConfigError("coefficient count mismatch");
    if (max_order < 0 || max_order > system.n() + 1) throw ConfigError("order must be in [0, n+1]");
    if (!system.interior(x)) throw ConfigError("evaluation point must be interior to the domain");
    RatMatrix out(system.m(), max_order + 1);
    for (int j = 0; j < system.m(); ++j)
        for (int i = 0; i <= max_order; ++i) {
            Rat acc(0);
            for (int k = 0; k <= system.n(); ++k)
                acc += Rat(form.a[k]) * system.curve(j).eval(k, i, x[j]);
            out.at(j, i) = acc;
        }
    return out;
}

}  // namespace smallforms::solver
