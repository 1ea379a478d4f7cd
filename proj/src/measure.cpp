#include "smallforms/measure.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "smallforms/errors.hpp"
#include "smallforms/intervals.hpp"
#include "smallforms/rng.hpp"

namespace smallforms::measure {

void SampleRegion::validate_in(const SystemMap& system) const {
    if ((int)box.size() != system.m()) throw ConfigError("region dimension mismatch");
    for (int j = 0; j < system.m(); ++j) {
        if (!(box[j].first < box[j].second)) throw ConfigError("region box needs lo < hi");
        if (box[j].first < system.curve(j).lo() || box[j].second > system.curve(j).hi())
            throw ConfigError("region box must lie inside the system domain");
    }
}

double SampleRegion::volume() const { return rat_to_double(volume_exact()); }

Rat SampleRegion::volume_exact() const {
    Rat v(1);
    for (const auto& [lo, hi] : box) v *= (hi - lo);
    return v;
}

// ---------------------------------------------------------------------------

int ThetaTuple::total() const {
    int t = 0;
    for (const auto& g : groups) t += (int)g.size();
    return t;
}

ThetaTuple ThetaTuple::from_groups(std::vector<std::vector<double>> groups) {
    if (groups.empty()) throw ConfigError("theta tuple needs at least one group");
    for (const auto& g : groups) {
        if (g.empty()) throw ConfigError("theta groups must be nonempty");
        for (double v : g)
            if (!(v > 0)) throw ConfigError("theta entries must be positive");
    }
    return ThetaTuple{std::move(groups)};
}

namespace {

// prefix <= 1 then suffix >= 1, entries equal to 1 free to go either way
bool group_property_m(const std::vector<double>& g) {
    bool seen_big = false;
    for (double v : g) {
        if (v > 1.0) seen_big = true;
        else if (v < 1.0 && seen_big) return false;
    }
    return true;
}

}  // namespace

ThetaDiagnostics theta_diagnostics(const ThetaTuple& tuple) {
    ThetaDiagnostics d;
    int k = tuple.total();
    double prod = 1.0;
    d.theta0 = tuple.groups[0][0];
    d.theta_inf = tuple.groups[0].back();
    for (const auto& g : tuple.groups) {
        for (double v : g) {
            if (!(v > 0)) throw ConfigError("theta entries must be positive");
            prod *= v;
        }
        d.theta0 = std::min(d.theta0, g.front());
        d.theta_inf = std::max(d.theta_inf, g.back());
        d.group_property_M.push_back(group_property_m(g));
    }
    d.theta_pow_k = prod;
    d.theta = std::pow(prod, 1.0 / double(k));
    d.property_M_ok =
        std::all_of(d.group_property_M.begin(), d.group_property_M.end(), [](bool b) { return b; });
    d.bound_applicable = d.property_M_ok && d.theta <= 1.0;
    if (d.bound_applicable)
        d.theta_hat_bound = std::max(d.theta0 / d.theta_pow_k, 1.0 / d.theta_inf);
    return d;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> flatten(const ThetaTuple& t) {
    std::vector<double> out;
    for (const auto& g : t.groups)
        for (double v : g) out.push_back(v);
    return out;
}

}  // namespace

MembershipResult small_form_membership(const SystemMap& system,
                                       const curves::SquareSystemSpec& spec,
                                       const std::vector<Rat>& x, const ThetaTuple& tuple,
                                       double work_limit, double det_floor) {
    spec.validate(system);
    int k = system.n() + 1;
    if (tuple.total() != k) throw ConfigError("theta tuple size must equal n + 1");
    std::vector<int> sizes;
    for (size_t j = 0; j < tuple.groups.size(); ++j) sizes.push_back((int)tuple.groups[j].size());
    for (size_t j = 0; j < spec.multiplicities.size(); ++j)
        if (j >= sizes.size() || sizes[j] != spec.multiplicities[j] + 1)
            throw ConfigError("theta group sizes must match the derivative multiplicities");

    RatMatrix G = curves::square_system_matrix(system, spec, x);
    Rat det = abs(G.det());
    if (det == 0 || det < rat_from_double(det_floor))
        throw DegenerateInputError("square system matrix is (near-)singular at x");
    Rat C2 = G.max_abs_entry();

    std::vector<double> theta = flatten(tuple);
    std::vector<Rat> theta_q(theta.size());
    Rat theta_max(0);
    for (size_t i = 0; i < theta.size(); ++i) {
        theta_q[i] = rat_from_double(theta[i]);
        theta_max = std::max(theta_max, theta_q[i]);
    }
    Rat kfact(1);
    for (int i = 2; i <= k; ++i) kfact *= i;
    Rat c2pow(1);
    for (int i = 0; i < k - 1; ++i) c2pow *= C2;
    Int H_box = floor_rat(theta_max * kfact * c2pow / det);

    MembershipResult res;
    res.height_box = H_box;
    if (H_box < 1) return res;  // only a = 0 could satisfy the system

    double box = std::pow(2.0 * rat_to_double(Rat(H_box)) + 1.0, double(k));
    if (box > work_limit)
        throw WorkLimitError("membership box exceeds the work limit");

    // exact row data with cleared denominators; |row . a| <= theta (non-strict)
    std::vector<std::vector<Int>> rows(k, std::vector<Int>(k));
    std::vector<Int> caps(k);
    for (int r = 0; r < k; ++r) {
        Int d(1);
        for (int c = 0; c < k; ++c) {
            Int den = G.at(r, c).get_den(), g;
            mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), den.get_mpz_t());
            d = d / g * den;
        }
        for (int c = 0; c < k; ++c)
            rows[r][c] = G.at(r, c).get_num() * (d / G.at(r, c).get_den());
        caps[r] = floor_rat(theta_q[r] * Rat(d));  // non-strict
        if (caps[r] < 0) return res;               // impossible row
    }

    std::vector<Int> a(k, -H_box);
    bool done = false;
    while (!done) {
        int first = -1;
        for (int i = 0; i < k; ++i)
            if (a[i] != 0) {
                first = i;
                break;
            }
        if (first >= 0 && a[first] > 0) {
            bool ok = true;
            for (int r = 0; r < k && ok; ++r) {
                Int v(0);
                for (int c = 0; c < k; ++c) v += rows[r][c] * a[c];
                if (abs(v) > caps[r]) ok = false;
            }
            if (ok) {
                res.member = true;
                res.witness = Form{a};
                return res;
            }
        }
        int d = 0;
        while (d < k && a[d] == H_box) {
            a[d] = -H_box;
            ++d;
        }
        if (d >= k)
            done = true;
        else
            a[d] += 1;
    }
    return res;
}

MeasureEstimate monte_carlo_membership_measure(const SystemMap& system,
                                               const curves::SquareSystemSpec& spec,
                                               const ThetaTuple& tuple, const SampleRegion& region,
                                               double work_limit, double det_floor, bool parallel) {
    region.validate_in(system);
    if (region.samples < 1) throw ConfigError("need at least one sample");
    long long S = region.samples;
    std::vector<int8_t> outcome(S, 0);  // 1 hit, 0 miss, -1 failed

#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (long long p = 0; p < S; ++p) {
        SplitMix64 rng = stream_for(region.seed, (uint64_t)p);
        std::vector<Rat> x(system.m());
        for (int j = 0; j < system.m(); ++j) {
            double lo = rat_to_double(region.box[j].first);
            double hi = rat_to_double(region.box[j].second);
            x[j] = rat_from_double(rng.next_in(lo, hi));
            if (!(region.box[j].first < x[j] && x[j] < region.box[j].second))
                x[j] = (region.box[j].first + region.box[j].second) / 2;
        }
        try {
            outcome[p] = small_form_membership(system, spec, x, tuple, work_limit, det_floor).member
                             ? 1
                             : 0;
        } catch (const Error&) {
            outcome[p] = -1;
        }
    }
    MeasureEstimate est;
    est.samples = S;
    for (long long p = 0; p < S; ++p) {
        if (outcome[p] < 0)
            ++est.failures;
        else if (outcome[p] > 0)
            ++est.hits;
    }
    long long ok = S - est.failures;
    double vol = region.volume();
    if (ok > 0) {
        est.estimate = double(est.hits) / double(ok) * vol;
        auto ci = wilson95(est.hits, ok);
        est.ci_lo = ci.lo * vol;
        est.ci_hi = ci.hi * vol;
    }
    return est;
}

// ---------------------------------------------------------------------------
// solution cells

Rat CellInterval::length_inner() const {
    Rat v = right.lo - left.hi;
    return v > 0 ? v : Rat(0);
}

namespace {

Poly form_poly(const Form& form, const SystemMap& system, int j) {
    Poly F;
    for (int i = 0; i <= system.n(); ++i)
        F = F + system.curve(j).coords()[i] * Rat(form.a[i]);
    return F;
}

// certified lower bound of inf |Fp| over [lo, hi]
Rat inf_abs_deriv(const Poly& Fp, const Rat& lo, const Rat& hi) {
    if (Fp.is_zero()) return Rat(0);
    if (Fp.degree() == 0) return abs(Fp.coeff(0));
    Int den;
    IntPoly ip = int_poly_from(Fp, den);
    if (!isolate_roots(ip, lo, hi).empty()) return Rat(0);
    Rat v1 = abs(Fp.eval(lo)), v2 = abs(Fp.eval(hi));
    Rat best = std::min(v1, v2);
    Poly Fpp = Fp.derivative();
    if (!Fpp.is_zero() && Fpp.degree() >= 0) {
        Int den2;
        IntPoly ipp = int_poly_from(Fpp, den2);
        Rat radius = std::max(abs(lo), abs(hi));
        Rat sup_fpp = Fpp.sup_bound(radius);
        for (RootBracket br : isolate_roots(ipp, lo, hi)) {
            refine_bracket(ipp, br, Rat(1, 1000000000));
            Rat w1 = abs(Fp.eval(br.lo)), w2 = abs(Fp.eval(br.hi));
            Rat lb = std::min(w1, w2) - sup_fpp * br.width();
            if (lb < 0) lb = 0;
            best = std::min(best, lb);
        }
    }
    return best;
}

CellDecomposition cells_impl(const Form& form, const SystemMap& system, const ApproxFunction& psi,
                             int j, const Rat& lo, const Rat& hi, const Rat& tol) {
    if (j < 0 || j >= system.m()) throw ConfigError("coordinate index out of range");
    int n = system.n();
    Poly F = form_poly(form, system, j);
    if (F.is_zero())
        throw DegenerateInputError("form vanishes identically on this coordinate");
    long long H = sup_norm(form.a).get_si();
    if (H < 1) throw ConfigError("form must be nonzero");

    CellDecomposition out;
    out.form = form;
    out.j = j;
    out.psi_H = rat_from_double(psi.evaluate(H));
    out.K_bound = n * (n + 1) / 2 + 1;
    if (!(out.psi_H > 0)) return out;
    const Rat& psiH = out.psi_H;

    Poly Fp = F.derivative();
    auto make_interval = [&](RootBracket left, RootBracket right, Rat inside) {
        CellInterval ci;
        ci.left = std::move(left);
        ci.right = std::move(right);
        ci.inside_point = std::move(inside);
        ci.inf_deriv = inf_abs_deriv(Fp, ci.left.lo, ci.right.hi);
        out.intervals.push_back(std::move(ci));
    };

    if (F.degree() == 0) {
        if (abs(F.coeff(0)) < psiH)
            make_interval({lo, lo, true}, {hi, hi, true}, (lo + hi) / 2);
        return out;
    }

    Poly upper = F - Poly::constant(psiH);
    Poly lower = F + Poly::constant(psiH);
    Int den_u, den_l;
    std::vector<IntPoly> ips{int_poly_from(upper, den_u), int_poly_from(lower, den_l)};
    std::vector<std::vector<RootBracket>> brackets{isolate_roots(ips[0], lo, hi),
                                                   isolate_roots(ips[1], lo, hi)};
    for (size_t s = 0; s < 2; ++s)
        for (RootBracket& br : brackets[s]) refine_bracket(ips[s], br, tol);
    separate_brackets(ips, brackets);

    std::vector<RootBracket> breaks;
    breaks.push_back({lo, lo, true});
    for (const auto& set : brackets)
        for (const RootBracket& br : set) breaks.push_back(br);
    breaks.push_back({hi, hi, true});
    std::sort(breaks.begin(), breaks.end(),
              [](const RootBracket& a, const RootBracket& b) { return a.lo < b.lo; });

    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        const Rat& gap_lo = breaks[i].hi;
        const Rat& gap_hi = breaks[i + 1].lo;
        if (!(gap_lo < gap_hi)) continue;
        Rat mid = (gap_lo + gap_hi) / 2;
        if (abs(F.eval(mid)) < psiH) make_interval(breaks[i], breaks[i + 1], mid);
    }
    return out;
}

}  // namespace

CellDecomposition solution_cells(const Form& form, const SystemMap& system,
                                 const ApproxFunction& psi, int j, const Rat& tol) {
    const auto& c = system.curve(j);
    return cells_impl(form, system, psi, j, c.lo(), c.hi(), tol);
}

CellDecomposition solution_cells_on(const Form& form, const SystemMap& system,
                                    const ApproxFunction& psi, int j, const Rat& lo, const Rat& hi,
                                    const Rat& tol) {
    const auto& c = system.curve(j);
    if (lo < c.lo() || hi > c.hi() || !(lo < hi))
        throw ConfigError("cell window must be a nonempty sub-interval of the domain");
    return cells_impl(form, system, psi, j, lo, hi, tol);
}

// ---------------------------------------------------------------------------
// Borel-Cantelli scan

namespace {

// Per-axis double data for the candidate pre-filter: centered forms of the
// coordinate functions over B_j and a Lipschitz bound for F_j.
struct BcAxis {
    double mid = 0, half = 0;            // B_j geometry
    std::vector<double> f_mid, f_half;   // f_i(mid), sup|f_i'| * half (inflated)
    std::vector<double> coef;            // dense double coefficients of f_i, [i * (deg+1) + k]
    int deg = 0;
    std::vector<double> dsup;            // sup|f_i'| over B_j
};

struct BcPlan {
    int n = 0, m = 0;
    long long H_max = 0;
    double psi_top = 0;  // max_H psi(H)
    std::vector<BcAxis> axes;
    std::vector<double> psi_d;  // psi(H), H = 0..H_max
    int inner = 0;              // windowed dimension
};

double eval_poly_double(const double* c, int count, double x) {
    double acc = 0;
    for (int k = count - 1; k >= 0; --k) acc = acc * x + c[k];
    return acc;
}

// certified-in-doubles test: can |F_j| < psi + margin somewhere in [lo, hi]?
// F coefficients passed densely; L is a Lipschitz bound for F_j on B_j.
bool axis_maybe_hit(const double* fc, int count, double lo, double hi, double L, double psi,
                    double margin) {
    struct Seg {
        double lo, hi;
    };
    Seg stack[64];
    int top = 0;
    stack[top++] = {lo, hi};
    int budget = 64;
    while (top > 0) {
        if (--budget < 0) return true;  // undecided, let the exact path settle it
        Seg s = stack[--top];
        double mid = 0.5 * (s.lo + s.hi);
        double w = s.hi - s.lo;
        double v = std::abs(eval_poly_double(fc, count, mid));
        double reach = 0.5 * L * w;
        if (v - reach > psi + margin) continue;  // certainly no hit in this segment
        if (v < psi + margin + 1e-18 || w < 1e-9 || top >= 62) return true;
        stack[top++] = {s.lo, mid};
        stack[top++] = {mid, s.hi};
    }
    return false;
}

BcPlan make_bc_plan(const SystemMap& system, const ApproxFunction& psi, const SampleRegion& region,
                    long long H_max) {
    BcPlan plan;
    plan.n = system.n();
    plan.m = system.m();
    plan.H_max = H_max;
    plan.psi_d.resize(H_max + 1, 0.0);
    for (long long h = 1; h <= H_max; ++h) {
        plan.psi_d[h] = psi.evaluate(h);
        plan.psi_top = std::max(plan.psi_top, plan.psi_d[h]);
    }
    plan.axes.resize(plan.m);
    int deg = 0;
    for (int j = 0; j < plan.m; ++j)
        for (int i = 0; i <= plan.n; ++i)
            deg = std::max(deg, std::max(0, system.curve(j).coords()[i].degree()));
    for (int j = 0; j < plan.m; ++j) {
        BcAxis& ax = plan.axes[j];
        double lo = rat_to_double(region.box[j].first), hi = rat_to_double(region.box[j].second);
        ax.mid = 0.5 * (lo + hi);
        ax.half = 0.5 * (hi - lo) * (1 + 1e-12) + 1e-300;
        ax.deg = deg;
        ax.f_mid.resize(plan.n + 1);
        ax.f_half.resize(plan.n + 1);
        ax.dsup.resize(plan.n + 1);
        ax.coef.assign((plan.n + 1) * (deg + 1), 0.0);
        Rat radius = std::max(abs(region.box[j].first), abs(region.box[j].second));
        for (int i = 0; i <= plan.n; ++i) {
            const Poly& f = system.curve(j).coords()[i];
            ax.f_mid[i] = rat_to_double(f.eval(rat_from_double(ax.mid)));
            double ds = rat_to_double(f.derivative().sup_bound(radius)) * (1 + 1e-9) + 1e-300;
            ax.dsup[i] = ds;
            ax.f_half[i] = ds * ax.half;
            for (int k = 0; k <= f.degree(); ++k)
                ax.coef[i * (deg + 1) + k] = rat_to_double(f.coeff(k));
        }
    }
    // windowed dimension: largest guaranteed |f| across axes
    double best = -1;
    for (int i = 0; i <= plan.n; ++i) {
        double score = 1e300;
        for (int j = 0; j < plan.m; ++j)
            score = std::min(score, std::abs(plan.axes[j].f_mid[i]) - plan.axes[j].f_half[i]);
        if (score > best) {
            best = score;
            plan.inner = i;
        }
    }
    return plan;
}

struct BcAccum {
    std::vector<double> cell_by_H;      // indexed by H
    std::vector<long long> forms_by_H;
};

// candidate handler: exact cells on B, product across axes
void bc_candidate(const SystemMap& system, const ApproxFunction& psi, const SampleRegion& region,
                  const BcPlan& plan, const std::vector<long long>& a_ll, BcAccum& acc) {
    int n = plan.n;
    long long H = 0;
    for (long long v : a_ll) H = std::max(H, std::llabs(v));
    if (H < 1 || H > plan.H_max) return;
    Form f;
    f.a.resize(n + 1);
    for (int i = 0; i <= n; ++i) f.a[i] = (long)a_ll[i];
    double prod = 1.0;
    bool any_zero = false;
    for (int j = 0; j < plan.m && !any_zero; ++j) {
        CellDecomposition cd = solution_cells_on(f, system, psi, j, region.box[j].first,
                                                 region.box[j].second);
        Rat len(0);
        for (const CellInterval& ci : cd.intervals) len += (ci.length_outer() + ci.length_inner()) / 2;
        if (len == 0) any_zero = true;
        prod *= rat_to_double(len);
    }
    if (any_zero || prod <= 0) return;
    acc.cell_by_H[H] += prod;
    acc.forms_by_H[H] += 1;
}

// walks dims != inner over full ranges; inner dim restricted by per-axis
// windows; candidates checked with the certified branch-and-bound and only
// survivors pay for exact cells
void bc_walk(const SystemMap& system, const ApproxFunction& psi, const SampleRegion& region,
             const BcPlan& plan, std::vector<long long>& a, std::vector<double>& center,
             std::vector<double>& halfw, const std::vector<int>& outer, size_t depth,
             BcAccum& acc) {
    int n = plan.n, m = plan.m;
    long long Hm = plan.H_max;
    if (depth < outer.size()) {
        int dim = outer[depth];
        for (long long v = -Hm; v <= Hm; ++v) {
            a[dim] = v;
            for (int j = 0; j < m; ++j) {
                center[j] += double(v) * plan.axes[j].f_mid[dim];
                halfw[j] += std::abs(double(v)) * plan.axes[j].f_half[dim];
            }
            bc_walk(system, psi, region, plan, a, center, halfw, outer, depth + 1, acc);
            for (int j = 0; j < m; ++j) {
                center[j] -= double(v) * plan.axes[j].f_mid[dim];
                halfw[j] -= std::abs(double(v)) * plan.axes[j].f_half[dim];
            }
        }
        a[dim] = 0;
        return;
    }
    // window on the inner dimension: necessary condition per axis
    int inner = plan.inner;
    double psi_top = plan.psi_top;
    double wlo = -double(Hm), whi = double(Hm);
    for (int j = 0; j < m; ++j) {
        double fm = plan.axes[j].f_mid[inner];
        double fh = plan.axes[j].f_half[inner];
        double slack = psi_top + halfw[j] + double(Hm) * fh + 1e-9 * (1 + std::abs(center[j]));
        if (std::abs(fm) <= fh * (1 + 1e-9) + 1e-300) continue;  // no usable window on this axis
        double b1 = (-slack - center[j]) / fm, b2 = (slack - center[j]) / fm;
        if (b1 > b2) std::swap(b1, b2);
        double widen = 2 + 1e-9 * std::max(std::abs(b1), std::abs(b2));
        wlo = std::max(wlo, b1 - widen);
        whi = std::min(whi, b2 + widen);
    }
    if (wlo > whi) return;
    long long vlo = (long long)std::floor(wlo), vhi = (long long)std::ceil(whi);
    vlo = std::max(vlo, -Hm);
    vhi = std::min(vhi, Hm);

    std::vector<double> fc((size_t)plan.axes[0].deg + 1);
    for (long long v = vlo; v <= vhi; ++v) {
        a[inner] = v;
        int first = -1;
        for (int i = 0; i <= n; ++i)
            if (a[i] != 0) {
                first = i;
                break;
            }
        if (first < 0 || a[first] < 0) continue;  // non-canonical or zero
        long long H = 0;
        for (int i = 0; i <= n; ++i) H = std::max(H, std::llabs(a[i]));
        double psiH = plan.psi_d[H];
        if (!(psiH > 0)) continue;
        bool plausible = true;
        for (int j = 0; j < m && plausible; ++j) {
            const BcAxis& ax = plan.axes[j];
            int count = ax.deg + 1;
            for (int k = 0; k < count; ++k) {
                double c = 0;
                for (int i = 0; i <= n; ++i) c += double(a[i]) * ax.coef[i * count + k];
                fc[k] = c;
            }
            double L = 0;
            for (int i = 0; i <= n; ++i) L += std::abs(double(a[i])) * ax.dsup[i];
            double margin = 1e-9 * (1 + L);
            plausible = axis_maybe_hit(fc.data(), count, ax.mid - ax.half, ax.mid + ax.half, L,
                                       psiH, margin);
        }
        if (!plausible) continue;
        std::vector<long long> cand(a.begin(), a.end());
        bc_candidate(system, psi, region, plan, cand, acc);
    }
    a[inner] = 0;
}

}  // namespace

std::vector<BorelCantelliPoint> borel_cantelli_partial_sums(const SystemMap& system,
                                                            const ApproxFunction& psi,
                                                            const SampleRegion& region,
                                                            std::vector<long long> H_cutoffs,
                                                            const BorelCantelliOptions& opts) {
    region.validate_in(system);
    if (H_cutoffs.empty()) throw ConfigError("need at least one cutoff");
    std::sort(H_cutoffs.begin(), H_cutoffs.end());
    long long H_max = H_cutoffs.back();
    if (H_max < 1) throw ConfigError("need H_max >= 1");
    double box = std::pow(2.0 * double(H_max) + 1.0, double(system.n() + 1));
    if (box > opts.work_limit) throw WorkLimitError("cell-sum box exceeds the work limit");

    BcPlan plan = make_bc_plan(system, psi, region, H_max);
    std::vector<int> outer;
    for (int i = 0; i <= plan.n; ++i)
        if (i != plan.inner) outer.push_back(i);

    long long tasks = 2 * H_max + 1;
    std::vector<BcAccum> per_task((size_t)tasks);

    std::string task_error;
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
    for (long long ti = 0; ti < tasks; ++ti) {
        try {
            BcAccum& acc = per_task[(size_t)ti];
            acc.cell_by_H.assign(H_max + 1, 0.0);
            acc.forms_by_H.assign(H_max + 1, 0);
            std::vector<long long> a(plan.n + 1, 0);
            std::vector<double> center(plan.m, 0.0), halfw(plan.m, 0.0);
            long long v = ti - H_max;
            int dim = outer[0];
            a[dim] = v;
            for (int j = 0; j < plan.m; ++j) {
                center[j] += double(v) * plan.axes[j].f_mid[dim];
                halfw[j] += std::abs(double(v)) * plan.axes[j].f_half[dim];
            }
            bc_walk(system, psi, region, plan, a, center, halfw, outer, 1, acc);
        } catch (const std::exception& e) {
#pragma omp critical
            task_error = e.what();
        }
    }
    if (!task_error.empty()) throw Error("cell-sum scan failed: " + task_error);

    std::vector<double> cell_by_H(H_max + 1, 0.0);
    std::vector<long long> forms_by_H(H_max + 1, 0);
    for (const BcAccum& acc : per_task)
        for (long long h = 0; h <= H_max; ++h) {
            cell_by_H[h] += acc.cell_by_H[h];
            forms_by_H[h] += acc.forms_by_H[h];
        }

    std::vector<BorelCantelliPoint> out;
    CompensatedSum cells, comp;
    long long forms = 0;
    size_t next = 0;
    for (long long h = 1; h <= H_max; ++h) {
        cells.add(cell_by_H[h]);
        forms += forms_by_H[h];
        double v = psi.evaluate(h);
        comp.add(v == 0.0 ? 0.0
                          : std::pow(double(h), double(system.n() - system.m())) *
                                std::pow(v, double(system.m())));
        while (next < H_cutoffs.size() && H_cutoffs[next] == h) {
            out.push_back({h, cells.value(), comp.value(), forms});
            ++next;
        }
    }
    return out;
}

std::pair<double, double> borel_cantelli_partial_sum(const SystemMap& system,
                                                     const ApproxFunction& psi,
                                                     const SampleRegion& region, long long H_max,
                                                     const BorelCantelliOptions& opts) {
    auto pts = borel_cantelli_partial_sums(system, psi, region, {H_max}, opts);
    return {pts[0].cell_sum, pts[0].comparison_sum};
}

// ---------------------------------------------------------------------------
// dichotomy experiment

namespace {

DichotomyResult dichotomy_impl(const SystemMap& system, const ApproxFunction& psi,
                               const SampleRegion& region, const DichotomyConfig& cfg,
                               bool parallel) {
    region.validate_in(system);
    if (region.samples < 1) throw ConfigError("dichotomy needs at least one sample point");
    if (cfg.t_max < 0) throw ConfigError("need t_max >= 0");
    long long S = region.samples;
    int T = cfg.t_max + 1;

    std::vector<std::vector<long long>> counts((size_t)S);  // per point, per block; empty = failed

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (long long p = 0; p < S; ++p) {
        SplitMix64 rng = stream_for(region.seed, (uint64_t)p);
        std::vector<Rat> x(system.m());
        bool ok = true;
        for (int j = 0; j < system.m(); ++j) {
            double lo = rat_to_double(region.box[j].first);
            double hi = rat_to_double(region.box[j].second);
            double u = rng.next_in(lo, hi);
            double scale = std::ldexp(1.0, cfg.point_precision_bits);
            double snapped = std::round(u * scale) / scale;
            x[j] = rat_from_double(snapped);
            if (!(region.box[j].first < x[j] && x[j] < region.box[j].second))
                x[j] = (region.box[j].first + region.box[j].second) / 2;
        }
        try {
            auto rows = solver::count_by_dyadic_block(system, x, psi, cfg.t_max, cfg.solver);
            std::vector<long long> c(T, 0);
            for (const auto& r : rows) c[r.t] = r.count;
            counts[(size_t)p] = std::move(c);
        } catch (const Error&) {
            ok = false;
        }
        if (!ok) counts[(size_t)p].clear();
    }

    DichotomyResult res;
    res.rows.resize(T);
    std::vector<long long> hits(T, 0);
    std::vector<CompensatedSum> sums(T);
    for (long long p = 0; p < S; ++p) {
        if (counts[(size_t)p].empty()) {
            ++res.points_failed;
            continue;
        }
        ++res.points_ok;
        for (int t = 0; t < T; ++t) {
            if (counts[(size_t)p][t] > 0) ++hits[t];
            sums[t].add(double(counts[(size_t)p][t]));
        }
    }
    for (int t = 0; t < T; ++t) {
        DichotomyRow& r = res.rows[t];
        r.t = t;
        if (res.points_ok > 0) {
            r.hit_fraction = double(hits[t]) / double(res.points_ok);
            auto ci = wilson95(hits[t], res.points_ok);
            r.ci_lo = ci.lo;
            r.ci_hi = ci.hi;
            r.mean_count = sums[t].value() / double(res.points_ok);
        }
        CompensatedSum acc;
        for (long long h = 1LL << t; h < (2LL << t); ++h) {
            double v = psi.evaluate(h);
            acc.add(v == 0.0 ? 0.0
                             : std::pow(double(h), double(system.n() - system.m())) *
                                   std::pow(v, double(system.m())));
        }
        r.heuristic = acc.value();
    }
    return res;
}

}  // namespace

DichotomyResult dichotomy_experiment(const SystemMap& system, const ApproxFunction& psi,
                                     const SampleRegion& region, const DichotomyConfig& cfg) {
    return dichotomy_impl(system, psi, region, cfg, cfg.parallel);
}

DichotomyResult dichotomy_experiment_serial(const SystemMap& system, const ApproxFunction& psi,
                                            const SampleRegion& region,
                                            const DichotomyConfig& cfg) {
    return dichotomy_impl(system, psi, region, cfg, false);
}

}  // namespace smallforms::measure
