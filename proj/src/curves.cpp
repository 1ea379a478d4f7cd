#include "smallforms/curves.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smallforms/errors.hpp"

namespace smallforms::curves {

CurveMap::CurveMap(std::vector<Poly> coords, Rat lo, Rat hi)
    : n_((int)coords.size() - 1), lo_(std::move(lo)), hi_(std::move(hi)), coords_(std::move(coords)) {
    if (coords_.empty()) throw ConfigError("curve needs at least one coordinate");
    if (!(lo_ < hi_)) throw ConfigError("curve interval needs lo < hi");
    derivs_.resize(coords_.size());
    for (size_t i = 0; i < coords_.size(); ++i) {
        derivs_[i].push_back(coords_[i]);
        for (int k = 1; k <= n_ + 1; ++k) derivs_[i].push_back(derivs_[i].back().derivative());
    }
    if (wronskian(*this, midpoint()) == 0)
        throw DegenerateInputError("curve coordinates fail the midpoint wronskian check");
}

const Poly& CurveMap::coord_deriv(int i, int order) const {
    if (i < 0 || i > n_) throw ConfigError("coordinate index out of range");
    if (order < 0 || order >= (int)derivs_[i].size())
        throw ConfigError("derivative order out of range");
    return derivs_[i][order];
}

Rat CurveMap::sup_bound(int i, int order) const {
    Rat radius = std::max(abs(lo_), abs(hi_));
    return coord_deriv(i, order).sup_bound(radius);
}

CurveMap veronese_curve(int n, const Rat& lo, const Rat& hi) {
    if (n < 1) throw ConfigError("veronese curve needs n >= 1");
    std::vector<Poly> coords;
    for (int k = 0; k <= n; ++k) coords.push_back(Poly::monomial(Rat(1), k));
    return CurveMap(std::move(coords), lo, hi);
}

CurveMap monomial_curve(const std::vector<int>& exponents, const Rat& lo, const Rat& hi) {
    std::vector<Poly> coords;
    for (int e : exponents) {
        if (e < 0) throw ConfigError("monomial exponents must be >= 0");
        coords.push_back(Poly::monomial(Rat(1), e));
    }
    return CurveMap(std::move(coords), lo, hi);
}

SystemMap::SystemMap(std::vector<CurveMap> curves) : curves_(std::move(curves)) {
    if (curves_.empty()) throw ConfigError("system needs at least one curve");
    int n = curves_[0].n();
    for (const CurveMap& c : curves_)
        if (c.n() != n) throw ConfigError("all curves must share the same n");
    if ((int)curves_.size() > n)
        throw ConfigError("need m <= n");
    M_exact_ = 0;
    for (const CurveMap& c : curves_)
        for (int i = 0; i <= n; ++i)
            for (int l = 0; l <= n + 1; ++l) M_exact_ = std::max(M_exact_, c.sup_bound(i, l));
    M_ = rat_to_double(M_exact_);
}

bool SystemMap::interior(const std::vector<Rat>& x) const {
    if ((int)x.size() != m()) return false;
    for (int j = 0; j < m(); ++j)
        if (!curves_[j].interior(x[j])) return false;
    return true;
}

bool SystemMap::contains(const std::vector<Rat>& x) const {
    if ((int)x.size() != m()) return false;
    for (int j = 0; j < m(); ++j)
        if (!curves_[j].contains(x[j])) return false;
    return true;
}

SystemMap veronese_system(int n, int m, const Rat& lo, const Rat& hi) {
    std::vector<CurveMap> cs;
    for (int j = 0; j < m; ++j) cs.push_back(veronese_curve(n, lo, hi));
    return SystemMap(std::move(cs));
}

std::vector<RatMatrix> evaluate_system_matrix(const SystemMap& system, const std::vector<Rat>& x,
                                               int order) {
    if (!system.interior(x)) throw ConfigError("evaluation point must be interior to the domain");
    if (order < 0 || order > system.n() + 1) throw ConfigError("order must be in [0, n+1]");
    std::vector<RatMatrix> out;
    for (int i = 0; i <= order; ++i) {
        RatMatrix Y(system.m(), system.n() + 1);
        for (int j = 0; j < system.m(); ++j)
            for (int k = 0; k <= system.n(); ++k) Y.at(j, k) = system.curve(j).eval(k, i, x[j]);
        out.push_back(std::move(Y));
    }
    return out;
}

Rat wronskian(const CurveMap& curve, const Rat& x) {
    int n = curve.n();
    RatMatrix W(n + 1, n + 1);
    for (int k = 0; k <= n; ++k)
        for (int i = 0; i <= n; ++i) W.at(k, i) = curve.coord_deriv(i, k).eval(x);
    return W.det();
}

void SquareSystemSpec::validate(const SystemMap& system) const {
    if ((int)multiplicities.size() != system.m())
        throw ConfigError("need one multiplicity per curve");
    int total = 0;
    for (int l : multiplicities) {
        if (l < 0) throw ConfigError("multiplicities must be >= 0");
        total += l + 1;
    }
    if (total != system.n() + 1)
        throw ConfigError("multiplicities must satisfy sum(l_j + 1) = n + 1");
}

RatMatrix square_system_matrix(const SystemMap& system, const SquareSystemSpec& spec,
                               const std::vector<Rat>& x) {
    spec.validate(system);
    if ((int)x.size() != system.m()) throw ConfigError("point dimension mismatch");
    int k = system.n() + 1;
    RatMatrix G(k, k);
    int row = 0;
    for (int j = 0; j < system.m(); ++j)
        for (int i = 0; i <= spec.multiplicities[j]; ++i, ++row)
            for (int col = 0; col < k; ++col) G.at(row, col) = system.curve(j).eval(col, i, x[j]);
    return G;
}

namespace {

std::vector<Rat> axis_grid(const Rat& lo, const Rat& hi, int points) {
    std::vector<Rat> g;
    for (int i = 0; i < points; ++i)
        g.push_back(lo + (hi - lo) * Rat(i) / Rat(points - 1));
    return g;
}

struct ScanResult {
    Rat M{0}, c0_wr{-1}, c0_m{-1}, c0_m1{-1};
    std::vector<NearZero> near;
};

void merge_min(Rat& target, const Rat& v) {
    if (target < 0 || v < target) target = v;
}

std::vector<double> to_doubles(const std::vector<Rat>& xs) {
    std::vector<double> out;
    for (const Rat& x : xs) out.push_back(rat_to_double(x));
    return out;
}

// Full scan at a fixed grid size.  Per-axis quantities (M, wronskians) use the
// axis grids; the m- and (m+1)-minors walk the product grid.
ScanResult scan(const SystemMap& system, int grid, const NondegeneracyOptions& opts,
                bool parallel) {
    int n = system.n(), m = system.m();
    std::vector<std::vector<Rat>> grids;
    for (int j = 0; j < m; ++j) grids.push_back(axis_grid(system.curve(j).lo(), system.curve(j).hi(), grid));

    std::vector<ScanResult> partial(std::max(1, grid));
    Rat thr = rat_from_double(opts.near_zero_threshold);

    // pass 1: per-axis scan, parallel over grid index (deterministic merge in
    // index order afterwards)
#pragma omp parallel for schedule(static) if (parallel)
    for (int gi = 0; gi < grid; ++gi) {
        ScanResult& r = partial[gi];
        for (int j = 0; j < m; ++j) {
            const Rat& x = grids[j][gi];
            for (int i = 0; i <= n; ++i)
                for (int l = 0; l <= n + 1; ++l) {
                    Rat v = abs(system.curve(j).eval(i, l, x));
                    if (v > r.M) r.M = v;
                }
            Rat w = abs(wronskian(system.curve(j), x));
            merge_min(r.c0_wr, w);
            if (w < thr)
                r.near.push_back({{rat_to_double(x)}, "wronskian[" + std::to_string(j) + "]",
                                  rat_to_double(w)});
        }
    }
    ScanResult acc;
    for (const ScanResult& r : partial) {
        if (r.M > acc.M) acc.M = r.M;
        if (r.c0_wr >= 0) merge_min(acc.c0_wr, r.c0_wr);
        for (const NearZero& nz : r.near) acc.near.push_back(nz);
    }

    // pass 2: product-grid scan for the minors
    long long total = 1;
    for (int j = 0; j < m; ++j) total *= grid;
    std::vector<ScanResult> partial2(std::max(1, grid));
#pragma omp parallel for schedule(static) if (parallel)
    for (int g0 = 0; g0 < grid; ++g0) {
        ScanResult& r = partial2[g0];
        std::vector<int> idx(m, 0);
        idx[0] = g0;
        long long inner = total / grid;
        for (long long step = 0; step < inner; ++step) {
            long long s = step;
            for (int j = 1; j < m; ++j) {
                idx[j] = (int)(s % grid);
                s /= grid;
            }
            std::vector<Rat> x(m);
            for (int j = 0; j < m; ++j) x[j] = grids[j][idx[j]];

            RatMatrix minor_m(m, m);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) minor_m.at(j, i) = system.curve(j).eval(i, 0, x[j]);
            Rat dm = abs(minor_m.det());
            merge_min(r.c0_m, dm);
            if (dm < thr) r.near.push_back({to_doubles(x), "minor_m", rat_to_double(dm)});

            for (int jc = 0; jc < m; ++jc) {
                RatMatrix big(m + 1, m + 1);
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i <= m; ++i) big.at(j, i) = system.curve(j).eval(i, 0, x[j]);
                for (int i = 0; i <= m; ++i) big.at(m, i) = system.curve(jc).eval(i, 1, x[jc]);
                Rat dd = abs(big.det());
                merge_min(r.c0_m1, dd);
                if (dd < thr)
                    r.near.push_back(
                        {to_doubles(x), "minor_m_plus_1[" + std::to_string(jc) + "]", rat_to_double(dd)});
            }
        }
    }
    for (const ScanResult& r : partial2) {
        if (r.c0_m >= 0) merge_min(acc.c0_m, r.c0_m);
        if (r.c0_m1 >= 0) merge_min(acc.c0_m1, r.c0_m1);
        for (const NearZero& nz : r.near) acc.near.push_back(nz);
    }
    return acc;
}

NondegeneracyReport build_report(const SystemMap& system, int grid, const NondegeneracyOptions& opts,
                                 bool parallel) {
    if (grid < 2) throw ConfigError("nondegeneracy scan needs >= 2 grid points per axis");
    ScanResult r = scan(system, grid, opts, parallel);
    NondegeneracyReport rep;
    rep.M_estimate = rat_to_double(r.M);
    rep.M_certified = system.derivative_bound();
    rep.c0_wronskian = r.c0_wr < 0 ? 0.0 : rat_to_double(r.c0_wr);
    rep.c0_minor_m = r.c0_m < 0 ? 0.0 : rat_to_double(r.c0_m);
    rep.c0_minor_m_plus_1 = r.c0_m1 < 0 ? 0.0 : rat_to_double(r.c0_m1);
    rep.near_zero_locations = std::move(r.near);
    if (opts.check_refinement) {
        ScanResult r2 = scan(system, 2 * grid - 1, opts, parallel);
        rep.refinement_checked = true;
        rep.M_refined = rat_to_double(r2.M);
        rep.c0_wronskian_refined = r2.c0_wr < 0 ? 0.0 : rat_to_double(r2.c0_wr);
        auto close = [](double a, double b) {
            double scale = std::max({std::abs(a), std::abs(b), 1e-300});
            return std::abs(a - b) / scale < 0.10;
        };
        rep.refinement_stable =
            close(rep.M_estimate, rep.M_refined) && close(rep.c0_wronskian, rep.c0_wronskian_refined);
    }
    return rep;
}

}  // namespace

NondegeneracyReport nondegeneracy_report(const SystemMap& system, int grid_points_per_axis,
                                         const NondegeneracyOptions& opts) {
    return build_report(system, grid_points_per_axis, opts, opts.parallel);
}

NondegeneracyReport nondegeneracy_report_serial(const SystemMap& system, int grid_points_per_axis,
                                                const NondegeneracyOptions& opts) {
    return build_report(system, grid_points_per_axis, opts, false);
}

FiberResult fiber_substitution(const std::vector<MPoly>& coords, const std::vector<Rat>& u,
                               const std::vector<std::pair<Rat, Rat>>& domain_box, int D,
                               int D_cap) {
    if (coords.empty()) throw ConfigError("fiber substitution needs coordinates");
    int k = coords[0].vars;
    for (const MPoly& p : coords)
        if (p.vars != k) throw ConfigError("coordinates disagree on variable count");
    if ((int)u.size() != k) throw ConfigError("u must have one entry per variable");
    if (u[0] != 1) throw ConfigError("u_1 must equal 1");
    for (int i = 1; i < k; ++i)
        if (u[i] == 0) throw ConfigError("u components must be nonzero");
    if ((int)domain_box.size() != k) throw ConfigError("domain box must have one interval per variable");
    if (D < 2) throw ConfigError("need D >= 2");

    std::vector<Rat> radius(k);
    for (int i = 0; i < k; ++i) {
        if (!(domain_box[i].first < 0 && domain_box[i].second > 0))
            throw ConfigError("domain box must contain 0 in its interior");
        Rat neg = -domain_box[i].first;
        radius[i] = std::min(neg, domain_box[i].second);
    }

    std::vector<int> tried;
    for (int d = D; d <= D_cap; ++d) {
        tried.push_back(d);
        // exponents e_i = D^(i-1) + D^k
        std::vector<long long> e(k);
        long long Dk = 1;
        for (int i = 0; i < k; ++i) Dk *= d;
        long long Dp = 1;
        for (int i = 0; i < k; ++i) {
            e[i] = Dp + Dk;
            Dp *= d;
            if (e[i] > 1000000) throw ConfigError("fiber exponent too large");
        }

        // largest dyadic t_b = 2^-s with |u_i| t_b^{e_i} <= radius_i for all i,
        // i.e. s * e_i >= log2(|u_i| / radius_i); decided by bit lengths.
        long long s = 0;
        for (int i = 0; i < k; ++i) {
            Rat q = abs(u[i]) / radius[i];
            q.canonicalize();
            if (q <= 1) continue;
            long long bits = (long long)mpz_sizeinbase(q.get_num().get_mpz_t(), 2) -
                             (long long)mpz_sizeinbase(q.get_den().get_mpz_t(), 2) + 1;
            long long si = (bits + e[i] - 1) / e[i];
            if (si < 1) si = 1;
            s = std::max(s, si);
        }
        Int den_tb(1);
        mpz_mul_2exp(den_tb.get_mpz_t(), den_tb.get_mpz_t(), (mp_bitcnt_t)s);
        Rat tb(Int(1), den_tb);
        tb.canonicalize();

        // compose: each term c * prod x_i^{a_i} -> c * prod u_i^{a_i} * t^{sum a_i e_i}
        std::vector<Poly> phis;
        for (const MPoly& p : coords) {
            Poly phi;
            for (const MPoly::Term& t : p.terms) {
                Rat coeff = t.coeff;
                long long expo = 0;
                for (int i = 0; i < k; ++i) {
                    for (int a = 0; a < t.exp[i]; ++a) coeff *= u[i];
                    expo += (long long)t.exp[i] * e[i];
                    if (expo > 1000000) throw ConfigError("fiber exponent too large");
                }
                phi = phi + Poly::monomial(coeff, (int)expo);
            }
            phis.push_back(std::move(phi));
        }
        try {
            CurveMap curve(std::move(phis), tb / 2, tb);
            return {std::move(curve), d};
        } catch (const DegenerateInputError&) {
            continue;  // independence check failed at this D
        }
    }
    std::ostringstream ss;
    ss << "fiber substitution failed the independence check for all tested D in {";
    for (size_t i = 0; i < tried.size(); ++i) ss << (i ? "," : "") << tried[i];
    ss << "}";
    throw DegenerateInputError(ss.str());
}

CramerCheck cramer_lower_bound_check(const RatMatrix& G, const std::vector<Int>& a, const Rat& C1,
                                     const Rat& C2) {
    CramerCheck out;
    if (G.rows() != G.cols()) {
        out.precondition_failure = "matrix not square";
        return out;
    }
    int k = G.rows();
    if ((int)a.size() != k) {
        out.precondition_failure = "vector dimension mismatch";
        return out;
    }
    if (!(C1 > 0)) {
        out.precondition_failure = "need C1 > 0";
        return out;
    }
    if (abs(G.det()) < C1) {
        out.precondition_failure = "|det G| < C1";
        return out;
    }
    if (G.max_abs_entry() > C2) {
        out.precondition_failure = "matrix entry exceeds C2";
        return out;
    }
    out.preconditions_ok = true;

    std::vector<Rat> av(a.size());
    for (size_t i = 0; i < a.size(); ++i) av[i] = Rat(a[i]);
    std::vector<Rat> Ga = G.mul(av);
    Rat lhs(0);
    for (const Rat& v : Ga) {
        Rat av = abs(v);
        if (av > lhs) lhs = av;
    }
    Rat kfact(1);
    for (int i = 2; i <= k; ++i) kfact *= i;
    Rat c2pow(1);
    for (int i = 0; i < k - 1; ++i) c2pow *= C2;
    Rat amax(0);
    for (const Int& v : a) {
        Rat av{Int(abs(v))};
        if (av > amax) amax = av;
    }
    out.lhs = lhs;
    out.rhs = C1 / (kfact * c2pow) * amax;
    out.holds = out.lhs >= out.rhs;
    return out;
}

}  // namespace smallforms::curves
