#include "smallforms/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "smallforms/errors.hpp"

namespace smallforms::lattice {

namespace {

using Vec = std::vector<double>;
using IVec = std::vector<long long>;

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void checked_axpy(IVec& y, long long r, const IVec& x) {
    for (size_t i = 0; i < y.size(); ++i) {
        long long prod, sum;
        if (__builtin_mul_overflow(r, x[i], &prod) || __builtin_add_overflow(y[i], prod, &sum))
            throw OverflowError("lattice transform overflow");
        y[i] = sum;
    }
}

struct GS {
    std::vector<Vec> star;            // orthogonalized vectors
    std::vector<std::vector<double>> mu;
    std::vector<double> norm_sq;
};

GS gram_schmidt(const std::vector<Vec>& b) {
    int k = (int)b.size();
    GS g;
    g.star.resize(k);
    g.mu.assign(k, std::vector<double>(k, 0.0));
    g.norm_sq.resize(k);
    for (int i = 0; i < k; ++i) {
        g.star[i] = b[i];
        for (int j = 0; j < i; ++j) {
            double m = g.norm_sq[j] > 0 ? dot(b[i], g.star[j]) / g.norm_sq[j] : 0.0;
            g.mu[i][j] = m;
            for (size_t t = 0; t < g.star[i].size(); ++t) g.star[i][t] -= m * g.star[j][t];
        }
        g.norm_sq[i] = dot(g.star[i], g.star[i]);
    }
    return g;
}

std::vector<Vec> to_double_cols(const Basis& basis) {
    std::vector<Vec> b(basis.rank());
    for (int i = 0; i < basis.rank(); ++i) {
        b[i].resize(basis.rows());
        for (int r = 0; r < basis.rows(); ++r) b[i][r] = rat_to_double(basis.cols[i][r]);
    }
    return b;
}

// exact column combination: out[r] = sum_i basis.cols[i][r] * u[i]
std::vector<std::vector<Rat>> apply_transform(const Basis& basis,
                                              const std::vector<IVec>& U) {
    std::vector<std::vector<Rat>> out(U.size(), std::vector<Rat>(basis.rows(), Rat(0)));
    for (size_t c = 0; c < U.size(); ++c)
        for (int i = 0; i < basis.rank(); ++i) {
            if (U[c][i] == 0) continue;
            Rat f((long)U[c][i]);
            for (int r = 0; r < basis.rows(); ++r) out[c][r] += basis.cols[i][r] * f;
        }
    return out;
}

}  // namespace

std::vector<std::vector<long long>> lll_transform(const Basis& basis, double delta) {
    if (delta <= 0.25 || delta >= 1.0) throw ConfigError("LLL delta must lie in (0.25, 1)");
    int k = basis.rank();
    std::vector<Vec> b = to_double_cols(basis);
    std::vector<IVec> U(k, IVec(k, 0));
    for (int i = 0; i < k; ++i) U[i][i] = 1;

    GS g = gram_schmidt(b);
    int i = 1;
    long iter = 0;
    while (i < k) {
        if (++iter > 100000) break;  // floating stall guard; reduction is best-effort
        // size-reduce b_i against b_j, j < i
        for (int j = i - 1; j >= 0; --j) {
            double m = g.mu[i][j];
            if (std::abs(m) > 0.5) {
                long long r = (long long)std::llround(m);
                for (size_t t = 0; t < b[i].size(); ++t) b[i][t] -= double(r) * b[j][t];
                checked_axpy(U[i], -r, U[j]);
                g = gram_schmidt(b);
            }
        }
        if (g.norm_sq[i] >= (delta - g.mu[i][i - 1] * g.mu[i][i - 1]) * g.norm_sq[i - 1]) {
            ++i;
        } else {
            std::swap(b[i], b[i - 1]);
            std::swap(U[i], U[i - 1]);
            g = gram_schmidt(b);
            i = std::max(i - 1, 1);
        }
    }
    return U;
}

std::vector<std::vector<long long>> enumerate_ball(const Basis& basis, const EnumOptions& opts) {
    int k = basis.rank();
    if (k == 0) return {};
    std::vector<IVec> U = lll_transform(basis);

    // exact reduced basis, then floating GS of it
    std::vector<std::vector<Rat>> red = apply_transform(basis, U);
    std::vector<Vec> b(k, Vec(basis.rows()));
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < basis.rows(); ++r) b[i][r] = rat_to_double(red[i][r]);
    GS g = gram_schmidt(b);
    for (int i = 0; i < k; ++i)
        if (!(g.norm_sq[i] > 0)) throw DegenerateInputError("enumerate_ball: basis not full rank");

    // inflated bound: absorbs double rounding in GS and in the bound recursion
    const double R2 = opts.radius_sq * (1.0 + 1e-9) + 1e-9;

    std::vector<std::vector<long long>> out;
    std::vector<long long> z(k, 0);
    long long nodes = 0;

    // At each level the admissible z form the interval
    //   |z + center| <= sqrt((R2 - partial) / B_level),
    // widened a hair so rounding never drops a boundary point.
    auto descend = [&](auto&& self, int level, double partial) -> void {
        double rem = R2 - partial;
        if (rem < 0) return;
        double center = 0.0;
        for (int j = level + 1; j < k; ++j) center += g.mu[j][level] * double(z[j]);
        double s = std::sqrt(rem / g.norm_sq[level]) * (1.0 + 1e-12) + 1e-12;
        long long zlo = (long long)std::ceil(-center - s);
        long long zhi = (long long)std::floor(-center + s);
        for (long long v = zlo; v <= zhi; ++v) {
            if (++nodes > opts.node_limit)
                throw WorkLimitError("lattice enumeration exceeded node limit");
            double off = double(v) + center;
            double cost = partial + off * off * g.norm_sq[level];
            if (cost > R2) continue;
            z[level] = v;
            if (level == 0) {
                bool nonzero = false;
                for (long long t : z) nonzero |= (t != 0);
                if (nonzero) {
                    std::vector<long long> a(k, 0);
                    for (int c = 0; c < k; ++c)
                        if (z[c] != 0) checked_axpy(a, z[c], U[c]);
                    out.push_back(std::move(a));
                }
            } else {
                self(self, level - 1, cost);
            }
        }
        z[level] = 0;
    };
    descend(descend, k - 1, 0.0);
    return out;
}

}  // namespace smallforms::lattice
