#include "smallforms/matrix.hpp"

#include "smallforms/errors.hpp"

namespace smallforms {

Rat RatMatrix::det() const {
    if (r_ != c_) throw ConfigError("det: matrix not square");
    int n = r_;
    std::vector<Rat> m = a_;
    Rat d(1);
    for (int k = 0; k < n; ++k) {
        int piv = -1;
        for (int i = k; i < n; ++i)
            if (m[i * n + k] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) return Rat(0);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m[piv * n + j], m[k * n + j]);
            d = -d;
        }
        d *= m[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            if (m[i * n + k] == 0) continue;
            Rat f = m[i * n + k] / m[k * n + k];
            for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
        }
    }
    return d;
}

Rat RatMatrix::max_abs_entry() const {
    Rat mx(0);
    for (const Rat& v : a_) {
        Rat av = abs(v);
        if (av > mx) mx = av;
    }
    return mx;
}

std::vector<Rat> RatMatrix::mul(const std::vector<Rat>& v) const {
    if ((int)v.size() != c_) throw ConfigError("mul: dimension mismatch");
    std::vector<Rat> out(r_, Rat(0));
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) out[i] += a_[i * c_ + j] * v[j];
    return out;
}

}  // namespace smallforms
