#pragma once

#include <algorithm>
#include <vector>

#include "smallforms/rational.hpp"

namespace smallforms {

struct RatInterval {
    Rat lo, hi;
    bool empty() const { return hi <= lo; }
    Rat length() const { return empty() ? Rat(0) : hi - lo; }
};

// Total length of the union, exact.
inline Rat union_length(std::vector<RatInterval> xs) {
    xs.erase(std::remove_if(xs.begin(), xs.end(), [](const RatInterval& i) { return i.empty(); }),
             xs.end());
    std::sort(xs.begin(), xs.end(),
              [](const RatInterval& a, const RatInterval& b) { return a.lo < b.lo; });
    Rat total(0);
    Rat cur_lo(0), cur_hi(0);
    bool open = false;
    for (const RatInterval& iv : xs) {
        if (!open) {
            cur_lo = iv.lo;
            cur_hi = iv.hi;
            open = true;
        } else if (iv.lo <= cur_hi) {
            if (iv.hi > cur_hi) cur_hi = iv.hi;
        } else {
            total += cur_hi - cur_lo;
            cur_lo = iv.lo;
            cur_hi = iv.hi;
        }
    }
    if (open) total += cur_hi - cur_lo;
    return total;
}

inline RatInterval intersect(const RatInterval& a, const RatInterval& b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

}  // namespace smallforms
