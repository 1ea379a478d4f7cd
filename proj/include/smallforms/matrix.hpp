#pragma once

#include <vector>

#include "smallforms/rational.hpp"

namespace smallforms {

// Dense matrix of exact rationals; rows-major.
class RatMatrix {
  public:
    RatMatrix() = default;
    RatMatrix(int rows, int cols) : r_(rows), c_(cols), a_(rows * cols, Rat(0)) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    Rat& at(int i, int j) { return a_[i * c_ + j]; }
    const Rat& at(int i, int j) const { return a_[i * c_ + j]; }

    Rat det() const;  // square only; Gaussian elimination with pivoting
    Rat max_abs_entry() const;
    std::vector<Rat> mul(const std::vector<Rat>& v) const;

  private:
    int r_ = 0, c_ = 0;
    std::vector<Rat> a_;
};

}  // namespace smallforms
