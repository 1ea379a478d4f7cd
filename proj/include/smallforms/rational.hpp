#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace smallforms {

using Int = mpz_class;
using Rat = mpq_class;

// Parses "p/q", "p", or a plain decimal like "-0.125" into an exact rational.
Rat rat_from_string(const std::string& s);

// Every finite double is a dyadic rational; this conversion is exact.
Rat rat_from_double(double x);

// Nearest-double conversion (mpq_get_d truncates; we go through mpf).
double rat_to_double(const Rat& q);

std::string rat_to_string(const Rat& q);

// max(|v_0|,...,|v_k|)
Int sup_norm(const std::vector<Int>& v);

// Rational r with |r - sqrt(x)| < 2^-bits, x >= 0.  Used to build
// high-precision rational stand-ins for irrational evaluation points.
Rat approx_sqrt(const Rat& x, unsigned bits = 96);

// floor(q) as an integer.
Int floor_rat(const Rat& q);

// Largest integer i with i < q (strict).
Int strict_floor(const Rat& q);

}  // namespace smallforms
