#pragma once

#include <span>
#include <utility>

#include "cpgibbs/sft.hpp"

namespace cpgibbs::encoding {

using sft::Symbol;
using sft::Word;

/// False iff m^q = n^p for some 1 <= p, q <= 64 (exact integer arithmetic).
bool check_multiplicative_independence(int m, int n);

struct AdicParams {
    int m = 2;
    int n = 3;
    double alpha = 0.0;  // log m / log n
};

/// Validates and orders (m, n) so that m < n. Throws
/// MultiplicativeDependenceError when log m / log n is rational.
AdicParams make_adic_params(int m, int n);

/// floor(t + k alpha), exact for k <= 1e6.
long long l_k(double t, long long k, const AdicParams& params);

/// Fractional part of t + k alpha.
double angle_after(double t, long long k, const AdicParams& params);

/// Mixed-adic rectangle. The level-0 box is R_t = [0,1) x [0, n^t).
struct Box {
    Word x_digits;  // depth k over {0..m-1}
    Word y_digits;  // depth l over {0..n-1}
    double x0 = 0.0, y0 = 0.0;
    double width = 1.0, height = 1.0;

    double volume() const { return width * height; }
    /// long side over short side
    double eccentricity() const;
    bool contains(const Box& other, double slack = 0.0) const;
};

/// Depth-(k, l_k(t)) box containing xi(omega), with the angle state {t + k alpha}.
Box box_of(std::span<const Symbol> x_prefix, std::span<const Symbol> y_prefix, long long k, double t,
           const AdicParams& params);

/// Truncated radix sums (sum x_i m^-i, sum y_i n^-i) over the first `depth` digits.
std::pair<double, double> xi_point(std::span<const Symbol> x_prefix, std::span<const Symbol> y_prefix,
                                   int depth, const AdicParams& params);

}  // namespace cpgibbs::encoding
