#include "cpgibbs/encoding.hpp"

#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace cpgibbs::encoding {

namespace mp = boost::multiprecision;

bool check_multiplicative_independence(int m, int n) {
    if (m < 2 || n < 2) throw InvalidArgument("adic bases must be >= 2");
    if (m == n) return false;
    mp::cpp_int mq = 1;
    for (int q = 1; q <= 64; ++q) {
        mq *= m;
        mp::cpp_int np = 1;
        for (int p = 1; p <= 64; ++p) {
            np *= n;
            if (np == mq) return false;
            if (np > mq) break;
        }
    }
    return true;
}

AdicParams make_adic_params(int m, int n) {
    if (m < 2 || n < 2) throw InvalidArgument("adic: m and n must be >= 2");
    if (m > n) std::swap(m, n);
    if (!check_multiplicative_independence(m, n))
        throw MultiplicativeDependenceError("adic: m = " + std::to_string(m) + " and n = " + std::to_string(n) +
                                            " are multiplicatively dependent; log m / log n must be irrational");
    return {m, n, std::log(double(m)) / std::log(double(n))};
}

namespace {

constexpr long long kMaxStep = 1'000'000;

// t = 0: largest j with n^j <= m^k, decided on integers.
long long exact_level(long long k, const AdicParams& params) {
    const mp::cpp_int mk = mp::pow(mp::cpp_int(params.m), static_cast<unsigned>(k));
    long long j = static_cast<long long>(std::floor(k * params.alpha)) - 1;
    if (j < 0) j = 0;
    mp::cpp_int nj = mp::pow(mp::cpp_int(params.n), static_cast<unsigned>(j));
    while (nj * params.n <= mk) {
        nj *= params.n;
        ++j;
    }
    return j;
}

}  // namespace

long long l_k(double t, long long k, const AdicParams& params) {
    if (k < 0 || k > kMaxStep) throw InvalidArgument("l_k: k must lie in [0, 1e6]");
    if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("l_k: t must lie in [0,1)");
    if (k == 0) return 0;
    const double x = t + static_cast<double>(k) * params.alpha;
    if (std::abs(x - std::round(x)) > 1e-9) return static_cast<long long>(std::floor(x));
    if (t == 0.0) return exact_level(k, params);
    const long double a = std::log(static_cast<long double>(params.m)) / std::log(static_cast<long double>(params.n));
    return static_cast<long long>(std::floor(static_cast<long double>(t) + static_cast<long double>(k) * a));
}

double angle_after(double t, long long k, const AdicParams& params) {
    const double x = t + static_cast<double>(k) * params.alpha;
    return x - static_cast<double>(l_k(t, k, params));
}

double Box::eccentricity() const { return width > height ? width / height : height / width; }

bool Box::contains(const Box& o, double slack) const {
    return o.x0 >= x0 - slack && o.x0 + o.width <= x0 + width + slack && o.y0 >= y0 - slack &&
           o.y0 + o.height <= y0 + height + slack;
}

Box box_of(std::span<const Symbol> x_prefix, std::span<const Symbol> y_prefix, long long k, double t,
           const AdicParams& params) {
    const long long l = l_k(t, k, params);
    if (static_cast<long long>(x_prefix.size()) < k || static_cast<long long>(y_prefix.size()) < l)
        throw InvalidArgument("box_of: prefixes shorter than the box depth");
    Box b;
    b.x_digits.assign(x_prefix.begin(), x_prefix.begin() + k);
    b.y_digits.assign(y_prefix.begin(), y_prefix.begin() + l);
    double scale = 1.0;
    for (Symbol d : b.x_digits) {
        if (d < 0 || d >= params.m) throw InvalidArgument("box_of: x digit out of range");
        scale /= params.m;
        b.x0 += d * scale;
    }
    b.width = std::pow(double(params.m), -double(k));
    const double lift = std::pow(double(params.n), t);
    scale = lift;
    for (Symbol d : b.y_digits) {
        if (d < 0 || d >= params.n) throw InvalidArgument("box_of: y digit out of range");
        scale /= params.n;
        b.y0 += d * scale;
    }
    b.height = lift * std::pow(double(params.n), -double(l));
    return b;
}

std::pair<double, double> xi_point(std::span<const Symbol> x_prefix, std::span<const Symbol> y_prefix,
                                   int depth, const AdicParams& params) {
    if (depth < 0 || static_cast<int>(x_prefix.size()) < depth || static_cast<int>(y_prefix.size()) < depth)
        throw InvalidArgument("xi_point: prefixes shorter than depth");
    // Horner from the deepest digit keeps the sums accurate.
    double x = 0.0, y = 0.0;
    for (int i = depth - 1; i >= 0; --i) {
        x = (x + x_prefix[i]) / params.m;
        y = (y + y_prefix[i]) / params.n;
    }
    return {x, y};
}

}  // namespace cpgibbs::encoding
