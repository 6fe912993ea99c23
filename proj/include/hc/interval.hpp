#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "hc/errors.hpp"

namespace hc {

struct IntervalDomainError : DomainError {
    using DomainError::DomainError;
};

// Outward rounding by stepping one ulp past the round-to-nearest result.
// Valid for the correctly rounded IEEE operations; log gets a wider margin.
struct NudgeRounding {
    static constexpr const char* name = "nudge";
    static double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
    static double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
    static double add_down(double a, double b) { return down(a + b); }
    static double add_up(double a, double b) { return up(a + b); }
    static double sub_down(double a, double b) { return down(a - b); }
    static double sub_up(double a, double b) { return up(a - b); }
    static double mul_down(double a, double b) { return down(a * b); }
    static double mul_up(double a, double b) { return up(a * b); }
    static double div_down(double a, double b) { return down(a / b); }
    static double div_up(double a, double b) { return up(a / b); }
    static double sqrt_down(double a) { return a == 0 ? 0.0 : down(std::sqrt(a)); }
    static double sqrt_up(double a) { return up(std::sqrt(a)); }
};

// Directed rounding through the FPU rounding mode (fesetround). Defined in a
// translation unit compiled with -frounding-math; each call restores nearest.
struct HardwareRounding {
    static constexpr const char* name = "hardware";
    static double add_down(double a, double b);
    static double add_up(double a, double b);
    static double sub_down(double a, double b);
    static double sub_up(double a, double b);
    static double mul_down(double a, double b);
    static double mul_up(double a, double b);
    static double div_down(double a, double b);
    static double div_up(double a, double b);
    static double sqrt_down(double a);
    static double sqrt_up(double a);
};

template <class R>
class BasicInterval {
public:
    BasicInterval() = default;
    BasicInterval(double v) : lo_(v), hi_(v) {}  // NOLINT: exact double constants convert implicitly
    BasicInterval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo <= hi)) throw IntervalDomainError("interval with lo > hi");
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double mid() const { return 0.5 * lo_ + 0.5 * hi_; }
    double width() const { return hi_ - lo_; }
    bool contains(double x) const { return lo_ <= x && x <= hi_; }
    bool contains(const BasicInterval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool interior_contains(const BasicInterval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }
    bool contains_zero() const { return lo_ <= 0 && 0 <= hi_; }

    static BasicInterval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

    // Enclosure of the rational p/q.
    static BasicInterval ratio(double p, double q) { return BasicInterval(p) / BasicInterval(q); }

    friend BasicInterval operator+(const BasicInterval& a, const BasicInterval& b) {
        return {R::add_down(a.lo_, b.lo_), R::add_up(a.hi_, b.hi_)};
    }
    friend BasicInterval operator-(const BasicInterval& a, const BasicInterval& b) {
        return {R::sub_down(a.lo_, b.hi_), R::sub_up(a.hi_, b.lo_)};
    }
    friend BasicInterval operator-(const BasicInterval& a) { return {-a.hi_, -a.lo_}; }
    friend BasicInterval operator*(const BasicInterval& a, const BasicInterval& b) {
        double l = std::min({R::mul_down(a.lo_, b.lo_), R::mul_down(a.lo_, b.hi_), R::mul_down(a.hi_, b.lo_),
                             R::mul_down(a.hi_, b.hi_)});
        double h = std::max({R::mul_up(a.lo_, b.lo_), R::mul_up(a.lo_, b.hi_), R::mul_up(a.hi_, b.lo_),
                             R::mul_up(a.hi_, b.hi_)});
        return {l, h};
    }
    friend BasicInterval operator/(const BasicInterval& a, const BasicInterval& b) {
        if (b.contains_zero()) throw IntervalDomainError("interval division by an interval containing 0");
        double l = std::min({R::div_down(a.lo_, b.lo_), R::div_down(a.lo_, b.hi_), R::div_down(a.hi_, b.lo_),
                             R::div_down(a.hi_, b.hi_)});
        double h = std::max({R::div_up(a.lo_, b.lo_), R::div_up(a.lo_, b.hi_), R::div_up(a.hi_, b.lo_),
                             R::div_up(a.hi_, b.hi_)});
        return {l, h};
    }
    BasicInterval& operator+=(const BasicInterval& o) { return *this = *this + o; }
    BasicInterval& operator-=(const BasicInterval& o) { return *this = *this - o; }
    BasicInterval& operator*=(const BasicInterval& o) { return *this = *this * o; }
    BasicInterval& operator/=(const BasicInterval& o) { return *this = *this / o; }

    friend BasicInterval sqrt(const BasicInterval& a) {
        if (a.lo_ < 0) throw IntervalDomainError("interval sqrt of negative values");
        return {R::sqrt_down(a.lo_), R::sqrt_up(a.hi_)};
    }
    friend BasicInterval log(const BasicInterval& a) {
        if (!(a.lo_ > 0)) throw IntervalDomainError("interval log requires lo > 0");
        // libm log is not correctly rounded; allow two ulps each side.
        double l = NudgeRounding::down(NudgeRounding::down(std::log(a.lo_)));
        double h = NudgeRounding::up(NudgeRounding::up(std::log(a.hi_)));
        return {l, h};
    }
    friend BasicInterval square(const BasicInterval& a) {
        double m = std::min(std::fabs(a.lo_), std::fabs(a.hi_));
        double M = std::max(std::fabs(a.lo_), std::fabs(a.hi_));
        if (a.contains_zero()) m = 0;
        return {std::max(0.0, R::mul_down(m, m)), R::mul_up(M, M)};
    }
    friend BasicInterval pow(const BasicInterval& a, int n) {
        if (n < 0) return BasicInterval(1.0) / pow(a, -n);
        if (n == 0) return BasicInterval(1.0);
        BasicInterval r = a;
        if (n % 2 == 0) {
            r = square(a);
            for (int k = 2; k < n; k += 2) r = r * square(a);
            return r;
        }
        for (int k = 1; k < n; ++k) r = r * a;
        return r;
    }
    // max{c, a} for a constant c supplied as an interval enclosure
    friend BasicInterval max_with(const BasicInterval& c, const BasicInterval& a) {
        return {std::max(c.lo_, a.lo_), std::max(c.hi_, a.hi_)};
    }
    friend BasicInterval intersect(const BasicInterval& a, const BasicInterval& b) {
        double l = std::max(a.lo_, b.lo_), h = std::min(a.hi_, b.hi_);
        if (l > h) throw IntervalDomainError("empty intersection of enclosures");
        return {l, h};
    }
    friend BasicInterval hull(const BasicInterval& a, const BasicInterval& b) {
        return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
    }
    friend std::ostream& operator<<(std::ostream& os, const BasicInterval& a) {
        return os << '[' << a.lo_ << ", " << a.hi_ << ']';
    }

private:
    double lo_ = 0, hi_ = 0;
};

using Interval = BasicInterval<NudgeRounding>;
using HwInterval = BasicInterval<HardwareRounding>;

// First-order forward-mode value over intervals: value plus enclosures of the
// gradient in (gamma, delta). Used for the mean-value form of cell bounds.
template <class I>
struct DualI {
    I v, dg, dd;

    DualI() = default;
    DualI(const I& value) : v(value), dg(0.0), dd(0.0) {}  // NOLINT
    DualI(double value) : v(value), dg(0.0), dd(0.0) {}    // NOLINT
    DualI(const I& value, const I& g, const I& d) : v(value), dg(g), dd(d) {}

    friend DualI operator+(const DualI& a, const DualI& b) { return {a.v + b.v, a.dg + b.dg, a.dd + b.dd}; }
    friend DualI operator-(const DualI& a, const DualI& b) { return {a.v - b.v, a.dg - b.dg, a.dd - b.dd}; }
    friend DualI operator-(const DualI& a) { return {-a.v, -a.dg, -a.dd}; }
    friend DualI operator*(const DualI& a, const DualI& b) {
        return {a.v * b.v, a.dg * b.v + a.v * b.dg, a.dd * b.v + a.v * b.dd};
    }
    friend DualI operator/(const DualI& a, const DualI& b) {
        I q = a.v / b.v;
        return {q, (a.dg - q * b.dg) / b.v, (a.dd - q * b.dd) / b.v};
    }
    friend DualI sqrt(const DualI& a) {
        I s = sqrt(a.v);
        I two_s = I(2.0) * s;
        return {s, a.dg / two_s, a.dd / two_s};
    }
    friend DualI log(const DualI& a) { return {log(a.v), a.dg / a.v, a.dd / a.v}; }
    friend DualI max_with(const I& c, const DualI& a) {
        if (a.v.lo() > c.hi()) return a;
        if (a.v.hi() < c.lo()) return DualI(c);
        return {max_with(c, a.v), hull(a.dg, I(0.0)), hull(a.dd, I(0.0))};
    }
};

}  // namespace hc
