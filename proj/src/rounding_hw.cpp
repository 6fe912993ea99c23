// Compiled with -frounding-math (GCC ignores the FENV_ACCESS pragma).
#include <cfenv>
#include <cmath>

#include "hc/interval.hpp"


namespace hc {

namespace {

template <class Op>
double rounded(int mode, Op op) {
    std::fesetround(mode);
    volatile double r = op();
    std::fesetround(FE_TONEAREST);
    return r;
}

}  // namespace

double HardwareRounding::add_down(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_DOWNWARD, [&] { return x + y; });
}
double HardwareRounding::add_up(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_UPWARD, [&] { return x + y; });
}
double HardwareRounding::sub_down(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_DOWNWARD, [&] { return x - y; });
}
double HardwareRounding::sub_up(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_UPWARD, [&] { return x - y; });
}
double HardwareRounding::mul_down(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_DOWNWARD, [&] { return x * y; });
}
double HardwareRounding::mul_up(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_UPWARD, [&] { return x * y; });
}
double HardwareRounding::div_down(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_DOWNWARD, [&] { return x / y; });
}
double HardwareRounding::div_up(double a, double b) {
    volatile double x = a, y = b;
    return rounded(FE_UPWARD, [&] { return x / y; });
}
double HardwareRounding::sqrt_down(double a) {
    volatile double x = a;
    return rounded(FE_DOWNWARD, [&] { return std::sqrt(x); });
}
double HardwareRounding::sqrt_up(double a) {
    volatile double x = a;
    return rounded(FE_UPWARD, [&] { return std::sqrt(x); });
}

}  // namespace hc
