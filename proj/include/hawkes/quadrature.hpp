#pragma once

#include <array>
#include <cstddef>

namespace hawkes {

// Composite Simpson rule with `panels` panels (panels rounded up to even).
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i)
        s += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Composite trapezoid rule on a uniform grid of `n + 1` points.
template <typename F>
double trapezoid(F&& f, double a, double b, std::size_t n) {
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
    return s * h;
}

// 8-point Gauss-Legendre nodes/weights on [-1,1]; exact for degree <= 15,
// enough for products of cubic splines per knot span.
struct GaussLegendre8 {
    static constexpr std::array<double, 8> nodes = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> weights = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

    template <typename F>
    static double integrate(F&& f, double a, double b) {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < 8; ++i) s += weights[i] * f(mid + half * nodes[i]);
        return s * half;
    }
};

}  // namespace hawkes
