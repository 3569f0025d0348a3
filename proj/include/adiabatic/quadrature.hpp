#pragma once

#include <cstddef>
#include <vector>

namespace adiabatic {

enum class QuadratureRule {
    trapezoid, ///< order 2
    simpson,   ///< order 4
};

/// Running integral I_j = int_0^{s_j} f on a uniform grid with spacing h.
///
/// Even nodes get composite Simpson; odd nodes add the three-point interval
/// rule h/12 (5 f_j + 8 f_{j+1} - f_{j+2}) to the preceding even node. An odd
/// interval count closes with the mirrored three-point rule.
template <class T, class Values>
std::vector<T> cumulative_simpson(const Values& f, double h)
{
    const std::size_t n = f.size();
    std::vector<T> out(n, T{});
    if(n < 2)
        return out;
    if(n == 2)
    {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    const std::size_t last = n - 1;
    std::size_t j = 0;
    for(; j + 2 <= last; j += 2)
    {
        out[j + 1] = out[j] + h / 12.0 * (5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2]);
        out[j + 2] = out[j] + h / 3.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2]);
    }
    if(j < last)
        out[last] = out[last - 1] + h / 12.0 * (-f[last - 2] + 8.0 * f[last - 1] + 5.0 * f[last]);
    return out;
}

template <class T, class Values>
std::vector<T> cumulative_trapezoid(const Values& f, double h)
{
    const std::size_t n = f.size();
    std::vector<T> out(n, T{});
    for(std::size_t j = 1; j < n; ++j)
        out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
    return out;
}

template <class T, class Values>
std::vector<T> cumulative_integral(const Values& f, double h, QuadratureRule rule)
{
    return rule == QuadratureRule::simpson ? cumulative_simpson<T>(f, h)
                                           : cumulative_trapezoid<T>(f, h);
}

} // namespace adiabatic
