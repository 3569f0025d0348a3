#pragma once

// Order-by-order jump expansion in the moving (instantaneous eigen-) frame.
//
// Amplitude convention: A~_m(s) = <m(s)|psi(s)> exp(+i lambda f_m(s)). The
// physical amplitude <m(S)|psi(S)> is exp(-i lambda f_m(S)) A~_m(S). In this
// convention the Schroedinger equation becomes
//
//   dA~_m/ds = sum_{n != m} g_mn(s) exp(i lambda (f_m(s) - f_n(s))) A~_n(s),
//
// and order k is the k-th Volterra iterate starting from A~^(0) = delta_{m,m0}.

#include "adiabatic/error.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/quadrature.hpp"
#include "adiabatic/spectral_frame.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace adiabatic {

struct JumpSeries {
    int m0 = 0;
    double lambda = 0.0;
    QuadratureRule rule = QuadratureRule::simpson;
    /// orders[k](j, m) = A~_m^(k)(s_j)
    std::vector<Eigen::MatrixXcd> orders;
    /// ||A~^(k)(S)||_2 per order
    std::vector<double> order_norms;

    int max_order() const noexcept { return static_cast<int>(orders.size()) - 1; }
    std::size_t nodes() const noexcept { return orders.empty() ? 0 : static_cast<std::size_t>(orders.front().rows()); }
    int dim() const noexcept { return orders.empty() ? 0 : static_cast<int>(orders.front().cols()); }

    cx_double amplitude(int k, int m, std::size_t j) const
    {
        return orders.at(static_cast<std::size_t>(k))(static_cast<Eigen::Index>(j), m);
    }

    cx_double at_end(int k, int m) const { return amplitude(k, m, nodes() - 1); }
};

namespace detail {

inline void require_order(const JumpSeries& series, int K)
{
    if(K < 0 || K > series.max_order())
        throw Error(ErrorKind::OrderUnavailable,
                    "order " + std::to_string(K) + " requested, series holds 0.."
                        + std::to_string(series.max_order()));
}

inline void require_level(int dim, int m)
{
    if(m < 0 || m >= dim)
        throw Error(ErrorKind::LevelOutOfRange,
                    "level " + std::to_string(m) + " outside [0, " + std::to_string(dim) + ")");
}

// exp(+i lambda f_m(s_j)) for every node and level
inline Eigen::MatrixXcd phase_factors(const PhaseTable& phases, double lambda)
{
    Eigen::MatrixXcd p(phases.f.rows(), phases.f.cols());
    for(Eigen::Index j = 0; j < p.rows(); ++j)
        for(Eigen::Index m = 0; m < p.cols(); ++m)
            p(j, m) = std::polar(1.0, lambda * phases.f(j, m));
    return p;
}

} // namespace detail

/// Largest step permitted for a frame at this lambda: eight points per period
/// of the fastest Bohr oscillation.
inline double max_resolving_step(const EigenFrame& frame, double lambda)
{
    const double w = frame.spectral_width();
    if(w <= 0 || lambda <= 0)
        return std::numeric_limits<double>::infinity();
    return 2.0 * pi / (lambda * w * 8.0);
}

inline JumpSeries expand(const EigenFrame& frame, const CouplingKernel& kernel,
                         const PhaseTable& phases, double lambda, int K, int m0 = 0,
                         QuadratureRule rule = QuadratureRule::simpson)
{
    if(K < 0)
        throw Error(ErrorKind::InvalidParameter, "expansion order must be >= 0", "K");
    const int dim = frame.dim();
    detail::require_level(dim, m0);
    const std::size_t n = frame.size();
    if(kernel.size() != n || static_cast<std::size_t>(phases.f.rows()) != n)
        throw Error(ErrorKind::DimensionMismatch, "kernel/phase table do not match the frame grid");
    if(!std::isfinite(lambda))
        throw Error(ErrorKind::NonFinite, "lambda is not finite");
    const double h = frame.grid.step();
    if(h > max_resolving_step(frame, lambda) * (1.0 + 1e-12))
        throw Error(ErrorKind::GridTooCoarse,
                    "grid step " + std::to_string(h) + " does not resolve lambda = "
                        + std::to_string(lambda) + " (need <= "
                        + std::to_string(max_resolving_step(frame, lambda)) + ")");

    const Eigen::MatrixXcd p = detail::phase_factors(phases, lambda);

    JumpSeries series;
    series.m0 = m0;
    series.lambda = lambda;
    series.rule = rule;
    series.orders.reserve(static_cast<std::size_t>(K) + 1);

    Eigen::MatrixXcd zeroth = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), dim);
    zeroth.col(m0).setOnes();
    series.orders.push_back(std::move(zeroth));

    std::vector<cx_double> integrand(n);
    for(int k = 1; k <= K; ++k)
    {
        const Eigen::MatrixXcd& prev = series.orders.back();
        Eigen::MatrixXcd next(static_cast<Eigen::Index>(n), dim);
        for(int m = 0; m < dim; ++m)
        {
            for(std::size_t j = 0; j < n; ++j)
            {
                const auto jj = static_cast<Eigen::Index>(j);
                cx_double acc{};
                for(int l = 0; l < dim; ++l)
                    if(l != m)
                        acc += kernel.g[j](m, l) * std::conj(p(jj, l)) * prev(jj, l);
                integrand[j] = acc * p(jj, m);
            }
            const auto cum = cumulative_integral<cx_double>(integrand, h, rule);
            for(std::size_t j = 0; j < n; ++j)
                next(static_cast<Eigen::Index>(j), m) = cum[j];
        }
        if(!next.allFinite())
            throw Error(ErrorKind::NonFinite, "non-finite amplitude at order " + std::to_string(k));
        series.orders.push_back(std::move(next));
    }
    for(const auto& order : series.orders)
        series.order_norms.push_back(order.row(order.rows() - 1).norm());
    return series;
}

/// |psi^(<=K)(S)> = sum_m exp(-i lambda f_m(S)) sum_{k<=K} A~_m^(k)(S) |m(S)>
inline Vector assemble_state(const JumpSeries& series, const EigenFrame& frame,
                             const PhaseTable& phases, double lambda, int K)
{
    detail::require_order(series, K);
    const int dim = frame.dim();
    const Matrix& v = frame.vectors.back();
    Vector psi = Vector::Zero(dim);
    for(int m = 0; m < dim; ++m)
    {
        cx_double a{};
        for(int k = 0; k <= K; ++k)
            a += series.at_end(k, m);
        psi += std::polar(1.0, -lambda * phases.at_end(m)) * a * v.col(m);
    }
    return psi;
}

/// Order-k contribution alone, as a state at s = S.
inline Vector order_state(const JumpSeries& series, const EigenFrame& frame,
                          const PhaseTable& phases, double lambda, int k)
{
    detail::require_order(series, k);
    const int dim = frame.dim();
    const Matrix& v = frame.vectors.back();
    Vector psi = Vector::Zero(dim);
    for(int m = 0; m < dim; ++m)
        psi += std::polar(1.0, -lambda * phases.at_end(m)) * series.at_end(k, m) * v.col(m);
    return psi;
}

/// <m(S)|psi(S)> truncated at K jumps, with the dynamical-phase prefactor
/// restored.
inline cx_double eigenbasis_amplitude(const JumpSeries& series, const PhaseTable& phases,
                                 double lambda, int m, int K)
{
    detail::require_order(series, K);
    detail::require_level(series.dim(), m);
    cx_double a{};
    for(int k = 0; k <= K; ++k)
        a += series.at_end(k, m);
    return std::polar(1.0, -lambda * phases.at_end(m)) * a;
}

/// Level sequence m0 -> n1 -> ... -> nk with no consecutive repeats.
struct DiagramPath {
    std::vector<int> levels;

    int jumps() const noexcept { return static_cast<int>(levels.size()) - 1; }
    int initial() const { return levels.front(); }
    int final_level() const { return levels.back(); }
    bool operator==(const DiagramPath&) const = default;
};

/// All k-jump paths from m0 in lexicographic order; (dim - 1)^K of them.
inline std::vector<DiagramPath> diagram_paths(int dim, int K, int m0)
{
    if(dim < 2)
        throw Error(ErrorKind::InvalidParameter, "dim must be >= 2", "dim");
    if(K < 0)
        throw Error(ErrorKind::InvalidParameter, "K must be >= 0", "K");
    detail::require_level(dim, m0);
    std::vector<DiagramPath> out{DiagramPath{{m0}}};
    for(int k = 0; k < K; ++k)
    {
        std::vector<DiagramPath> grown;
        grown.reserve(out.size() * static_cast<std::size_t>(dim - 1));
        for(const auto& path : out)
            for(int next = 0; next < dim; ++next)
                if(next != path.levels.back())
                {
                    DiagramPath p = path;
                    p.levels.push_back(next);
                    grown.push_back(std::move(p));
                }
        out = std::move(grown);
    }
    return out;
}

namespace detail {

// int_0^{s_j} of f sampled on a uniform grid, evaluated from scratch for a
// single j: Simpson for even j, Simpson plus a closing 3/8 panel for odd j.
template <class Values>
cx_double direct_integral(const Values& f, std::size_t j, double h)
{
    if(j == 0)
        return {};
    if(j == 1)
        return h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    cx_double sum{};
    const std::size_t even_end = (j % 2 == 0) ? j : j - 3;
    for(std::size_t i = 0; i + 2 <= even_end; i += 2)
        sum += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if(even_end != j)
        sum += 3.0 * h / 8.0 * (f[j - 3] + 3.0 * f[j - 2] + 3.0 * f[j - 1] + f[j]);
    return sum;
}

} // namespace detail

/// Time-ordered nested integral for one diagram, evaluated by direct
/// summation (cost grows as grid^2 per intermediate jump). Oracle use only.
inline cx_double nested_quadrature_term(const EigenFrame& frame, const CouplingKernel& kernel,
                                        const PhaseTable& phases, double lambda,
                                        const DiagramPath& path)
{
    if(path.levels.empty())
        throw Error(ErrorKind::InvalidParameter, "empty diagram path", "path");
    if(path.jumps() > 3)
        throw Error(ErrorKind::PathTooLong, "nested quadrature supports at most 3 jumps");
    const int dim = frame.dim();
    for(std::size_t i = 0; i < path.levels.size(); ++i)
    {
        detail::require_level(dim, path.levels[i]);
        if(i > 0 && path.levels[i] == path.levels[i - 1])
            throw Error(ErrorKind::InvalidParameter, "diagram path repeats a level", "path");
    }
    const std::size_t n = frame.size();
    const double h = frame.grid.step();

    auto kernel_at = [&](std::size_t j, int to, int from) {
        const auto jj = static_cast<Eigen::Index>(j);
        return kernel.g[j](to, from) * std::polar(1.0, lambda * (phases.f(jj, to) - phases.f(jj, from)));
    };

    if(path.jumps() == 0)
        return 1.0;

    std::vector<cx_double> inner(n, cx_double{1.0});
    std::vector<cx_double> integrand(n);
    for(int step = 1; step <= path.jumps(); ++step)
    {
        const int from = path.levels[static_cast<std::size_t>(step - 1)];
        const int to = path.levels[static_cast<std::size_t>(step)];
        for(std::size_t j = 0; j < n; ++j)
            integrand[j] = kernel_at(j, to, from) * inner[j];
        if(step == path.jumps())
            return detail::direct_integral(integrand, n - 1, h);
        for(std::size_t j = 0; j < n; ++j)
            inner[j] = detail::direct_integral(integrand, j, h);
    }
    return {};
}

/// Text rendering of the diagram expansion up to K jumps.
inline std::string describe_diagrams(int dim, int K, int m0)
{
    std::ostringstream os;
    os << "jump expansion: dim = " << dim << ", initial level " << m0 << ", orders 0.." << K << "\n";
    os << "  each segment on level n contributes exp(-i lambda int eps_n ds);\n"
       << "  each jump n -> m at s_i contributes g_mn(s_i) = <m'(s_i)|n(s_i)>;\n"
       << "  jump times are ordered 0 < s_1 < ... < s_k < S and integrated over.\n";
    for(int k = 0; k <= K; ++k)
    {
        const auto paths = diagram_paths(dim, k, m0);
        os << "\norder " << k << " (" << paths.size() << (paths.size() == 1 ? " diagram)" : " diagrams)") << "\n";
        for(const auto& p : paths)
        {
            os << "  ";
            // picture: level labels along time with jump markers
            for(std::size_t i = 0; i < p.levels.size(); ++i)
            {
                if(i > 0)
                    os << " --[s" << i << "]--> ";
                os << p.levels[i];
            }
            os << "\n    = ";
            if(k > 0)
            {
                for(int i = k; i >= 1; --i)
                    os << "int_0^" << (i == k ? std::string("S") : "s" + std::to_string(i + 1)) << " ds" << i << " ";
            }
            // phases and couplings, latest time first
            const int last = p.levels.back();
            os << "exp(-i lambda int_" << (k > 0 ? "s" + std::to_string(k) : std::string("0")) << "^S eps_" << last << ")";
            for(int i = k; i >= 1; --i)
            {
                const int to = p.levels[static_cast<std::size_t>(i)];
                const int from = p.levels[static_cast<std::size_t>(i - 1)];
                os << " g_" << to << from << "(s" << i << ")";
                const std::string lo = i > 1 ? "s" + std::to_string(i - 1) : "0";
                os << " exp(-i lambda int_" << lo << "^s" << i << " eps_" << from << ")";
            }
            os << " |" << last << "(S)>\n";
        }
    }
    return os.str();
}

} // namespace adiabatic
