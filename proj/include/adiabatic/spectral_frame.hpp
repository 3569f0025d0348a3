#pragma once

// Instantaneous eigenframe along a time grid: tracked energies, eigenvectors
// in the parallel-transport gauge, coupling matrix elements <m'(s)|n(s)>,
// and cumulative dynamical phases f_m(s).

#include "adiabatic/error.hpp"
#include "adiabatic/hamiltonian_models.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace adiabatic {

enum class GridPolicy { uniform, oscillation_resolving };

inline std::string_view to_string(GridPolicy p) noexcept
{
    return p == GridPolicy::uniform ? "uniform" : "oscillation_resolving";
}

struct GridOptions {
    GridPolicy policy = GridPolicy::oscillation_resolving;
    double points_per_period = 128.0; ///< >= 8
    double max_step = 1e-3;           ///< shape resolution, dimensionless
    std::size_t uniform_intervals = 2000;
    std::size_t max_nodes = 20'000'000;
};

/// Uniform grid 0 = s_0 < ... < s_M = S with M even (Simpson-compatible).
class TimeGrid {
public:
    TimeGrid() = default;

    static TimeGrid uniform(double duration, std::size_t intervals,
                            GridPolicy policy = GridPolicy::uniform)
    {
        if(!(duration > 0) || !std::isfinite(duration))
            throw Error(ErrorKind::InvalidParameter, "grid duration must be > 0", "duration");
        intervals = std::max<std::size_t>(intervals, 2);
        intervals += intervals % 2;
        TimeGrid g;
        g.duration_ = duration;
        g.intervals_ = intervals;
        g.policy_ = policy;
        return g;
    }

    std::size_t intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_ + 1; }
    double duration() const noexcept { return duration_; }
    double step() const noexcept { return duration_ / static_cast<double>(intervals_); }
    GridPolicy policy() const noexcept { return policy_; }

    double node(std::size_t j) const noexcept
    {
        return j == intervals_ ? duration_
                               : duration_ * static_cast<double>(j) / static_cast<double>(intervals_);
    }

    std::vector<double> nodes() const
    {
        std::vector<double> out(size());
        for(std::size_t j = 0; j < out.size(); ++j)
            out[j] = node(j);
        return out;
    }

private:
    double duration_ = 1.0;
    std::size_t intervals_ = 2;
    GridPolicy policy_ = GridPolicy::uniform;
};

struct Decomposition {
    RealVector energies; ///< ascending
    Matrix vectors;      ///< orthonormal columns
};

inline Decomposition decompose(const Matrix& h)
{
    if(!h.allFinite())
        throw Error(ErrorKind::NonFinite, "Hamiltonian has non-finite entries");
    if(hermiticity_defect(h) > 1e-9 * std::max(1.0, max_abs(h)))
        throw Error(ErrorKind::InvalidParameter, "decompose requires a Hermitian matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if(es.info() != Eigen::Success)
        throw Error(ErrorKind::NumericalFailure, "eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Largest level spread max_s (eps_max - eps_min), sampled on a coarse grid.
inline double estimate_spectral_width(const Model& model, std::size_t samples = 257)
{
    double width = 0.0;
    for(std::size_t i = 0; i < samples; ++i)
    {
        const double s = model.duration() * static_cast<double>(i) / static_cast<double>(samples - 1);
        const auto e = decompose(model.h_at(s)).energies;
        width = std::max(width, e.maxCoeff() - e.minCoeff());
    }
    return width;
}

/// Grid for a given model and lambda. Under oscillation_resolving the step is
/// min(max_step, 2 pi / (lambda * width * points_per_period)), with the width
/// padded by 5% over the sampled estimate.
inline TimeGrid make_grid(const Model& model, double lambda, const GridOptions& opt = {})
{
    const double S = model.duration();
    if(opt.policy == GridPolicy::uniform)
        return TimeGrid::uniform(S, opt.uniform_intervals, GridPolicy::uniform);
    if(!(opt.points_per_period >= 8.0))
        throw Error(ErrorKind::InvalidParameter, "points_per_period must be >= 8",
                    "grid.points_per_period");
    if(!(opt.max_step > 0))
        throw Error(ErrorKind::InvalidParameter, "max_step must be > 0", "grid.max_step");
    double step = opt.max_step;
    const double width = 1.05 * estimate_spectral_width(model);
    if(width > 0 && lambda > 0)
        step = std::min(step, 2.0 * pi / (lambda * width * opt.points_per_period));
    const double intervals = std::ceil(S / step);
    if(intervals + 1 > static_cast<double>(opt.max_nodes))
        throw Error(ErrorKind::GridTooCoarse,
                    "resolving lambda*S = " + std::to_string(lambda * S) + " needs "
                        + std::to_string(static_cast<long long>(intervals))
                        + " intervals, above max_nodes");
    return TimeGrid::uniform(S, static_cast<std::size_t>(intervals),
                             GridPolicy::oscillation_resolving);
}

struct FrameOptions {
    double gap_tol = 1e-3;
    double min_tracking_overlap = 0.7;
    /// Multiply every raw eigenvector by a random unit phase before gauge
    /// fixing. Used to check that physics is gauge independent.
    std::optional<std::uint64_t> phase_jitter_seed;
};

struct TrackingStep {
    double min_overlap = 1.0; ///< smallest |<n(s_j)|n(s_{j+1})>| over levels
    bool reordered = false;   ///< tracked labels differ from ascending order
};

struct EigenFrame {
    TimeGrid grid;
    std::vector<RealVector> energies; ///< per node, tracked labels
    std::vector<Matrix> vectors;      ///< per node, columns |n(s_j)>
    double min_gap = std::numeric_limits<double>::infinity();
    double gap_tol = 1e-3;
    std::vector<TrackingStep> tracking_log;

    int dim() const noexcept { return vectors.empty() ? 0 : static_cast<int>(vectors.front().cols()); }
    std::size_t size() const noexcept { return vectors.size(); }

    /// max over nodes of (eps_max - eps_min)
    double spectral_width() const
    {
        double w = 0.0;
        for(const auto& e : energies)
            w = std::max(w, e.maxCoeff() - e.minCoeff());
        return w;
    }
};

namespace detail {

// Greedy maximum-|overlap| assignment: perm[a] is the raw column that
// continues tracked level a.
inline std::vector<int> greedy_assignment(const Matrix& overlap)
{
    const int n = static_cast<int>(overlap.rows());
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n * n));
    for(int a = 0; a < n; ++a)
        for(int b = 0; b < n; ++b)
            pairs.emplace_back(a, b);
    std::stable_sort(pairs.begin(), pairs.end(), [&](auto x, auto y) {
        return std::abs(overlap(x.first, x.second)) > std::abs(overlap(y.first, y.second));
    });
    std::vector<int> perm(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    int assigned = 0;
    for(auto [a, b] : pairs)
    {
        if(perm[static_cast<std::size_t>(a)] >= 0 || used[static_cast<std::size_t>(b)])
            continue;
        perm[static_cast<std::size_t>(a)] = b;
        used[static_cast<std::size_t>(b)] = true;
        if(++assigned == n)
            break;
    }
    return perm;
}

inline void check_gaps(const RealVector& e, double s, double gap_tol, double& min_gap)
{
    const int n = static_cast<int>(e.size());
    for(int a = 0; a < n; ++a)
        for(int b = a + 1; b < n; ++b)
        {
            const double gap = std::abs(e(a) - e(b));
            min_gap = std::min(min_gap, gap);
            if(gap < gap_tol)
                throw Error(ErrorKind::GapCollapse,
                            "gap " + std::to_string(gap) + " between levels " + std::to_string(a)
                                + " and " + std::to_string(b) + " at s = " + std::to_string(s)
                                + " is below gap_tol " + std::to_string(gap_tol));
        }
}

} // namespace detail

/// Builds the tracked, parallel-transported eigenframe. Level labels follow
/// continuity (greedy overlap assignment against the previous node); each
/// vector is re-phased so that <n(s_j)|n(s_{j+1})> is real and positive.
inline EigenFrame build_frame(const Model& model, const TimeGrid& grid, const FrameOptions& opt = {})
{
    if(!(opt.gap_tol > 0))
        throw Error(ErrorKind::InvalidParameter, "gap_tol must be > 0", "gap_tol");
    if(std::abs(grid.duration() - model.duration()) > 1e-12 * std::max(1.0, model.duration()))
        throw Error(ErrorKind::DimensionMismatch, "grid duration differs from model duration");

    EigenFrame frame;
    frame.grid = grid;
    frame.gap_tol = opt.gap_tol;
    const std::size_t n_nodes = grid.size();
    frame.energies.reserve(n_nodes);
    frame.vectors.reserve(n_nodes);
    frame.tracking_log.reserve(n_nodes - 1);

    std::optional<std::mt19937_64> rng;
    if(opt.phase_jitter_seed)
        rng.emplace(*opt.phase_jitter_seed);

    const int dim = model.dim();
    for(std::size_t j = 0; j < n_nodes; ++j)
    {
        const double s = grid.node(j);
        auto [energies, vectors] = decompose(model.h_at(s));
        if(rng)
            for(int c = 0; c < dim; ++c)
                vectors.col(c) *= std::polar(1.0, 2.0 * pi * detail::signed_unit(*rng));

        if(j == 0)
        {
            detail::check_gaps(energies, s, opt.gap_tol, frame.min_gap);
            frame.energies.push_back(std::move(energies));
            frame.vectors.push_back(std::move(vectors));
            continue;
        }

        const Matrix& prev = frame.vectors.back();
        const Matrix overlap = prev.adjoint() * vectors;
        const auto perm = detail::greedy_assignment(overlap);

        TrackingStep step;
        RealVector tracked_e(dim);
        Matrix tracked_v(dim, dim);
        for(int a = 0; a < dim; ++a)
        {
            const int b = perm[static_cast<std::size_t>(a)];
            const cx_double o = overlap(a, b);
            const double mag = std::abs(o);
            step.min_overlap = std::min(step.min_overlap, mag);
            step.reordered = step.reordered || (a != b);
            tracked_e(a) = energies(b);
            tracked_v.col(a) = vectors.col(b) * (mag > 0 ? std::conj(o) / mag : cx_double{1.0});
        }
        if(step.min_overlap < opt.min_tracking_overlap)
            throw Error(ErrorKind::TrackingAmbiguous,
                        "best level assignment overlap " + std::to_string(step.min_overlap)
                            + " at s = " + std::to_string(s) + " (grid too coarse)");
        detail::check_gaps(tracked_e, s, opt.gap_tol, frame.min_gap);
        frame.tracking_log.push_back(step);
        frame.energies.push_back(std::move(tracked_e));
        frame.vectors.push_back(std::move(tracked_v));
    }
    return frame;
}

/// g_mn(s_j) = <m'(s_j)|n(s_j)> for every node.
struct CouplingKernel {
    std::vector<Matrix> g;

    std::size_t size() const noexcept { return g.size(); }
    const Matrix& at(std::size_t j) const { return g.at(j); }
};

/// Hellmann-Feynman coupling: g_mn = <m|h'|n> / (eps_m - eps_n) for m != n,
/// zero on the diagonal (parallel-transport gauge).
inline Matrix coupling_at(const EigenFrame& frame, const Model& model, std::size_t j)
{
    const Matrix& v = frame.vectors.at(j);
    const RealVector& e = frame.energies.at(j);
    const Matrix dh = v.adjoint() * model.dh_ds_at(frame.grid.node(j)) * v;
    const int dim = frame.dim();
    Matrix g = Matrix::Zero(dim, dim);
    for(int m = 0; m < dim; ++m)
        for(int n = 0; n < dim; ++n)
        {
            if(m == n)
                continue;
            const double gap = e(m) - e(n);
            if(std::abs(gap) < frame.gap_tol)
                throw Error(ErrorKind::GapCollapse,
                            "coupling denominator below gap_tol at s = "
                                + std::to_string(frame.grid.node(j)));
            g(m, n) = dh(m, n) / gap;
        }
    if(!g.allFinite())
        throw Error(ErrorKind::NonFinite, "non-finite coupling at s = " + std::to_string(frame.grid.node(j)));
    return g;
}

inline CouplingKernel coupling_kernel(const EigenFrame& frame, const Model& model)
{
    CouplingKernel k;
    k.g.reserve(frame.size());
    for(std::size_t j = 0; j < frame.size(); ++j)
        k.g.push_back(coupling_at(frame, model, j));
    return k;
}

/// Discrete-difference estimate <(m(s_{j+1}) - m(s_{j-1})) / 2ds | n(s_j)> at
/// an interior node. Independent of the Hellmann-Feynman path.
inline Matrix coupling_finite_difference(const EigenFrame& frame, std::size_t j)
{
    if(j == 0 || j + 1 >= frame.size())
        throw Error(ErrorKind::OutOfDomain, "finite-difference coupling needs an interior node");
    const Matrix dv = (frame.vectors[j + 1] - frame.vectors[j - 1]) / (2.0 * frame.grid.step());
    return dv.adjoint() * frame.vectors[j];
}

/// f_m(s_j) = int_0^{s_j} eps_m(s') ds', row j, column m.
struct PhaseTable {
    Eigen::MatrixXd f;

    double at(std::size_t j, int m) const { return f(static_cast<Eigen::Index>(j), m); }
    double at_end(int m) const { return f(f.rows() - 1, m); }
};

inline PhaseTable phase_table(const EigenFrame& frame)
{
    const int dim = frame.dim();
    const std::size_t n = frame.size();
    PhaseTable table;
    table.f.resize(static_cast<Eigen::Index>(n), dim);
    std::vector<double> eps(n);
    for(int m = 0; m < dim; ++m)
    {
        for(std::size_t j = 0; j < n; ++j)
            eps[j] = frame.energies[j](m);
        const auto cum = cumulative_simpson<double>(eps, frame.grid.step());
        for(std::size_t j = 0; j < n; ++j)
            table.f(static_cast<Eigen::Index>(j), m) = cum[j];
    }
    return table;
}

} // namespace adiabatic
