#pragma once

// Reference propagators for i d psi/ds = lambda h(s) psi. The two methods
// share no stepping code, so their agreement is independent evidence.

#include "adiabatic/error.hpp"
#include "adiabatic/hamiltonian_models.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/spectral_frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace adiabatic {

enum class PropagationMethod { slicing, ode };

enum class SlicingRule {
    midpoint_exponential, ///< exp(-i lambda h(s_j + ds/2) ds) per slice, exactly unitary
    first_order_literal,  ///< 1 - i lambda h(s_j) ds per slice, O(ds^2) per-slice error
};

struct PropagationResult {
    Vector state;
    PropagationMethod method = PropagationMethod::slicing;
    std::size_t steps = 0;
    std::size_t rejected_steps = 0;
    double tolerance = 0.0; ///< rtol for ode, slice width for slicing
    double norm_drift = 0.0;
};

namespace detail {

inline void check_initial_state(const Vector& psi, int dim)
{
    if(psi.size() != dim)
        throw Error(ErrorKind::DimensionMismatch, "initial state has the wrong dimension",
                    "initial_state");
    if(!psi.allFinite())
        throw Error(ErrorKind::NonFinite, "initial state has non-finite entries", "initial_state");
    if(std::abs(psi.norm() - 1.0) > 1e-10)
        throw Error(ErrorKind::InvalidParameter, "initial state must be normalized",
                    "initial_state");
}

} // namespace detail

inline PropagationResult propagate_slicing(const Model& model, double lambda, std::size_t slices,
                                           const Vector& initial,
                                           SlicingRule rule = SlicingRule::midpoint_exponential)
{
    if(slices < 1)
        throw Error(ErrorKind::InvalidParameter, "slice count must be >= 1", "slices");
    detail::check_initial_state(initial, model.dim());
    const double S = model.duration();
    const double ds = S / static_cast<double>(slices);

    Vector psi = initial;
    for(std::size_t j = 0; j < slices; ++j)
    {
        const double s = S * static_cast<double>(j) / static_cast<double>(slices);
        if(rule == SlicingRule::midpoint_exponential)
        {
            const auto [e, v] = decompose(model.h_at(std::min(s + 0.5 * ds, S)));
            Vector c = v.adjoint() * psi;
            for(Eigen::Index m = 0; m < c.size(); ++m)
                c(m) *= std::polar(1.0, -lambda * e(m) * ds);
            psi = v * c;
        }
        else
        {
            psi = (psi - I_unit * lambda * ds * (model.h_at(s) * psi)).eval();
        }
    }
    if(!psi.allFinite())
        throw Error(ErrorKind::NonFinite, "slicing propagation produced non-finite state");
    return {psi, PropagationMethod::slicing, slices, 0, ds, std::abs(psi.norm() - 1.0)};
}

/// Adaptive Dormand-Prince 5(4) with absolute and relative tolerance rtol.
/// The state is never renormalized; drift is reported.
inline PropagationResult propagate_ode(const Model& model, double lambda, double rtol,
                                       const Vector& initial)
{
    if(!(rtol >= 1e-13 && rtol <= 1e-6))
        throw Error(ErrorKind::InvalidParameter, "rtol must lie in [1e-13, 1e-6]", "rtol");
    detail::check_initial_state(initial, model.dim());

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double S = model.duration();
    auto rhs = [&](double s, const Vector& y) -> Vector {
        return -I_unit * lambda * (model.h_at(std::min(s, S)) * y);
    };

    const double atol = rtol;
    Vector y = initial;
    double s = 0.0;
    const double hnorm = std::max(1e-12, model.h_at(0.0).cwiseAbs().rowwise().sum().maxCoeff());
    double h = std::min(S, 0.01 / (std::max(lambda, 1.0) * hnorm));
    const double h_min = 1e-14 * std::max(1.0, S);

    PropagationResult res;
    res.method = PropagationMethod::ode;
    res.tolerance = rtol;

    Vector k1 = rhs(s, y);
    while(s < S)
    {
        if(s + h > S)
            h = S - s;
        const Vector k2 = rhs(s + c2 * h, y + h * (a21 * k1));
        const Vector k3 = rhs(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = rhs(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = rhs(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6
            = rhs(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector k7 = rhs(s + h, y_new);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err_norm = 0.0;
        for(Eigen::Index i = 0; i < y.size(); ++i)
        {
            const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            err_norm = std::max(err_norm, std::abs(err(i)) / scale);
        }
        if(!std::isfinite(err_norm))
            throw Error(ErrorKind::NonFinite, "ODE integration produced non-finite state");

        if(err_norm <= 1.0)
        {
            s = (S - (s + h) < h_min) ? S : s + h;
            y = y_new;
            k1 = k7;
            ++res.steps;
        }
        else
        {
            ++res.rejected_steps;
        }
        const double factor
            = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        h *= factor;
        if(s < S && h < h_min)
            throw Error(ErrorKind::StepSizeUnderflow,
                        "step size underflow at s = " + std::to_string(s));
    }
    res.state = y;
    res.norm_drift = std::abs(y.norm() - 1.0);
    return res;
}

/// A~_m = <m(S)|psi> exp(+i lambda f_m(S)) against the frame endpoint.
inline Vector moving_amplitudes(const Vector& state, const EigenFrame& frame,
                                const PhaseTable& phases, double lambda)
{
    if(state.size() != frame.dim())
        throw Error(ErrorKind::DimensionMismatch, "state dimension differs from frame dimension");
    Vector a = frame.vectors.back().adjoint() * state;
    for(Eigen::Index m = 0; m < a.size(); ++m)
        a(m) *= std::polar(1.0, lambda * phases.at_end(static_cast<int>(m)));
    return a;
}

struct CrossValidation {
    double state_residual = 0.0;  ///< ||psi_slicing - psi_ode||
    RealVector level_residuals;   ///< |<m(S)|psi_slicing - psi_ode>|
    double slicing_drift = 0.0;
    double ode_drift = 0.0;
    double threshold = 1e-6;
    /// slice product too coarse: residual above threshold or
    /// lambda * width * ds above 1/4
    bool insufficient_resolution = false;
};

/// Runs both oracles from |m0(0)> and compares final states. Per-level
/// residuals use the eigenbasis of h(S); their moduli are phase independent.
inline CrossValidation cross_validate(const Model& model, double lambda, double rtol,
                                      std::size_t slices, double threshold = 1e-6)
{
    const auto d0 = decompose(model.h_at(0.0));
    const Vector psi0 = d0.vectors.col(model.initial_state_index());
    const auto a = propagate_slicing(model, lambda, slices, psi0);
    const auto b = propagate_ode(model, lambda, rtol, psi0);

    CrossValidation cv;
    cv.threshold = threshold;
    cv.state_residual = (a.state - b.state).norm();
    const auto dS = decompose(model.h_at(model.duration()));
    cv.level_residuals = (dS.vectors.adjoint() * (a.state - b.state)).cwiseAbs();
    cv.slicing_drift = a.norm_drift;
    cv.ode_drift = b.norm_drift;
    const double width = estimate_spectral_width(model, 65);
    const double phase_per_slice = lambda * width * model.duration() / static_cast<double>(slices);
    cv.insufficient_resolution = cv.state_residual > threshold || phase_per_slice > 0.25;
    return cv;
}

} // namespace adiabatic
