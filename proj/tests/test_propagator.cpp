#include "test_support.hpp"

#include <cmath>

using namespace adiabatic;
using namespace adiabatic::testing;

namespace {

Vector ground(const Model& m) { return decompose(m.h_at(0.0)).vectors.col(0); }

} // namespace

TEST(Propagator, ConstantHamiltonianIsExactPhase)
{
    const Model m = build_model(with_point(family_spec(Family::constant), 10.0, 1.0));
    Vector psi0 = Vector::Zero(2);
    psi0(0) = psi0(1) = 1.0 / std::sqrt(2.0);
    Vector exact(2);
    exact(0) = psi0(0);
    exact(1) = psi0(1) * std::polar(1.0, -10.0);
    EXPECT_LE((propagate_slicing(m, 10.0, 100, psi0).state - exact).norm(), 1e-13);
    EXPECT_LE((propagate_ode(m, 10.0, 1e-12, psi0).state - exact).norm(), 1e-10);
}

TEST(Propagator, MidpointSlicingIsSecondOrder)
{
    const Model m = build_model(with_point(family_spec(Family::landau_zener_window), 20.0, 1.0));
    const Vector psi0 = ground(m);
    const Vector ref = propagate_ode(m, 20.0, 1e-13, psi0).state;
    std::vector<double> n_values, errors;
    for(std::size_t n : {500, 1000, 2000, 4000})
    {
        n_values.push_back(static_cast<double>(n));
        errors.push_back((propagate_slicing(m, 20.0, n, psi0).state - ref).norm());
    }
    const auto fit = fit_power_law(n_values, errors);
    EXPECT_NEAR(fit.exponent, -2.0, 0.15);
}

TEST(Propagator, MidpointSlicingIsUnitaryLiteralIsNot)
{
    const Model m = build_model(with_point(family_spec(Family::smooth_interpolation), 50.0, 1.0));
    const Vector psi0 = ground(m);
    EXPECT_LE(propagate_slicing(m, 50.0, 1000, psi0).norm_drift, 1e-13);
    const auto literal = propagate_slicing(m, 50.0, 1000, psi0, SlicingRule::first_order_literal);
    EXPECT_GT(literal.norm_drift, 1e-3);
}

TEST(Propagator, OdeReportsDriftAndSteps)
{
    const Model m = build_model(with_point(three_level_spec(), 50.0, 1.0));
    const auto r = propagate_ode(m, 50.0, 1e-10, ground(m));
    EXPECT_EQ(r.method, PropagationMethod::ode);
    EXPECT_GT(r.steps, 10u);
    EXPECT_LE(r.norm_drift, 1e-8);
}

TEST(Propagator, CrossValidationAgreesAndFlagsCoarseSlicing)
{
    const Model m = build_model(with_point(family_spec(Family::landau_zener_window), 50.0, 1.0));
    const auto good = cross_validate(m, 50.0, 1e-10, 100'000);
    EXPECT_LE(good.state_residual, 1e-6);
    EXPECT_FALSE(good.insufficient_resolution);
    EXPECT_EQ(good.level_residuals.size(), 2);
    const auto coarse = cross_validate(m, 50.0, 1e-10, 100);
    EXPECT_TRUE(coarse.insufficient_resolution);
}

TEST(Propagator, MovingAmplitudesMatchSeriesAtLargeLambda)
{
    const auto p = pipeline(family_spec(Family::landau_zener_window), 400.0, 1.0, 2);
    const Vector psi0 = p.frame.vectors.front().col(0);
    const Vector exact = propagate_ode(p.m(), 400.0, 1e-11, psi0).state;
    const Vector a = moving_amplitudes(exact, p.frame, p.phases, 400.0);
    for(int m = 0; m < 2; ++m)
    {
        cx_double series{};
        for(int k = 0; k <= 2; ++k)
            series += p.series.at_end(k, m);
        EXPECT_LE(std::abs(a(m) - series), 1e-4);
    }
}

TEST(Propagator, InvalidInputs)
{
    const Model m = build_model(family_spec(Family::landau_zener_window));
    const Vector psi0 = ground(m);
    EXPECT_EQ(error_kind_of([&] { propagate_ode(m, 10.0, 1e-3, psi0); }), ErrorKind::InvalidParameter);
    EXPECT_EQ(error_kind_of([&] { propagate_ode(m, 10.0, 1e-14, psi0); }), ErrorKind::InvalidParameter);
    EXPECT_EQ(error_kind_of([&] { propagate_slicing(m, 10.0, 0, psi0); }), ErrorKind::InvalidParameter);
    EXPECT_EQ(error_kind_of([&] { propagate_slicing(m, 10.0, 10, Vector::Zero(3)); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(error_kind_of([&] { propagate_slicing(m, 10.0, 10, Vector(2.0 * psi0)); }),
              ErrorKind::InvalidParameter);
    Vector bad = psi0;
    bad(0) = std::nan("");
    EXPECT_EQ(error_kind_of([&] { propagate_ode(m, 10.0, 1e-10, bad); }), ErrorKind::NonFinite);
}
