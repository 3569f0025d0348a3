#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace adiabatic;
using namespace adiabatic::testing;

TEST(PowerLaw, RecoversExactExponent)
{
    std::vector<double> x{1, 2, 4, 8, 16}, y;
    for(double v : x)
        y.push_back(3.0 * std::pow(v, -1.5));
    const auto f = fit_power_law(x, y);
    EXPECT_NEAR(f.exponent, -1.5, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(PowerLaw, NoisyDataStaysNearExponent)
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> x, y;
    for(double v = 10; v <= 1000; v *= 1.5)
    {
        x.push_back(v);
        y.push_back(std::pow(v, -1.0) * std::exp(noise(rng)));
    }
    const auto f = fit_power_law(x, y);
    EXPECT_NEAR(f.exponent, -1.0, 0.05);
    EXPECT_GT(f.r2, 0.95);
}

TEST(PowerLaw, DegenerateInputs)
{
    EXPECT_EQ(error_kind_of([] { fit_power_law({1, 2, 3}, {1, 2, 3}); }), ErrorKind::DegenerateInput);
    EXPECT_EQ(error_kind_of([] { fit_power_law({1, 2, 3, 4}, {1, 0, 3, 4}); }), ErrorKind::DegenerateInput);
    EXPECT_EQ(error_kind_of([] { fit_power_law({2, 2, 2, 2}, {1, 2, 3, 4}); }), ErrorKind::DegenerateInput);
    EXPECT_EQ(error_kind_of([] { fit_power_law({1, 2, 3, 4}, {1, 2, 3}); }), ErrorKind::DegenerateInput);
}

TEST(Asymptotics, ConstantCaseAmplitude)
{
    EXPECT_NEAR(constant_case_amplitude(10.0, 1.0), 0.19178485493262769378, 1e-15);
    EXPECT_NEAR(constant_case_amplitude(2.0 * pi, 1.0), 0.0, 1e-15);
}

TEST(Asymptotics, BoundaryTermsMatchEndpointForRotatedFrame)
{
    // constant gap and coupling: the boundary terms are the whole answer
    const auto p = pipeline(family_spec(Family::rotated_frame), 50.0, 1.0, 1);
    const double df = p.phases.at_end(1) - p.phases.at_end(0);
    const cx_double numeric = std::polar(1.0, -50.0 * df) * p.series.at_end(1, 1);
    const cx_double asym = boundary_asymptotic(p.frame, p.kernel, p.phases, 1, 50.0);
    EXPECT_LE(std::abs(numeric - asym), 1e-8);
}

TEST(Asymptotics, BoundaryRegime)
{
    EXPECT_TRUE(boundary_regime_ok(1.0));
    EXPECT_FALSE(boundary_regime_ok(40.0));
    EXPECT_FALSE(boundary_regime_ok(0.01));
}

TEST(Asymptotics, GammaAndBound)
{
    const auto p = pipeline(family_spec(Family::landau_zener_window), 100.0, 1.0, 1);
    // |g_10| peaks at the centre: v / (2 Delta) for h = (1/2)[[v t, D], [D, -v t]]
    EXPECT_NEAR(coupling_gamma(p.kernel), 2.0, 1e-6);
    EXPECT_NEAR(standard_bound(p.kernel, 100.0), 0.04, 1e-7);
    EXPECT_LE(std::abs(p.series.at_end(1, 1)), standard_bound(p.kernel, 100.0));
}

TEST(Asymptotics, ConstantModelIsNullCase)
{
    const auto r = first_order_scaling(family_spec(Family::constant), 1.0, {50, 100, 200, 400});
    EXPECT_TRUE(r.null_case);
    EXPECT_FALSE(r.fit.has_value());
}

TEST(Asymptotics, SmoothInterpolationDecaysLikeInverseLambda)
{
    const auto r = first_order_scaling(family_spec(Family::smooth_interpolation), 1.0, {50, 100, 200, 400, 800});
    ASSERT_TRUE(r.fit.has_value());
    EXPECT_TRUE(r.consistent);
    for(double margin : r.bound_margins)
        EXPECT_GT(margin, 0.0);
}

TEST(Asymptotics, ScalingListsMustIncrease)
{
    EXPECT_EQ(error_kind_of([] { first_order_scaling(family_spec(Family::rotated_frame), 1.0, {100, 50}); }),
              ErrorKind::ValidationError);
    EXPECT_EQ(error_kind_of([] { secular_probe(family_spec(Family::rotated_frame), 100.0, {}); }),
              ErrorKind::ValidationError);
}
