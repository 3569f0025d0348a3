#include "test_support.hpp"

#include <cmath>

using namespace adiabatic;
using namespace adiabatic::testing;

TEST(Quadrature, SimpsonExactForCubicsAtEveryNode)
{
    const double h = 0.01;
    std::vector<double> f;
    for(int j = 0; j <= 101; ++j)
    {
        const double x = j * h;
        f.push_back(1.0 + 2.0 * x - 3.0 * x * x + 4.0 * x * x * x);
    }
    const auto cum = cumulative_simpson<double>(f, h);
    for(int j = 0; j <= 101; ++j)
    {
        const double x = j * h;
        // the three-point odd-node rule is exact to degree 2 only
        EXPECT_NEAR(cum[static_cast<std::size_t>(j)], x + x * x - x * x * x + x * x * x * x, j % 2 ? 2e-8 : 1e-13);
    }
}

TEST(Quadrature, TrapezoidAndSimpsonAgreeOnLinear)
{
    std::vector<double> f{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto a = cumulative_trapezoid<double>(f, 0.5);
    const auto b = cumulative_simpson<double>(f, 0.5);
    for(std::size_t j = 0; j < f.size(); ++j)
        EXPECT_NEAR(a[j], b[j], 1e-14);
}

TEST(Grid, UniformForcesEvenIntervalsAndExactEndpoint)
{
    const auto g = TimeGrid::uniform(1.3, 7);
    EXPECT_EQ(g.intervals() % 2, 0u);
    EXPECT_EQ(g.node(g.size() - 1), 1.3);
    EXPECT_EQ(g.node(0), 0.0);
}

TEST(Grid, OscillationResolvingStepScalesWithLambda)
{
    const Model m = build_model(with_point(family_spec(Family::rotated_frame), 1000.0, 1.0));
    const auto g = make_grid(m, 1000.0);
    EXPECT_LE(g.step() * 1000.0 * 1.0 * 128.0, 2.0 * pi * 1.0 + 1e-9);
    EXPECT_LE(g.step(), 1e-3);
}

TEST(Grid, TooManyNodesRejected)
{
    GridOptions opt;
    opt.max_nodes = 100;
    const Model m = build_model(with_point(family_spec(Family::rotated_frame), 100.0, 1.0));
    EXPECT_EQ(error_kind_of([&] { make_grid(m, 100.0, opt); }), ErrorKind::GridTooCoarse);
}

TEST(Frame, ColumnsOrthonormalAndParallelTransported)
{
    const auto p = pipeline(three_level_spec(), 20.0, 1.0, 1);
    for(std::size_t j = 0; j < p.frame.size(); j += 97)
        EXPECT_LE(max_abs(p.frame.vectors[j].adjoint() * p.frame.vectors[j] - Matrix::Identity(3, 3)), 1e-12);
    for(std::size_t j = 1; j < p.frame.size(); ++j)
    {
        const Matrix o = p.frame.vectors[j - 1].adjoint() * p.frame.vectors[j];
        for(int m = 0; m < 3; ++m)
        {
            EXPECT_LE(std::abs(o(m, m).imag()), 1e-12);
            EXPECT_GT(o(m, m).real(), 0.0);
        }
    }
}

TEST(Frame, CouplingIsAntiHermitianWithZeroDiagonal)
{
    for(const auto& spec : {family_spec(Family::landau_zener_window), three_level_spec(), rotated_frame_3_spec()})
    {
        const auto p = pipeline(spec, 20.0, 1.0, 1);
        for(std::size_t j = 0; j < p.kernel.size(); j += 53)
        {
            const Matrix& g = p.kernel.at(j);
            EXPECT_LE(anti_hermiticity_defect(g), 1e-12);
            EXPECT_LE(g.diagonal().cwiseAbs().maxCoeff(), 0.0);
        }
    }
}

TEST(Frame, HellmannFeynmanMatchesFiniteDifferenceAtSecondOrder)
{
    // FD error is O(ds^2): halving the step should cut it by ~4
    const ModelSpec spec = three_level_spec();
    const Model model = build_model(with_point(spec, 1.0, 1.0));
    std::vector<double> steps, errors;
    for(std::size_t n : {40, 80, 160, 320})
    {
        const auto grid = TimeGrid::uniform(1.0, n);
        const auto frame = build_frame(model, grid);
        const std::size_t j = n / 2 + 2;
        const Matrix fd = coupling_finite_difference(frame, j);
        Matrix off = fd;
        off.diagonal().setZero();
        steps.push_back(grid.step());
        errors.push_back(max_abs(off - coupling_at(frame, model, j)));
    }
    const auto fit = fit_power_law(steps, errors);
    EXPECT_GE(fit.exponent, 1.7);
    EXPECT_LE(fit.exponent, 2.3);
}

TEST(Frame, RotatedFrameCouplingIsConstantUnit)
{
    const auto p = pipeline(family_spec(Family::rotated_frame), 10.0, 1.0, 1);
    for(std::size_t j = 0; j < p.kernel.size(); j += 101)
        EXPECT_NEAR(std::abs(p.kernel.at(j)(1, 0)), 1.0, 1e-10);
}

TEST(Frame, PhaseTableConvergesUnderRefinement)
{
    // f_m(S) for landau_zener_window eps_1 = +1/2 sqrt(v^2 (s - 1/2)^2 + 1)
    const Model model = build_model(with_point(family_spec(Family::landau_zener_window), 1.0, 1.0));
    const double x = 2.0; // v/2
    const double exact = (x * std::sqrt(1 + x * x) + std::asinh(x)) / 8.0;
    double prev_err = INFINITY;
    for(std::size_t n : {20, 40, 80})
    {
        const auto frame = build_frame(model, TimeGrid::uniform(1.0, n));
        const double err = std::abs(phase_table(frame).at_end(1) - exact);
        EXPECT_LT(err, prev_err / 8.0);
        prev_err = err;
    }
    EXPECT_LE(prev_err, 1e-6);
}

TEST(Frame, GapCollapseReportsLocation)
{
    ModelSpec spec = family_spec(Family::landau_zener_window);
    spec.params.gap = 1e-5;
    const auto e = error_of([&] { pipeline(spec, 10.0, 1.0, 1); });
    EXPECT_EQ(e.kind(), ErrorKind::GapCollapse);
    EXPECT_EQ(e.stage(), "frame");
    EXPECT_NE(std::string(e.what()).find("s = 0.5"), std::string::npos);
}

TEST(Frame, CoarseGridTrackingIsAmbiguous)
{
    ModelSpec spec = family_spec(Family::landau_zener_window);
    spec.params.gap = 0.01;
    spec.params.sweep_rate = 50.0;
    FrameOptions fo;
    fo.gap_tol = 1e-4;
    fo.min_tracking_overlap = 0.9;
    const Model model = build_model(with_point(spec, 1.0, 1.0));
    EXPECT_EQ(error_kind_of([&] { build_frame(model, TimeGrid::uniform(1.0, 6), fo); }),
              ErrorKind::TrackingAmbiguous);
}

TEST(Frame, GaugeJitterLeavesCouplingModuliUnchanged)
{
    const Model model = build_model(with_point(three_level_spec(), 10.0, 1.0));
    const auto grid = TimeGrid::uniform(1.0, 200);
    FrameOptions fo;
    fo.phase_jitter_seed = 99;
    const auto a = coupling_kernel(build_frame(model, grid), model);
    const auto b = coupling_kernel(build_frame(model, grid, fo), model);
    for(std::size_t j = 0; j < a.size(); j += 17)
        EXPECT_LE(max_abs(Matrix(a.at(j).cwiseAbs().cast<cx_double>() - b.at(j).cwiseAbs().cast<cx_double>())), 1e-12);
}
