#include "test_support.hpp"

#include <cmath>

using namespace adiabatic;
using namespace adiabatic::testing;

TEST(Expansion, ZerothOrderIsUnitOnInitialLevel)
{
    const auto p = pipeline(three_level_spec(), 20.0, 1.0, 2);
    for(std::size_t j = 0; j < p.series.nodes(); j += 111)
    {
        EXPECT_EQ(p.series.amplitude(0, 0, j), cx_double(1.0));
        EXPECT_EQ(p.series.amplitude(0, 1, j), cx_double(0.0));
    }
    for(int k = 1; k <= 2; ++k)
        EXPECT_EQ(p.series.amplitude(k, 0, 0), cx_double(0.0));
}

TEST(Expansion, ClosedFormAtLambdaTen)
{
    const auto p = pipeline(family_spec(Family::rotated_frame), 10.0, 1.0, 1);
    EXPECT_NEAR(std::abs(p.series.at_end(1, 1)), 0.19178485493262769378, 1e-6);
    EXPECT_NEAR(std::abs(eigenbasis_amplitude(p.series, p.phases, 10.0, 1, 1)), 0.191785, 1e-6);
}

TEST(Expansion, GridConvergence)
{
    GridOptions fine;
    fine.points_per_period = 256;
    fine.max_step = 5e-4;
    const auto spec = family_spec(Family::landau_zener_window);
    const auto a = pipeline(spec, 100.0, 1.0, 2);
    const auto b = pipeline(spec, 100.0, 1.0, 2, fine);
    for(int k = 1; k <= 2; ++k)
        for(int m = 0; m < 2; ++m)
            EXPECT_LE(std::abs(a.series.at_end(k, m) - b.series.at_end(k, m)), 1e-7) << "k=" << k << " m=" << m;
}

TEST(Expansion, TruncatedNormApproachesOne)
{
    const auto p = pipeline(family_spec(Family::landau_zener_window), 200.0, 1.0, 2);
    const double n2 = assemble_state(p.series, p.frame, p.phases, 200.0, 2).norm();
    const double n0 = assemble_state(p.series, p.frame, p.phases, 200.0, 0).norm();
    EXPECT_NEAR(n0, 1.0, 1e-14);
    EXPECT_NEAR(n2, 1.0, 1e-4);
}

TEST(Expansion, OrdersMatchStateDecomposition)
{
    const auto p = pipeline(three_level_spec(), 30.0, 1.0, 2);
    Vector total = Vector::Zero(3);
    for(int k = 0; k <= 2; ++k)
        total += order_state(p.series, p.frame, p.phases, 30.0, k);
    EXPECT_LE((total - assemble_state(p.series, p.frame, p.phases, 30.0, 2)).norm(), 1e-14);
}

TEST(Expansion, ErrorPaths)
{
    const auto p = pipeline(family_spec(Family::landau_zener_window), 50.0, 1.0, 1);
    EXPECT_EQ(error_kind_of([&] { assemble_state(p.series, p.frame, p.phases, 50.0, 2); }),
              ErrorKind::OrderUnavailable);
    EXPECT_EQ(error_kind_of([&] { eigenbasis_amplitude(p.series, p.phases, 50.0, 3, 1); }),
              ErrorKind::LevelOutOfRange);
    EXPECT_EQ(error_kind_of([&] { expand(p.frame, p.kernel, p.phases, 50.0, 1, 2); }),
              ErrorKind::LevelOutOfRange);
    EXPECT_EQ(error_kind_of([&] { expand(p.frame, p.kernel, p.phases, 5000.0, 1); }),
              ErrorKind::GridTooCoarse);
    EXPECT_EQ(error_kind_of([&] { expand(p.frame, p.kernel, p.phases, 50.0, -1); }),
              ErrorKind::InvalidParameter);
}

TEST(Diagrams, CountsAreDimMinusOnePowK)
{
    for(int dim : {2, 3, 4})
        for(int k = 0; k <= 4; ++k)
        {
            std::size_t count = 0;
            for(const auto& path : diagram_paths(dim, k, 0))
                count += path.jumps() == k ? 1 : 0;
            EXPECT_EQ(count, static_cast<std::size_t>(std::lround(std::pow(dim - 1, k)))) << dim << " " << k;
        }
}

TEST(Diagrams, LexicographicWithoutRepeats)
{
    const auto paths = diagram_paths(3, 2, 0);
    for(std::size_t i = 1; i < paths.size(); ++i)
    {
        EXPECT_EQ(paths[i - 1].jumps(), paths[i].jumps());
        EXPECT_TRUE(paths[i - 1].levels < paths[i].levels);
    }
    for(const auto& path : paths)
    {
        EXPECT_EQ(path.initial(), 0);
        for(std::size_t i = 1; i < path.levels.size(); ++i)
            EXPECT_NE(path.levels[i], path.levels[i - 1]);
    }
}

TEST(Diagrams, NestedMatchesRecursion)
{
    const auto p = pipeline(rotated_frame_3_spec(), 20.0, 1.0, 2);
    for(int k = 1; k <= 2; ++k)
    {
        std::vector<cx_double> sum(3);
        for(const auto& path : diagram_paths(3, k, 0))
            if(path.jumps() == k)
                sum[static_cast<std::size_t>(path.final_level())]
                    += nested_quadrature_term(p.frame, p.kernel, p.phases, 20.0, path);
        for(int m = 0; m < 3; ++m)
            EXPECT_LE(std::abs(sum[static_cast<std::size_t>(m)] - p.series.at_end(k, m)), 1e-6);
    }
}

TEST(Diagrams, NestedLimitedToThreeJumps)
{
    const auto p = pipeline(family_spec(Family::landau_zener_window), 10.0, 1.0, 1);
    EXPECT_EQ(error_kind_of([&] { nested_quadrature_term(p.frame, p.kernel, p.phases, 10.0, {{0, 1, 0, 1, 0}}); }),
              ErrorKind::PathTooLong);
}

TEST(Diagrams, ExplainTextListsEveryPath)
{
    const std::string text = describe_diagrams(3, 2, 0);
    EXPECT_NE(text.find("0 --[s1]--> 2 --[s2]--> 1"), std::string::npos);
    EXPECT_NE(text.find("order 2 (4 diagrams)"), std::string::npos);
}
