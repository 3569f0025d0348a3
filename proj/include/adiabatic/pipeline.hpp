#pragma once

#include "adiabatic/error.hpp"
#include "adiabatic/hamiltonian_models.hpp"
#include "adiabatic/jump_expansion.hpp"
#include "adiabatic/spectral_frame.hpp"

#include <optional>
#include <string>
#include <utility>

namespace adiabatic {

/// model -> grid -> frame -> couplings/phases -> series, for one (lambda, S).
struct Pipeline {
    std::optional<Model> model;
    TimeGrid grid;
    EigenFrame frame;
    CouplingKernel kernel;
    PhaseTable phases;
    JumpSeries series;

    const Model& m() const { return *model; }
    double lambda() const { return series.lambda; }
};

struct PipelineOptions {
    GridOptions grid;
    FrameOptions frame;
    int order = 2;
    QuadratureRule rule = QuadratureRule::simpson;
};

namespace detail {

template <class F>
decltype(auto) staged(const char* stage, F&& f)
{
    try
    {
        return std::forward<F>(f)();
    }
    catch(const Error& e)
    {
        if(!e.stage().empty())
            throw;
        throw e.with_stage(stage);
    }
}

} // namespace detail

/// Errors leave with stage() set to model, grid, frame, kernel or expansion.
inline Pipeline run_pipeline(const ModelSpec& spec, const PipelineOptions& opt = {})
{
    Pipeline p;
    p.model.emplace(detail::staged("model", [&] { return build_model(spec); }));
    const Model& model = *p.model;
    const double lambda = model.lambda();
    p.grid = detail::staged("grid", [&] { return make_grid(model, lambda, opt.grid); });
    p.frame = detail::staged("frame", [&] { return build_frame(model, p.grid, opt.frame); });
    p.kernel = detail::staged("kernel", [&] { return coupling_kernel(p.frame, model); });
    p.phases = phase_table(p.frame);
    p.series = detail::staged("expansion", [&] {
        return expand(p.frame, p.kernel, p.phases, lambda, opt.order, model.initial_state_index(),
                      opt.rule);
    });
    return p;
}

inline ModelSpec with_point(ModelSpec spec, double lambda, double duration)
{
    spec.scales = ModelScales::from_lambda(lambda, duration, spec.scales.time_scale);
    return spec;
}

} // namespace adiabatic
