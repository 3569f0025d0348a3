#pragma once

// Parametric families of time-dependent Hamiltonians H(t) = E h(t/tau),
// evaluated in the dimensionless variable s in [0, S].

#include "adiabatic/error.hpp"
#include "adiabatic/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace adiabatic {

enum class Family {
    constant,
    rotated_frame,
    rotating_spin,
    landau_zener_window,
    smooth_interpolation,
    flat_endpoint_ramp,
    user_matrix_polynomial,
};

inline constexpr std::array<std::string_view, 7> family_names{
    "constant",
    "rotated_frame",
    "rotating_spin",
    "landau_zener_window",
    "smooth_interpolation",
    "flat_endpoint_ramp",
    "user_matrix_polynomial",
};

inline std::string_view to_string(Family f) noexcept
{
    return family_names[static_cast<std::size_t>(f)];
}

inline Family parse_family(std::string_view name)
{
    for(std::size_t i = 0; i < family_names.size(); ++i)
        if(family_names[i] == name)
            return static_cast<Family>(i);
    throw Error(ErrorKind::UnknownFamily, "no model family named '" + std::string(name) + "'",
                "family");
}

/// Physical scales. lambda = E * tau is derived on demand, never stored.
struct ModelScales {
    double energy_scale = 1.0;
    double time_scale = 1.0;
    double duration = 1.0; ///< dimensionless S = T / tau

    double lambda() const noexcept { return energy_scale * time_scale; }
    double physical_duration() const noexcept { return duration * time_scale; }

    static ModelScales from_lambda(double lambda, double duration, double time_scale = 1.0)
    {
        return ModelScales{lambda / time_scale, time_scale, duration};
    }
};

struct RandomPolynomial {
    int degree = 1;
    double scale = 0.25;
};

/// Family parameters. Each family reads only the fields it documents;
/// unset matrices fall back to the family default.
///
///   constant               h0 (default diag(0,1,...))
///   rotated_frame          h0, generator A (anti-Hermitian; default tridiagonal
///                          real rotation, [[0,-1],[1,0]] for dim 2)
///   rotating_spin          cone_angle in (0, pi), revolutions > 0; dim 2
///   landau_zener_window    gap > 0, sweep_rate != 0; dim 2
///   smooth_interpolation   h0, h1 (dim-2 defaults (1-sx)/2 and (1-sz)/2)
///   flat_endpoint_ramp     h0, h1 as above, smoothstep schedule
///   user_matrix_polynomial coefficients C_k (Hermitian), or random{degree, scale}
struct ModelParams {
    std::optional<Matrix> h0;
    std::optional<Matrix> h1;
    std::optional<Matrix> generator;
    std::vector<Matrix> coefficients;
    std::optional<RandomPolynomial> random;
    double cone_angle = pi / 3.0;
    double revolutions = 1.0;
    double gap = 1.0;
    double sweep_rate = 4.0;
    bool analytic_derivative = true;
};

struct ModelSpec {
    Family family = Family::constant;
    int dim = 2;
    ModelParams params;
    ModelScales scales;
    int initial_state_index = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline Matrix pauli_x()
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline Matrix pauli_y()
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = -I_unit;
    m(1, 0) = I_unit;
    return m;
}

inline Matrix pauli_z()
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline Matrix ladder_diagonal(int dim)
{
    Matrix m = Matrix::Zero(dim, dim);
    for(int i = 0; i < dim; ++i)
        m(i, i) = static_cast<double>(i);
    return m;
}

inline void require_shape(const Matrix& m, int dim, const char* field)
{
    if(m.rows() != dim || m.cols() != dim)
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(field) + " must be " + std::to_string(dim) + "x"
                        + std::to_string(dim),
                    field);
}

inline void require_hermitian(const Matrix& m, const char* field)
{
    if(!m.allFinite() || hermiticity_defect(m) > 1e-12)
        throw Error(ErrorKind::InvalidParameter, std::string(field) + " must be Hermitian",
                    field);
}

// uniform double in [-1, 1) from raw 64-bit output, identical on every platform
inline double signed_unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

} // namespace detail

/// Immutable evaluable Hamiltonian h(s) on [0, S].
class Model {
public:
    explicit Model(ModelSpec spec)
        : spec_(std::move(spec))
    {
        validate_and_prepare();
    }

    const ModelSpec& spec() const noexcept { return spec_; }
    Family family() const noexcept { return spec_.family; }
    int dim() const noexcept { return spec_.dim; }
    double duration() const noexcept { return spec_.scales.duration; }
    double lambda() const noexcept { return spec_.scales.lambda(); }
    int initial_state_index() const noexcept { return spec_.initial_state_index; }
    bool has_analytic_derivative() const noexcept { return spec_.params.analytic_derivative; }

    Matrix h_at(double s) const
    {
        check_domain(s);
        return evaluate(s);
    }

    Matrix dh_ds_at(double s) const
    {
        check_domain(s);
        if(has_analytic_derivative())
            return analytic_derivative(s);
        return central_difference(s);
    }

    /// 4th-order central difference with step eps^(1/5) * max(1, |s|).
    /// The closed forms extend smoothly past [0, S], so the stencil is never
    /// one-sided.
    Matrix dh_ds_numeric(double s) const
    {
        check_domain(s);
        return central_difference(s);
    }

private:
    static constexpr double domain_slack = 1e-12;

    void check_domain(double s) const
    {
        if(!(s >= -domain_slack && s <= duration() + domain_slack))
            throw Error(ErrorKind::OutOfDomain,
                        "s = " + std::to_string(s) + " outside [0, " + std::to_string(duration())
                            + "]");
    }

    Matrix central_difference(double s) const
    {
        const double step = std::pow(std::numeric_limits<double>::epsilon(), 0.2)
                            * std::max(1.0, std::abs(s));
        const Matrix d = (-evaluate(s + 2 * step) + 8.0 * evaluate(s + step)
                          - 8.0 * evaluate(s - step) + evaluate(s - 2 * step))
                         / (12.0 * step);
        return symmetrize(d);
    }

    void validate_and_prepare()
    {
        const auto& sc = spec_.scales;
        const int dim = spec_.dim;
        if(dim < 2)
            throw Error(ErrorKind::InvalidParameter, "dim must be >= 2", "dim");
        if(spec_.initial_state_index < 0 || spec_.initial_state_index >= dim)
            throw Error(ErrorKind::InvalidParameter, "initial_state_index must lie in [0, dim)",
                        "initial_state_index");
        if(!(sc.energy_scale > 0) || !std::isfinite(sc.energy_scale))
            throw Error(ErrorKind::InvalidParameter, "energy_scale must be > 0", "energy_scale");
        if(!(sc.time_scale > 0) || !std::isfinite(sc.time_scale))
            throw Error(ErrorKind::InvalidParameter, "time_scale must be > 0", "time_scale");
        if(!(sc.duration > 0) || !std::isfinite(sc.duration))
            throw Error(ErrorKind::InvalidParameter, "duration must be > 0", "duration");

        auto& p = spec_.params;
        auto take_matrix = [&](std::optional<Matrix>& slot, const char* field, Matrix fallback) {
            Matrix m = slot ? *slot : std::move(fallback);
            detail::require_shape(m, dim, field);
            detail::require_hermitian(m, field);
            return m;
        };

        switch(spec_.family)
        {
        case Family::constant:
            h0_ = take_matrix(p.h0, "h0", detail::ladder_diagonal(dim));
            break;
        case Family::rotated_frame: {
            h0_ = take_matrix(p.h0, "h0", detail::ladder_diagonal(dim));
            Matrix a = Matrix::Zero(dim, dim);
            for(int i = 0; i + 1 < dim; ++i)
            {
                a(i + 1, i) = 1.0;
                a(i, i + 1) = -1.0;
            }
            if(p.generator)
                a = *p.generator;
            detail::require_shape(a, dim, "generator");
            if(!a.allFinite() || anti_hermiticity_defect(a) > 1e-12)
                throw Error(ErrorKind::InvalidParameter, "generator must be anti-Hermitian",
                            "generator");
            generator_ = a;
            // i*A is Hermitian: A = -i W diag(w) W^dagger, so exp(A s) = W exp(-i w s) W^dagger
            Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(I_unit * a));
            if(es.info() != Eigen::Success)
                throw Error(ErrorKind::NumericalFailure, "generator diagonalization failed");
            gen_vectors_ = es.eigenvectors();
            gen_values_ = es.eigenvalues();
            break;
        }
        case Family::rotating_spin:
            if(dim != 2)
                throw Error(ErrorKind::DimensionMismatch, "rotating_spin requires dim = 2", "dim");
            if(!(p.cone_angle > 0 && p.cone_angle < pi))
                throw Error(ErrorKind::InvalidParameter, "cone_angle must lie in (0, pi)",
                            "cone_angle");
            if(!(p.revolutions > 0) || !std::isfinite(p.revolutions))
                throw Error(ErrorKind::InvalidParameter, "revolutions must be > 0",
                            "revolutions");
            break;
        case Family::landau_zener_window:
            if(dim != 2)
                throw Error(ErrorKind::DimensionMismatch, "landau_zener_window requires dim = 2",
                            "dim");
            if(!(p.gap > 0) || !std::isfinite(p.gap))
                throw Error(ErrorKind::InvalidParameter, "gap must be > 0", "gap");
            if(p.sweep_rate == 0 || !std::isfinite(p.sweep_rate))
                throw Error(ErrorKind::InvalidParameter, "sweep_rate must be finite and nonzero",
                            "sweep_rate");
            break;
        case Family::smooth_interpolation:
        case Family::flat_endpoint_ramp: {
            if(dim != 2 && (!p.h0 || !p.h1))
                throw Error(ErrorKind::InvalidParameter,
                            "h0 and h1 are required when dim != 2", p.h0 ? "h1" : "h0");
            const Matrix id = Matrix::Identity(2, 2);
            h0_ = take_matrix(p.h0, "h0", dim == 2 ? Matrix(0.5 * (id - detail::pauli_x())) : Matrix());
            h1_ = take_matrix(p.h1, "h1", dim == 2 ? Matrix(0.5 * (id - detail::pauli_z())) : Matrix());
            break;
        }
        case Family::user_matrix_polynomial: {
            if(p.coefficients.empty())
            {
                if(!p.random)
                    throw Error(ErrorKind::InvalidParameter,
                                "user_matrix_polynomial needs coefficients or random",
                                "coefficients");
                if(p.random->degree < 1 || p.random->degree > 8)
                    throw Error(ErrorKind::InvalidParameter, "random.degree must be in [1, 8]",
                                "random.degree");
                if(!(p.random->scale >= 0) || !std::isfinite(p.random->scale))
                    throw Error(ErrorKind::InvalidParameter, "random.scale must be >= 0",
                                "random.scale");
                std::mt19937_64 rng(spec_.seed);
                p.coefficients.push_back(detail::ladder_diagonal(dim));
                for(int k = 1; k <= p.random->degree; ++k)
                {
                    Matrix c(dim, dim);
                    for(int i = 0; i < dim; ++i)
                        for(int j = 0; j < dim; ++j)
                            c(i, j) = p.random->scale
                                      * cx_double(detail::signed_unit(rng), detail::signed_unit(rng));
                    p.coefficients.push_back(symmetrize(c));
                }
            }
            for(std::size_t k = 0; k < p.coefficients.size(); ++k)
            {
                const std::string field = "coefficients[" + std::to_string(k) + "]";
                detail::require_shape(p.coefficients[k], dim, field.c_str());
                detail::require_hermitian(p.coefficients[k], field.c_str());
            }
            break;
        }
        }
    }

    double ramp(double u) const
    {
        if(spec_.family == Family::flat_endpoint_ramp)
            return u * u * (3.0 - 2.0 * u);
        return u;
    }

    double ramp_slope(double u) const
    {
        if(spec_.family == Family::flat_endpoint_ramp)
            return 6.0 * u * (1.0 - u);
        return 1.0;
    }

    Matrix rotation(double s) const
    {
        const Eigen::VectorXcd phases
            = (-I_unit * s * gen_values_.cast<cx_double>()).array().exp().matrix();
        return gen_vectors_ * phases.asDiagonal() * gen_vectors_.adjoint();
    }

    double spin_azimuth_rate() const
    {
        return 2.0 * pi * spec_.params.revolutions / duration();
    }

    Matrix evaluate(double s) const
    {
        const auto& p = spec_.params;
        Matrix h;
        switch(spec_.family)
        {
        case Family::constant:
            h = h0_;
            break;
        case Family::rotated_frame: {
            const Matrix r = rotation(s);
            h = r * h0_ * r.adjoint();
            break;
        }
        case Family::rotating_spin: {
            // h = -(1/2) n(s).sigma: the ground level is aligned with the field
            const double phi = spin_azimuth_rate() * s;
            const double st = std::sin(p.cone_angle);
            h = -0.5
                * (st * std::cos(phi) * detail::pauli_x() + st * std::sin(phi) * detail::pauli_y()
                   + std::cos(p.cone_angle) * detail::pauli_z());
            break;
        }
        case Family::landau_zener_window: {
            const double x = p.sweep_rate * (s - 0.5 * duration());
            h = 0.5 * (x * detail::pauli_z() + p.gap * detail::pauli_x());
            break;
        }
        case Family::smooth_interpolation:
        case Family::flat_endpoint_ramp: {
            const double r = ramp(s / duration());
            h = (1.0 - r) * h0_ + r * h1_;
            break;
        }
        case Family::user_matrix_polynomial: {
            // Horner
            h = p.coefficients.back();
            for(auto k = p.coefficients.size() - 1; k-- > 0;)
                h = (h * s + p.coefficients[k]).eval();
            break;
        }
        }
        return symmetrize(h);
    }

    Matrix analytic_derivative(double s) const
    {
        const auto& p = spec_.params;
        const int dim = spec_.dim;
        Matrix d;
        switch(spec_.family)
        {
        case Family::constant:
            d = Matrix::Zero(dim, dim);
            break;
        case Family::rotated_frame: {
            const Matrix h = evaluate(s);
            d = generator_ * h - h * generator_;
            break;
        }
        case Family::rotating_spin: {
            const double w = spin_azimuth_rate();
            const double phi = w * s;
            const double st = std::sin(p.cone_angle);
            d = -0.5 * w * st
                * (-std::sin(phi) * detail::pauli_x() + std::cos(phi) * detail::pauli_y());
            break;
        }
        case Family::landau_zener_window:
            d = 0.5 * p.sweep_rate * detail::pauli_z();
            break;
        case Family::smooth_interpolation:
        case Family::flat_endpoint_ramp:
            d = ramp_slope(s / duration()) / duration() * (h1_ - h0_);
            break;
        case Family::user_matrix_polynomial: {
            const auto n = p.coefficients.size();
            d = Matrix::Zero(dim, dim);
            for(auto k = n; k-- > 1;)
                d = (d * s + static_cast<double>(k) * p.coefficients[k]).eval();
            break;
        }
        }
        return symmetrize(d);
    }

    ModelSpec spec_;
    Matrix h0_;
    Matrix h1_;
    Matrix generator_;
    Matrix gen_vectors_;
    RealVector gen_values_;
};

inline Model build_model(ModelSpec spec)
{
    return Model(std::move(spec));
}

} // namespace adiabatic
