#pragma once

// Ground-truth chaotic trajectories: Lorenz-63 and the nine-mode
// Moehlis-Faisst-Eckhardt (MFE) shear-flow model, integrated with classic RK4.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "qres/types.hpp"

namespace qres::dynamics {

using SystemState = Vector;
using VectorField = std::function<Vector(const Vector&)>;

enum class ModelKind { Lorenz63, Mfe9 };

struct ModelSpec {
    ModelKind kind = ModelKind::Lorenz63;
    std::map<std::string, double> params;  // sigma, rho, beta (Lorenz) or re (MFE)
    double lyapunov_exponent = 0.9;
    double dt = 0.01;

    static ModelSpec lorenz63();
    static ModelSpec mfe9(double reynolds = 400.0);

    std::size_t dimension() const noexcept { return kind == ModelKind::Lorenz63 ? 3 : 9; }
    double param(const std::string& name) const;
    double lyapunov_time() const noexcept { return 1.0 / lyapunov_exponent; }
    // Throws InvalidInput on dt <= 0, lambda <= 0 or missing parameters.
    void validate() const;
    VectorField vector_field() const;
};

// Row i holds the state at time t0 + i * dt.
struct TimeSeries {
    Matrix data;
    double dt = 1.0;
    double lyapunov_time = 1.0;
    double t0 = 0.0;

    Index steps() const noexcept { return data.rows(); }
    Index components() const noexcept { return data.cols(); }
    double time(Index i) const noexcept { return t0 + static_cast<double>(i) * dt; }
    // Rows [first, first + count).
    TimeSeries slice(Index first, Index count) const;
};

Vector lorenz63_rhs(const Vector& state, double sigma = 10.0, double rho = 28.0,
                    double beta = 8.0 / 3.0);

// Nine-mode model in the domain [Lx, Ly, Lz] = [4pi, 2, 2pi].
Vector mfe_rhs(const Vector& a, double reynolds);

// Quadratic part of mfe_rhs alone; conserves sum(a_i^2).
Vector mfe_nonlinear(const Vector& a);

// Laminar profile (1, 0, ..., 0).
Vector mfe_laminar();

// One classic fourth-order Runge-Kutta step.
Vector rk4_step(const VectorField& f, const Vector& x, double dt);

// Integrates transient_steps + n_steps steps and returns the last n_steps
// states. Throws DivergenceError once any |component| exceeds 1e6 or goes
// non-finite.
TimeSeries rk4_integrate(const VectorField& f, const Vector& initial, double dt,
                         std::size_t n_steps, std::size_t transient_steps = 0);

// Model-aware overload. With a seed the initial condition is perturbed first:
// uniform(-0.1, 0.1) on every Lorenz component, on a2..a9 for MFE.
TimeSeries rk4_integrate(const ModelSpec& spec, const Vector& initial, std::size_t n_steps,
                         std::size_t transient_steps, std::optional<std::uint64_t> seed = {});

// (1,1,1) for Lorenz, laminar for MFE.
Vector default_initial_state(const ModelSpec& spec);

struct NormalizationParams {
    Vector min;
    Vector max;

    Vector apply(const Vector& x) const;
    Vector invert(const Vector& u) const;
    TimeSeries apply(const TimeSeries& series) const;
    TimeSeries invert(const TimeSeries& series) const;
};

// Affine map of every component onto [0, 1]; throws InvalidInput on a
// constant component.
std::pair<TimeSeries, NormalizationParams> normalize(const TimeSeries& series);
TimeSeries denormalize(const TimeSeries& series, const NormalizationParams& params);

// CSV with header `t,c0,c1,...`; values round-trip exactly.
void write_csv(std::ostream& out, const TimeSeries& series);
void write_csv(const std::string& path, const TimeSeries& series);
TimeSeries read_csv(std::istream& in, double lyapunov_time = 1.0);
TimeSeries read_csv(const std::string& path, double lyapunov_time = 1.0);

}  // namespace qres::dynamics
