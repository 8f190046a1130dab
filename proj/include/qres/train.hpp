#pragma once

// Ridge readout, open/closed-loop forecasting and the reported metrics.
// Reservoir matrices are neurons x time; targets are time x components.

#include <optional>
#include <vector>

#include "qres/dynamics.hpp"
#include "qres/reservoir.hpp"
#include "qres/types.hpp"

namespace qres::train {

using dynamics::TimeSeries;

struct ReadoutWeights {
    Matrix w_out;  // (N_r [+1 bias row]) x N_u
    double beta = 0.0;
    bool includes_bias = true;

    Index neurons() const noexcept { return w_out.rows() - (includes_bias ? 1 : 0); }
    Index outputs() const noexcept { return w_out.cols(); }
};

// Reservoir columns paired with one-step-ahead targets: column t (t >= washout)
// is matched with input row t + 1.
struct TrainingSet {
    Matrix r;  // N_r x N_tr
    Matrix y;  // N_tr x N_u
};

TrainingSet one_step_ahead(const Matrix& r, const TimeSeries& inputs, Index washout);
TrainingSet one_step_ahead(const reservoir::ReservoirMatrix& r, const TimeSeries& inputs,
                           Index washout);

// Solves (R R^T + beta I) W = R Y with a Cholesky factorization (one step of
// iterative refinement). Throws RankDeficiencyError at beta = 0 when the Gram
// matrix is singular.
ReadoutWeights ridge_fit(const Matrix& r, const Matrix& y, double beta, bool bias = true);
ReadoutWeights ridge_fit(const reservoir::ReservoirMatrix& r, const TimeSeries& targets,
                         double beta, bool bias = true);

// ||(R R^T + beta I) W - R Y||_F / ||R Y||_F for the (bias-augmented) R.
double normal_equation_residual(const ReadoutWeights& w, const Matrix& r, const Matrix& y);

// Predictions for every column of R, as time x N_u.
Matrix readout(const ReadoutWeights& w, const Matrix& r);
Vector readout(const ReadoutWeights& w, const Vector& r);

// (1 / (N_tr N_u)) ||R^T W - Y||_F^2
double training_mse(const ReadoutWeights& w, const Matrix& r, const Matrix& y);

enum class ForecastMode { OpenLoop, ClosedLoop };

struct ForecastResult {
    TimeSeries predictions;
    ForecastMode mode = ForecastMode::OpenLoop;
    double mse = 0.0;             // NaN when no truth overlaps the horizon
    Vector per_component_mse;
};

// Resets the stepper and consumes inputs[0, warmup) to set the state; then
// predicts rows warmup .. warmup + horizon - 1. OpenLoop feeds the true row
// after each prediction, ClosedLoop the prediction itself (clipped to [0, 1]
// for quantum steppers). Inputs are in normalized units.
ForecastResult predict(const ReadoutWeights& w, reservoir::ReservoirStepper& stepper,
                       const TimeSeries& inputs, Index warmup, Index horizon, ForecastMode mode);

// Mean over neurons of 10 log10(Var_t(ref) / MeanSq_t(noisy - ref)), skipping
// neurons whose reference variance is below 1e-15; each term is capped at
// kSnrCapDb. Throws UndefinedSnrError when every neuron is skipped.
inline constexpr double kSnrCapDb = 300.0;
double snr_db(const Matrix& noisy, const Matrix& reference);
double snr_db(const reservoir::ReservoirMatrix& noisy, const reservoir::ReservoirMatrix& reference);

// 0.5 * sum_i a_i(t)^2 for a 9-mode series.
Vector kinetic_energy(const TimeSeries& mfe_series);

// Smallest k with sum_{i<=k} sigma_i^2 >= eta * sum sigma_i^2.
Index active_dimension(const Matrix& r, double energy_fraction);

// n points spaced evenly in log10 between lo and hi.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct BetaPoint {
    double beta;
    double mse;
};
std::vector<BetaPoint> beta_sweep(const Matrix& r, const Matrix& y, const std::vector<double>& betas,
                                  bool bias = true);

}  // namespace qres::train
