#include "qres/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "qres/error.hpp"

namespace qres::train {

namespace {

Matrix augmented(const Matrix& r, bool bias) {
    if (!bias) return r;
    Matrix out(r.rows() + 1, r.cols());
    out.topRows(r.rows()) = r;
    out.row(r.rows()).setOnes();
    return out;
}

void check_aligned(const Matrix& r, const Matrix& y, const char* where) {
    if (r.cols() != y.rows()) {
        throw InvalidInput(std::string(where) + ": reservoir has " + std::to_string(r.cols()) +
                           " columns but targets have " + std::to_string(y.rows()) + " rows");
    }
}

void check_weights(const ReadoutWeights& w, Index neurons, const char* where) {
    if (w.neurons() != neurons) {
        throw InvalidInput(std::string(where) + ": weights expect " + std::to_string(w.neurons()) +
                           " neurons, got " + std::to_string(neurons));
    }
}

}  // namespace

TrainingSet one_step_ahead(const Matrix& r, const TimeSeries& inputs, Index washout) {
    if (r.cols() != inputs.steps()) {
        throw InvalidInput("one_step_ahead: reservoir has " + std::to_string(r.cols()) +
                           " columns, series has " + std::to_string(inputs.steps()) + " rows");
    }
    if (washout < 0 || washout >= r.cols() - 1) {
        throw InvalidInput("one_step_ahead: washout " + std::to_string(washout) +
                           " leaves no training columns");
    }
    const Index n = r.cols() - 1 - washout;
    return {r.middleCols(washout, n), inputs.data.middleRows(washout + 1, n)};
}

TrainingSet one_step_ahead(const reservoir::ReservoirMatrix& r, const TimeSeries& inputs,
                           Index washout) {
    return one_step_ahead(r.values(), inputs, washout);
}

ReadoutWeights ridge_fit(const Matrix& r, const Matrix& y, double beta, bool bias) {
    check_aligned(r, y, "ridge_fit");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("ridge_fit: beta must be >= 0");
    if (r.cols() == 0) throw InvalidInput("ridge_fit: no training columns");

    const Matrix ra = augmented(r, bias);
    Matrix gram = ra * ra.transpose();
    gram.diagonal().array() += beta;
    const Matrix rhs = ra * y;

    Eigen::LLT<Matrix> llt(gram);
    const bool singular = llt.info() != Eigen::Success || !(llt.rcond() > 1e-15);
    if (singular) {
        if (beta == 0.0) {
            throw RankDeficiencyError(
                "ridge_fit: Gram matrix is singular at beta = 0; use beta > 0");
        }
        throw NumericalError("ridge_fit: Cholesky factorization failed (beta = " +
                             std::to_string(beta) + ")");
    }
    Matrix w = llt.solve(rhs);
    w += llt.solve(rhs - gram * w);
    return {std::move(w), beta, bias};
}

ReadoutWeights ridge_fit(const reservoir::ReservoirMatrix& r, const TimeSeries& targets,
                         double beta, bool bias) {
    return ridge_fit(r.values(), targets.data, beta, bias);
}

double normal_equation_residual(const ReadoutWeights& w, const Matrix& r, const Matrix& y) {
    check_aligned(r, y, "normal_equation_residual");
    check_weights(w, r.rows(), "normal_equation_residual");
    const Matrix ra = augmented(r, w.includes_bias);
    const Matrix rhs = ra * y;
    const Matrix lhs = ra * (ra.transpose() * w.w_out) + w.beta * w.w_out;
    const double denom = rhs.norm();
    return denom > 0.0 ? (lhs - rhs).norm() / denom : (lhs - rhs).norm();
}

Matrix readout(const ReadoutWeights& w, const Matrix& r) {
    check_weights(w, r.rows(), "readout");
    Matrix out = r.transpose() * w.w_out.topRows(r.rows());
    if (w.includes_bias) out.rowwise() += w.w_out.row(r.rows());
    return out;
}

Vector readout(const ReadoutWeights& w, const Vector& r) {
    check_weights(w, r.size(), "readout");
    Vector out = w.w_out.topRows(r.size()).transpose() * r;
    if (w.includes_bias) out += w.w_out.row(r.size()).transpose();
    return out;
}

double training_mse(const ReadoutWeights& w, const Matrix& r, const Matrix& y) {
    check_aligned(r, y, "training_mse");
    if (y.size() == 0) throw InvalidInput("training_mse: no targets");
    return (readout(w, r) - y).squaredNorm() / static_cast<double>(y.size());
}

ForecastResult predict(const ReadoutWeights& w, reservoir::ReservoirStepper& stepper,
                       const TimeSeries& inputs, Index warmup, Index horizon, ForecastMode mode) {
    if (horizon <= 0) throw InvalidInput("predict: horizon must be > 0");
    if (warmup < 1 || warmup > inputs.steps()) {
        throw InvalidInput("predict: warmup must lie in [1, " + std::to_string(inputs.steps()) + "]");
    }
    if (mode == ForecastMode::OpenLoop && warmup + horizon - 1 > inputs.steps()) {
        throw InvalidInput("predict: open-loop horizon runs past the input series");
    }
    check_weights(w, stepper.neurons(), "predict");
    const Index n_u = w.outputs();
    if (inputs.components() != n_u) throw InvalidInput("predict: input width differs from readout");

    stepper.reset();
    const Vector* state = nullptr;
    for (Index t = 0; t < warmup; ++t) state = &stepper.step(inputs.data.row(t).transpose());

    TimeSeries out;
    out.data.resize(horizon, n_u);
    out.dt = inputs.dt;
    out.lyapunov_time = inputs.lyapunov_time;
    out.t0 = inputs.time(warmup);
    for (Index k = 0; k < horizon; ++k) {
        Vector u = readout(w, *state);
        if (!u.allFinite()) throw NumericalError("predict: prediction diverged at step " + std::to_string(k));
        out.data.row(k) = u.transpose();
        if (k + 1 == horizon) break;
        if (mode == ForecastMode::OpenLoop) {
            state = &stepper.step(inputs.data.row(warmup + k).transpose());
        } else {
            if (stepper.requires_unit_interval()) u = u.cwiseMax(0.0).cwiseMin(1.0);
            state = &stepper.step(u);
        }
    }

    ForecastResult result{std::move(out), mode, std::numeric_limits<double>::quiet_NaN(),
                          Vector::Constant(n_u, std::numeric_limits<double>::quiet_NaN())};
    const Index overlap = std::min(horizon, inputs.steps() - warmup);
    if (overlap > 0) {
        const Matrix diff = result.predictions.data.topRows(overlap) - inputs.data.middleRows(warmup, overlap);
        result.mse = diff.squaredNorm() / static_cast<double>(diff.size());
        result.per_component_mse = diff.colwise().squaredNorm().transpose() / static_cast<double>(overlap);
    }
    return result;
}

double snr_db(const Matrix& noisy, const Matrix& reference) {
    if (noisy.rows() != reference.rows() || noisy.cols() != reference.cols()) {
        throw InvalidInput("snr_db: shape mismatch");
    }
    if (reference.cols() == 0) throw InvalidInput("snr_db: empty matrices");
    const double n = static_cast<double>(reference.cols());
    double sum = 0.0;
    Index used = 0;
    for (Index i = 0; i < reference.rows(); ++i) {
        const auto ref = reference.row(i).array();
        const double var = (ref - ref.mean()).square().sum() / n;
        if (var < 1e-15) continue;
        const double noise = (noisy.row(i).array() - ref).square().sum() / n;
        double db = noise > 0.0 ? 10.0 * std::log10(var / noise) : kSnrCapDb;
        sum += std::min(db, kSnrCapDb);
        ++used;
    }
    if (used == 0) throw UndefinedSnrError("snr_db: every reference neuron has zero variance");
    return sum / static_cast<double>(used);
}

double snr_db(const reservoir::ReservoirMatrix& noisy, const reservoir::ReservoirMatrix& reference) {
    return snr_db(noisy.values(), reference.values());
}

Vector kinetic_energy(const TimeSeries& mfe_series) {
    if (mfe_series.components() != 9) {
        throw InvalidInput("kinetic_energy: expected 9 components, got " +
                           std::to_string(mfe_series.components()));
    }
    return 0.5 * mfe_series.data.rowwise().squaredNorm();
}

Index active_dimension(const Matrix& r, double energy_fraction) {
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) {
        throw InvalidInput("active_dimension: energy fraction must lie in (0, 1]");
    }
    if (r.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(r);
    const Vector& s = svd.singularValues();
    const double total = s.squaredNorm();
    if (total == 0.0) return 0;
    double acc = 0.0;
    for (Index k = 0; k < s.size(); ++k) {
        acc += s[k] * s[k];
        if (acc >= energy_fraction * total) return k + 1;
    }
    return s.size();
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi >= lo) || n == 0) throw InvalidInput("log_grid: need 0 < lo <= hi and n >= 1");
    std::vector<double> out(n);
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = std::pow(10.0, a + f * (b - a));
    }
    return out;
}

std::vector<BetaPoint> beta_sweep(const Matrix& r, const Matrix& y, const std::vector<double>& betas,
                                  bool bias) {
    std::vector<BetaPoint> out;
    out.reserve(betas.size());
    for (double beta : betas) out.push_back({beta, training_mse(ridge_fit(r, y, beta, bias), r, y)});
    return out;
}

}  // namespace qres::train
