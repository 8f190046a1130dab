#include <cmath>
#include <limits>

#include <doctest.h>

#include "oracles.hpp"
#include "qres/error.hpp"
#include "qres/rng.hpp"
#include "qres/train.hpp"
#include "suites.hpp"

using namespace qres;
using namespace qres::train;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    auto engine = rng::make_engine(seed);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng::uniform(engine, -1, 1);
    return m;
}

}  // namespace

TEST_CASE("ridge_fit closed forms") {
    const Matrix y = random_matrix(6, 3, 1);
    const double beta = 0.25;
    const auto w = ridge_fit(Matrix::Identity(6, 6), y, beta, false);
    CHECK((w.w_out - y / (1.0 + beta)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(w.neurons() == 6);
    CHECK(w.outputs() == 3);

    const Matrix r = random_matrix(20, 20, 2);
    const Matrix y2 = random_matrix(20, 4, 3);
    const auto exact = ridge_fit(r, y2, 0.0, false);
    CHECK((r.transpose() * exact.w_out - y2).cwiseAbs().maxCoeff() < 1e-8);

    const Matrix r3 = random_matrix(30, 200, 4);
    const Matrix y3 = random_matrix(200, 3, 5);
    for (bool bias : {false, true}) {
        const auto fit = ridge_fit(r3, y3, 1e-3, bias);
        const Matrix oracle = qres_test::oracle::ridge_normal_equations(r3, y3, 1e-3, bias);
        CHECK((fit.w_out - oracle).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(normal_equation_residual(fit, r3, y3) < 1e-12);
    }
}

TEST_CASE("ridge_fit failures") {
    Matrix r = random_matrix(5, 20, 6);
    r.row(3) = r.row(1);
    CHECK_THROWS_AS(ridge_fit(r, random_matrix(20, 2, 7), 0.0, false), RankDeficiencyError);
    CHECK_THROWS_AS(ridge_fit(r, random_matrix(19, 2, 7), 1e-6), InvalidInput);
    CHECK_THROWS_AS(ridge_fit(r, random_matrix(20, 2, 7), -1.0), InvalidInput);
}

TEST_CASE("training_mse") {
    const Matrix r = random_matrix(8, 50, 8);
    const Matrix w = random_matrix(9, 2, 9);
    const ReadoutWeights rw{w, 0.0, true};
    const Matrix y = readout(rw, r);
    CHECK(training_mse(rw, r, y) == 0.0);

    const ReadoutWeights zero{Matrix::Zero(9, 2), 0.0, true};
    const Matrix target = random_matrix(50, 2, 10);
    CHECK(training_mse(zero, r, target) == doctest::Approx(target.squaredNorm() / 100.0).epsilon(1e-14));
    CHECK(std::abs(training_mse(rw, r, target) - qres_test::oracle::naive_mse(r, w, true, target)) < 1e-12);
    CHECK((readout(rw, Vector(r.col(4))) - y.row(4).transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("one_step_ahead pairing") {
    dynamics::TimeSeries u;
    u.data.resize(10, 1);
    for (Index t = 0; t < 10; ++t) u.data(t, 0) = static_cast<double>(t);
    Matrix r(1, 10);
    for (Index t = 0; t < 10; ++t) r(0, t) = 100.0 + static_cast<double>(t);
    const auto ts = one_step_ahead(r, u, 3);
    REQUIRE(ts.r.cols() == 6);
    REQUIRE(ts.y.rows() == 6);
    CHECK(ts.r(0, 0) == 103.0);
    CHECK(ts.y(0, 0) == 4.0);
    CHECK(ts.y(5, 0) == 9.0);
    CHECK_THROWS_AS(one_step_ahead(r, u, 9), InvalidInput);
}

TEST_CASE("forecasting") {
    SUBCASE("closed loop on a constant series stays constant") {
        dynamics::TimeSeries flat;
        flat.data = Matrix::Constant(200, 3, 0.4);
        reservoir::QuantumReservoirSpec spec;
        spec.ansatz.n_qubits = 3;
        spec.ansatz.n_inputs = 3;
        spec.params = qsim::sample_random_unitary_params(3, 1);
        spec.leak_rate = 0.5;
        const auto r = reservoir::rf_qrc_generate(flat, spec);
        const auto ts = one_step_ahead(r, flat, 50);
        const auto w = ridge_fit(ts.r, ts.y, 1e-6);
        auto stepper = reservoir::make_rf_qrc_stepper(spec);
        const auto f = predict(w, *stepper, flat, 100, 50, ForecastMode::ClosedLoop);
        CHECK((f.predictions.data.array() - 0.4).abs().maxCoeff() < 1e-6);
    }
    SUBCASE("open loop over the training span equals the training loss") {
        const auto series = qres_test::lorenz_inputs(400, 3);
        reservoir::EsnConfig cfg;
        cfg.n_reservoir = 60;
        const auto weights = reservoir::make_esn_weights(cfg, 3);
        const auto r = reservoir::esn_generate(series, weights, 0.5);
        const Index washout = 0;
        const auto ts = one_step_ahead(r, series, washout);
        const auto w = ridge_fit(ts.r, ts.y, 1e-6);
        auto stepper = reservoir::make_esn_stepper(weights, 0.5);
        const auto f = predict(w, *stepper, series, 1, 399, ForecastMode::OpenLoop);
        CHECK(std::abs(f.mse - training_mse(w, ts.r, ts.y)) < 1e-12);
        CHECK(f.per_component_mse.size() == 3);
        const auto beyond = predict(w, *stepper, series, 400, 20, ForecastMode::ClosedLoop);
        CHECK(std::isnan(beyond.mse));
        CHECK(beyond.predictions.steps() == 20);
    }
}

TEST_CASE("closed-loop RF-QRC Lorenz forecast stays on the attractor box") {
    const auto spec_l = dynamics::ModelSpec::lorenz63();
    const auto raw = dynamics::rk4_integrate(spec_l, dynamics::default_initial_state(spec_l), 2600, 1000, 1);
    const auto [series, norm] = dynamics::normalize(raw);
    reservoir::QuantumReservoirSpec spec;
    spec.ansatz.n_qubits = 7;
    spec.ansatz.n_inputs = 3;
    spec.params = qsim::sample_random_unitary_params(7, 1);
    spec.leak_rate = 0.1;
    const Index train_steps = 2222;
    const auto r = reservoir::rf_qrc_generate(series.slice(0, train_steps), spec);
    const auto ts = one_step_ahead(r, series.slice(0, train_steps), 100);
    const auto w = ridge_fit(ts.r, ts.y, 1e-6);
    auto stepper = reservoir::make_rf_qrc_stepper(spec);
    const Index horizon = static_cast<Index>(std::ceil(2.0 * spec_l.lyapunov_time() / spec_l.dt));
    const auto f = predict(w, *stepper, series, train_steps, horizon, ForecastMode::ClosedLoop);
    const auto phys = dynamics::denormalize(f.predictions, norm);
    CHECK(phys.data.col(0).cwiseAbs().maxCoeff() < 25.0);
    CHECK(phys.data.col(1).cwiseAbs().maxCoeff() < 30.0);
    CHECK(phys.data.col(2).minCoeff() > 0.0);
    CHECK(phys.data.col(2).maxCoeff() < 55.0);
}

TEST_CASE("snr_db") {
    Matrix ref(2, 100);
    for (Index t = 0; t < 100; ++t) {
        ref(0, t) = std::sin(0.1 * static_cast<double>(t));
        ref(1, t) = std::cos(0.3 * static_cast<double>(t));
    }
    CHECK(snr_db(ref, ref) >= kSnrCapDb);

    // Noise whose mean square equals each neuron's variance.
    Matrix noise(2, 100);
    for (Index i = 0; i < 2; ++i) {
        const double var = (ref.row(i).array() - ref.row(i).mean()).square().mean();
        for (Index t = 0; t < 100; ++t) noise(i, t) = (t % 2 ? 1.0 : -1.0) * std::sqrt(var);
    }
    CHECK(std::abs(snr_db(ref + noise, ref)) < 1e-12);

    auto engine = rng::make_engine(5);
    std::normal_distribution<double> normal(0.0, 0.1);
    Matrix sine(1, 10000), noisy(1, 10000);
    for (Index t = 0; t < 10000; ++t) {
        sine(0, t) = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 250.0);
        noisy(0, t) = sine(0, t) + normal(engine);
    }
    CHECK(std::abs(snr_db(noisy, sine) - 10.0 * std::log10(0.5 / 0.01)) < 0.5);

    CHECK_THROWS_AS(snr_db(Matrix::Constant(2, 10, 0.5), Matrix::Constant(2, 10, 0.5)), UndefinedSnrError);
    CHECK_THROWS_AS(snr_db(Matrix::Zero(2, 10), Matrix::Zero(3, 10)), InvalidInput);
}

TEST_CASE("kinetic_energy") {
    dynamics::TimeSeries s;
    s.data = Matrix::Zero(3, 9);
    s.data.row(1) = dynamics::mfe_laminar().transpose();
    s.data.row(2) = random_matrix(1, 9, 4);
    const Vector ke = kinetic_energy(s);
    CHECK(ke[0] == 0.0);
    CHECK(ke[1] == 0.5);
    double hand = 0.0;
    for (Index i = 0; i < 9; ++i) hand += 0.5 * s.data(2, i) * s.data(2, i);
    CHECK(std::abs(ke[2] - hand) < 1e-12);
    dynamics::TimeSeries three;
    three.data = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(kinetic_energy(three), InvalidInput);
}

TEST_CASE("active_dimension") {
    const Matrix r = random_matrix(10, 1, 1) * random_matrix(1, 30, 2);
    for (double eta : {0.5, 0.99, 1.0}) CHECK(active_dimension(r, eta) == 1);
    CHECK(active_dimension(Matrix::Identity(6, 6), 1.0) == 6);
    Matrix diag = Matrix::Zero(3, 5);
    diag(0, 0) = 10;
    diag(1, 1) = 1;
    diag(2, 2) = 0.1;
    // Cumulative energies 100/101.01 = 0.990001 and 101/101.01: the first
    // singular value alone already reaches 0.99.
    CHECK(active_dimension(diag, 0.99) == 1);
    diag(1, 1) = 1.5;  // 100/102.26 = 0.978 < 0.99 <= 102.25/102.26
    CHECK(active_dimension(diag, 0.99) == 2);
}

TEST_CASE("beta sweep and log grid") {
    const auto g = log_grid(1e-8, 1e-2, 7);
    REQUIRE(g.size() == 7);
    CHECK(g.front() == doctest::Approx(1e-8));
    CHECK(g[3] == doctest::Approx(1e-5));
    CHECK(g.back() == doctest::Approx(1e-2));
    const Matrix r = random_matrix(10, 60, 3);
    const Matrix y = random_matrix(60, 2, 4);
    const auto sweep = beta_sweep(r, y, g);
    for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].mse >= sweep[i - 1].mse);
}
