#include <cmath>
#include <sstream>

#include <doctest.h>

#include "qres/error.hpp"
#include "qres/reservoir.hpp"
#include "suites.hpp"

using namespace qres;
using namespace qres::reservoir;

namespace {

QuantumReservoirSpec spec_for(unsigned n, sampling::ShotConfig shots, double eps) {
    QuantumReservoirSpec s;
    s.ansatz.n_qubits = n;
    s.ansatz.n_inputs = 3;
    s.params = qsim::sample_random_unitary_params(n, 17);
    s.shots = shots;
    s.leak_rate = eps;
    return s;
}

}  // namespace

TEST_CASE("leak_update") {
    Vector a(2), b(2);
    a << 1.0, 0.0;
    b << 0.0, 1.0;
    CHECK(leak_update(a, b, 1.0) == b);
    const Vector mid = leak_update(a, b, 0.5);
    CHECK(mid[0] == 0.5);
    CHECK(mid[1] == 0.5);

    const double eps = 0.3;
    Vector m(3), r0(3);
    m << 0.2, 0.5, 0.3;
    r0 << 1.0, 0.0, 0.0;
    Vector r = r0;
    for (int t = 1; t <= 40; ++t) {
        r = leak_update(r, m, eps);
        const Vector closed = m + std::pow(1.0 - eps, t) * (r0 - m);
        CHECK((r - closed).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(leak_update(a, Vector::Zero(3), 0.5), InvalidInput);
    CHECK_THROWS_AS(validate_leak_rate(0.0), InvalidInput);
    CHECK_THROWS_AS(validate_leak_rate(1.5), InvalidInput);
}

TEST_CASE("echo state network") {
    TimeSeries zeros;
    zeros.data = Matrix::Zero(30, 3);
    EsnConfig cfg;
    cfg.n_reservoir = 50;
    cfg.seed = 4;
    CHECK(esn_generate(zeros, cfg, 0.2).values().isZero(0.0));

    EsnWeights w;
    w.w_in = Matrix::Ones(1, 1);
    w.w.resize(1, 1);
    TimeSeries half;
    half.data = Matrix::Constant(1, 1, 0.5);
    CHECK(esn_generate(half, w, 1.0).values()(0, 0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));

    const auto series = qres_test::lorenz_inputs(300, 2);
    const auto r = esn_generate(series, cfg, 0.5);
    CHECK(r.values().cwiseAbs().maxCoeff() < 1.0);
    CHECK(r.neurons() == 50);
    CHECK(r.steps() == 300);

    const auto weights = make_esn_weights(cfg, 3);
    Eigen::MatrixXd dense = Eigen::MatrixXd(weights.w);
    for (Index i = 0; i < dense.rows(); ++i) CHECK((dense.row(i).array() != 0.0).count() <= 3);
    const double rho = dense.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(rho == doctest::Approx(cfg.spectral_radius).epsilon(1e-9));

    EsnConfig bad = cfg;
    bad.spectral_radius = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("rf_qrc_generate") {
    const auto series = qres_test::lorenz_inputs(64, 3);
    SUBCASE("chunked equals serial") {
        const auto spec = spec_for(4, sampling::ShotConfig::finite(500, 8), 0.2);
        const auto a = rf_qrc_generate(series, spec, 1, 1);
        const auto b = rf_qrc_generate(series, spec, 8, 4);
        CHECK(a.values() == b.values());
        CHECK(a.raw() == b.raw());
    }
    SUBCASE("exact mode, constant input, eps = 1") {
        TimeSeries flat;
        flat.data = Matrix::Constant(10, 3, 0.4);
        const auto r = rf_qrc_generate(flat, spec_for(3, sampling::ShotConfig::exact(), 1.0));
        for (Index t = 1; t < r.steps(); ++t) CHECK(r.values().col(t) == r.values().col(0));
    }
    SUBCASE("exact raw columns are the circuit output") {
        const auto spec = spec_for(3, sampling::ShotConfig::exact(), 0.1);
        const auto r = rf_qrc_generate(series, spec);
        for (Index t = 0; t < r.steps(); ++t) {
            const Vector u = series.data.row(t).transpose();
            const Vector p = qsim::run_rf_circuit(std::span<const double>(u.data(), 3), spec.params, spec.ansatz);
            CHECK(r.raw().col(t) == p);
        }
        CHECK(r.values().col(0) == r.raw().col(0));
    }
    SUBCASE("errors carry the timestep") {
        TimeSeries bad = series;
        bad.data(20, 1) = 1.5;
        try {
            rf_qrc_generate(bad, spec_for(3, sampling::ShotConfig::exact(), 0.1));
            FAIL("expected range error");
        } catch (const RangeError& e) {
            CHECK(std::string(e.what()).find("20") != std::string::npos);
        }
    }
}

TEST_CASE("qrc_generate") {
    const auto series = qres_test::lorenz_inputs(50, 5);
    const auto exact = spec_for(4, sampling::ShotConfig::exact(), 0.3);
    CHECK(qrc_generate(series, exact).values() == qrc_generate(series, exact).values());

    auto noisy = spec_for(4, sampling::ShotConfig::finite(200, 1), 0.3);
    const auto a = qrc_generate(series, noisy);
    noisy.shots = sampling::ShotConfig::finite(200, 2);
    const auto b = qrc_generate(series, noisy);
    CHECK(a.values() != b.values());
    for (const auto* m : {&a, &b}) CHECK((m->values().colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);

    SUBCASE("skipping the recurrent block reduces to RF-QRC") {
        const auto q = qrc_generate(series, exact, qsim::RecurrentBlock::Skipped);
        const auto rf = rf_qrc_generate(series, exact);
        CHECK((q.raw() - rf.raw()).cwiseAbs().maxCoeff() < 1e-12);
        const auto memoryless = spec_for(4, sampling::ShotConfig::exact(), 1.0);
        CHECK((qrc_generate(series, memoryless, qsim::RecurrentBlock::Skipped).values() -
               rf_qrc_generate(series, memoryless).values())
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("steppers match generation") {
    const auto series = qres_test::lorenz_inputs(40, 6);
    const auto spec = spec_for(3, sampling::ShotConfig::finite(300, 2), 0.25);
    const auto r = rf_qrc_generate(series, spec);
    auto stepper = make_rf_qrc_stepper(spec);
    for (Index t = 0; t < series.steps(); ++t) CHECK(stepper->step(series.data.row(t).transpose()) == r.values().col(t));

    const auto q = qrc_generate(series, spec);
    auto qs = make_qrc_stepper(spec);
    for (Index t = 0; t < series.steps(); ++t) CHECK(qs->step(series.data.row(t).transpose()) == q.values().col(t));
}

TEST_CASE("reservoir CSV round trip") {
    const auto series = qres_test::lorenz_inputs(20, 1);
    const auto r = rf_qrc_generate(series, spec_for(2, sampling::ShotConfig::finite(64, 3), 0.4));
    std::stringstream buf;
    write_csv(buf, r);
    const auto back = read_csv(buf);
    CHECK(back.values() == r.values());
    CHECK(back.meta().architecture == Architecture::RfQrc);
    CHECK(back.meta().shots == std::optional<std::uint64_t>(64));
    CHECK(back.meta().leak_rate == 0.4);
    CHECK(parse_architecture("esn") == Architecture::Esn);
    CHECK(architecture_name(Architecture::Qrc) == "qrc");
    CHECK_THROWS_AS(parse_architecture("lstm"), InvalidInput);
}
