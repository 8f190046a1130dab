#include <cmath>
#include <sstream>

#include <doctest.h>

#include "qres/dynamics.hpp"
#include "qres/error.hpp"

using namespace qres;
using namespace qres::dynamics;

TEST_CASE("lorenz63_rhs at hand-evaluated points") {
    CHECK(lorenz63_rhs(Vector::Zero(3)).isZero(0.0));

    const double c = std::sqrt(72.0);
    Vector fixed(3);
    fixed << c, c, 27.0;
    CHECK(lorenz63_rhs(fixed).cwiseAbs().maxCoeff() < 1e-12);
    fixed << -c, -c, 27.0;
    CHECK(lorenz63_rhs(fixed).cwiseAbs().maxCoeff() < 1e-12);

    const Vector d = lorenz63_rhs(Vector::Ones(3));
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 26.0);
    CHECK(d[2] == doctest::Approx(1.0 - 8.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(lorenz63_rhs(Vector::Ones(2)), InvalidInput);
}

TEST_CASE("mfe_rhs: laminar fixed point and forcing") {
    for (double re : {100.0, 400.0, 1500.0}) {
        CHECK(mfe_rhs(mfe_laminar(), re).cwiseAbs().maxCoeff() < 1e-14);
        const Vector d0 = mfe_rhs(Vector::Zero(9), re);
        CHECK(d0[0] > 0.0);
        CHECK(d0.tail(8).isZero(0.0));
    }
    CHECK_THROWS_AS(mfe_rhs(Vector::Ones(3), 400.0), InvalidInput);
}

TEST_CASE("mfe quadratic terms conserve energy") {
    Vector a(9);
    a << 0.3, -0.2, 0.1, 0.05, -0.4, 0.25, -0.15, 0.7, 0.01;
    CHECK(std::abs(a.dot(mfe_nonlinear(a))) < 1e-14);
}

TEST_CASE("model spec defaults and validation") {
    const auto l = ModelSpec::lorenz63();
    CHECK(l.dimension() == 3);
    CHECK(l.param("rho") == 28.0);
    CHECK(l.lyapunov_time() == doctest::Approx(1.0 / 0.9));
    const auto m = ModelSpec::mfe9();
    CHECK(m.dimension() == 9);
    CHECK(m.param("re") == 400.0);
    auto bad = l;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    CHECK_THROWS_AS(l.param("re"), InvalidInput);
}

TEST_CASE("rk4_integrate") {
    SUBCASE("zero field keeps the initial state") {
        Vector x0(2);
        x0 << 0.5, -3.0;
        const auto ts = rk4_integrate([](const Vector& x) -> Vector { return Vector::Zero(x.size()); }, x0, 0.1, 50);
        CHECK(ts.steps() == 50);
        for (Index i = 0; i < ts.steps(); ++i) CHECK(ts.data.row(i).transpose() == x0);
    }
    SUBCASE("exponential decay after 100 steps of 0.01") {
        const auto ts = rk4_integrate([](const Vector& x) -> Vector { return -x; }, Vector::Ones(1), 0.01, 100);
        CHECK(std::abs(ts.data(99, 0) - std::exp(-1.0)) < 1e-9);
        CHECK(ts.time(99) == doctest::Approx(1.0));
    }
    SUBCASE("Lorenz-63 from (1,1,1) stays in its bounding box") {
        const auto spec = ModelSpec::lorenz63();
        const auto ts = rk4_integrate(spec, Vector::Ones(3), 10000, 0);
        CHECK(ts.data.col(0).cwiseAbs().maxCoeff() < 25.0);
        CHECK(ts.data.col(1).cwiseAbs().maxCoeff() < 30.0);
        CHECK(ts.data.col(2).minCoeff() > 0.0);
        CHECK(ts.data.col(2).maxCoeff() < 55.0);
    }
    SUBCASE("transient is discarded") {
        const auto spec = ModelSpec::lorenz63();
        const auto full = rk4_integrate(spec, Vector::Ones(3), 30, 0);
        const auto tail = rk4_integrate(spec, Vector::Ones(3), 10, 20);
        CHECK(tail.data == full.data.bottomRows(10));
    }
    SUBCASE("seeded perturbation") {
        const auto spec = ModelSpec::mfe9();
        const auto a = rk4_integrate(spec, mfe_laminar(), 5, 0, 7);
        const auto b = rk4_integrate(spec, mfe_laminar(), 5, 0, 7);
        const auto c = rk4_integrate(spec, mfe_laminar(), 5, 0, 8);
        CHECK(a.data == b.data);
        CHECK(a.data != c.data);
    }
    SUBCASE("divergence names the step") {
        auto blowup = [](const Vector& x) -> Vector { return x.array().square().matrix(); };
        try {
            rk4_integrate(blowup, Vector::Ones(1), 0.1, 100);
            FAIL("expected divergence");
        } catch (const DivergenceError& e) {
            CHECK(e.step() > 0);
            CHECK(e.step() <= 100);
        }
    }
    CHECK_THROWS_AS(rk4_integrate([](const Vector& x) -> Vector { return x; }, Vector::Ones(1), 0.1, 0),
                    InvalidInput);
}

TEST_CASE("normalize") {
    TimeSeries ts;
    ts.data.resize(3, 2);
    ts.data << 0, -2, 1, 0, 0, 2;
    const auto [n, params] = normalize(ts);
    CHECK(n.data.col(0) == ts.data.col(0));
    CHECK(n.data(0, 1) == 0.0);
    CHECK(n.data(1, 1) == 0.5);
    CHECK(n.data(2, 1) == 1.0);
    CHECK(denormalize(n, params).data == ts.data);

    TimeSeries flat;
    flat.data = Matrix::Constant(4, 1, 3.0);
    CHECK_THROWS_AS(normalize(flat), InvalidInput);
}

TEST_CASE("time series CSV round trip") {
    TimeSeries ts;
    ts.data = Matrix::Random(20, 3);
    ts.dt = 0.01;
    ts.t0 = 1.5;
    std::stringstream buf;
    write_csv(buf, ts);
    const auto back = read_csv(buf);
    CHECK(back.data == ts.data);
    CHECK(back.dt == doctest::Approx(ts.dt));
}
