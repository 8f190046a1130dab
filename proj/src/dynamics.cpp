#include "qres/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/rng.hpp"

namespace qres::dynamics {

namespace {

constexpr double kDivergenceBound = 1e6;

void require_dimension(const Vector& x, Index expected, const char* what) {
    if (x.size() != expected) {
        throw InvalidInput(std::string(what) + ": expected " + std::to_string(expected) +
                           " components, got " + std::to_string(x.size()));
    }
}

// Wavenumbers for Lx = 4pi, Lz = 2pi and the free-slip wall mode beta = pi/2.
struct MfeCoefficients {
    double alpha, beta, gamma;
    double k_ag, k_bg, k_abg;

    MfeCoefficients() {
        constexpr double pi = std::numbers::pi;
        alpha = 2.0 * pi / (4.0 * pi);
        beta = pi / 2.0;
        gamma = 2.0 * pi / (2.0 * pi);
        k_ag = std::sqrt(alpha * alpha + gamma * gamma);
        k_bg = std::sqrt(beta * beta + gamma * gamma);
        k_abg = std::sqrt(alpha * alpha + beta * beta + gamma * gamma);
    }
};

const MfeCoefficients& mfe_coefficients() {
    static const MfeCoefficients c;
    return c;
}

}  // namespace

ModelSpec ModelSpec::lorenz63() {
    ModelSpec spec;
    spec.kind = ModelKind::Lorenz63;
    spec.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
    spec.lyapunov_exponent = 0.9;
    spec.dt = 0.01;
    return spec;
}

ModelSpec ModelSpec::mfe9(double reynolds) {
    ModelSpec spec;
    spec.kind = ModelKind::Mfe9;
    spec.params = {{"re", reynolds}};
    spec.lyapunov_exponent = 0.0163;
    spec.dt = 0.25;
    return spec;
}

double ModelSpec::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) throw InvalidInput("model parameter '" + name + "' is not set");
    return it->second;
}

void ModelSpec::validate() const {
    if (!(dt > 0.0)) throw InvalidInput("model dt must be > 0");
    if (!(lyapunov_exponent > 0.0)) throw InvalidInput("Lyapunov exponent must be > 0");
    if (kind == ModelKind::Lorenz63) {
        param("sigma");
        param("rho");
        param("beta");
    } else if (!(param("re") > 0.0)) {
        throw InvalidInput("Reynolds number must be > 0");
    }
}

VectorField ModelSpec::vector_field() const {
    validate();
    if (kind == ModelKind::Lorenz63) {
        const double s = param("sigma"), r = param("rho"), b = param("beta");
        return [s, r, b](const Vector& x) { return lorenz63_rhs(x, s, r, b); };
    }
    const double re = param("re");
    return [re](const Vector& a) { return mfe_rhs(a, re); };
}

TimeSeries TimeSeries::slice(Index first, Index count) const {
    if (first < 0 || count < 0 || first + count > steps()) {
        throw InvalidInput("time-series slice out of range");
    }
    TimeSeries out;
    out.data = data.middleRows(first, count);
    out.dt = dt;
    out.lyapunov_time = lyapunov_time;
    out.t0 = time(first);
    return out;
}

Vector lorenz63_rhs(const Vector& x, double sigma, double rho, double beta) {
    require_dimension(x, 3, "lorenz63_rhs");
    Vector dx(3);
    dx[0] = sigma * (x[1] - x[0]);
    dx[1] = x[0] * (rho - x[2]) - x[1];
    dx[2] = x[0] * x[1] - beta * x[2];
    return dx;
}

Vector mfe_nonlinear(const Vector& a) {
    require_dimension(a, 9, "mfe_rhs");
    const auto& c = mfe_coefficients();
    const double al = c.alpha, be = c.beta, ga = c.gamma;
    const double kag = c.k_ag, kbg = c.k_bg, kabg = c.k_abg;
    const double s6 = std::sqrt(6.0);
    const double s32 = std::sqrt(1.5);

    const double a1 = a[0], a2 = a[1], a3 = a[2], a4 = a[3], a5 = a[4], a6 = a[5], a7 = a[6],
                 a8 = a[7], a9 = a[8];
    Vector d(9);
    d[0] = -s32 * be * ga / kabg * a6 * a8 + s32 * be * ga / kbg * a2 * a3;
    d[1] = 5.0 * std::sqrt(2.0) * ga * ga / (3.0 * std::sqrt(3.0) * kag) * a4 * a6 -
           ga * ga / (s6 * kag) * a5 * a7 - al * be * ga / (s6 * kag * kabg) * a5 * a8 -
           s32 * be * ga / kbg * (a1 * a3 + a3 * a9);
    d[2] = 2.0 * al * be * ga / (s6 * kag * kbg) * (a4 * a7 + a5 * a6) +
           (be * be * (3.0 * al * al + ga * ga) - 3.0 * ga * ga * (al * al + ga * ga)) /
               (s6 * kag * kbg * kabg) * a4 * a8;
    d[3] = -al / s6 * a1 * a5 - 10.0 * al * al / (3.0 * s6 * kag) * a2 * a6 -
           s32 * al * be * ga / (kag * kbg) * a3 * a7 -
           s32 * al * al * be * be / (kag * kbg * kabg) * a3 * a8 - al / s6 * a5 * a9;
    d[4] = al / s6 * a1 * a4 + al * al / (s6 * kag) * a2 * a7 -
           al * be * ga / (s6 * kag * kabg) * a2 * a8 + al / s6 * a4 * a9 +
           2.0 * al * be * ga / (s6 * kag * kbg) * a3 * a6;
    d[5] = al / s6 * a1 * a7 + s32 * be * ga / kabg * a1 * a8 +
           10.0 * (al * al - ga * ga) / (3.0 * s6 * kag) * a2 * a4 -
           2.0 * std::sqrt(2.0 / 3.0) * al * be * ga / (kag * kbg) * a3 * a5 +
           al / s6 * a7 * a9 + s32 * be * ga / kabg * a8 * a9;
    d[6] = -al / s6 * (a1 * a6 + a6 * a9) + (ga * ga - al * al) / (s6 * kag) * a2 * a5 +
           al * be * ga / (s6 * kag * kbg) * a3 * a4;
    d[7] = 2.0 * al * be * ga / (s6 * kag * kabg) * a2 * a5 +
           ga * ga * (3.0 * al * al - be * be + 3.0 * ga * ga) / (s6 * kag * kbg * kabg) * a3 * a4;
    d[8] = s32 * be * ga / kbg * a2 * a3 - s32 * be * ga / kabg * a6 * a8;
    return d;
}

Vector mfe_rhs(const Vector& a, double reynolds) {
    require_dimension(a, 9, "mfe_rhs");
    if (!(reynolds > 0.0)) throw InvalidInput("mfe_rhs: Reynolds number must be > 0");
    const auto& c = mfe_coefficients();
    const double al2 = c.alpha * c.alpha, be2 = c.beta * c.beta, ga2 = c.gamma * c.gamma;

    // Viscous decay rate of each mode.
    const double decay[9] = {be2,
                             4.0 * be2 / 3.0 + ga2,
                             be2 + ga2,
                             (3.0 * al2 + 4.0 * be2) / 3.0,
                             al2 + be2,
                             (3.0 * al2 + 4.0 * be2 + 3.0 * ga2) / 3.0,
                             al2 + be2 + ga2,
                             al2 + be2 + ga2,
                             9.0 * be2};
    Vector d = mfe_nonlinear(a);
    for (int i = 0; i < 9; ++i) d[i] -= decay[i] / reynolds * a[i];
    d[0] += be2 / reynolds;  // body forcing
    return d;
}

Vector mfe_laminar() {
    Vector a = Vector::Zero(9);
    a[0] = 1.0;
    return a;
}

Vector rk4_step(const VectorField& f, const Vector& x, double dt) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * dt * k1);
    const Vector k3 = f(x + 0.5 * dt * k2);
    const Vector k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TimeSeries rk4_integrate(const VectorField& f, const Vector& initial, double dt,
                         std::size_t n_steps, std::size_t transient_steps) {
    if (n_steps < 1) throw InvalidInput("rk4_integrate: n_steps must be >= 1");
    if (!(dt > 0.0)) throw InvalidInput("rk4_integrate: dt must be > 0");
    if (!initial.allFinite()) throw InvalidInput("rk4_integrate: initial state is not finite");

    TimeSeries out;
    out.dt = dt;
    out.t0 = static_cast<double>(transient_steps + 1) * dt;
    out.data.resize(static_cast<Index>(n_steps), initial.size());

    Vector x = initial;
    const std::size_t total = transient_steps + n_steps;
    for (std::size_t step = 0; step < total; ++step) {
        x = rk4_step(f, x, dt);
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
            throw DivergenceError(step + 1, "state left the region |x| <= 1e6");
        }
        if (step >= transient_steps) out.data.row(static_cast<Index>(step - transient_steps)) = x;
    }
    return out;
}

Vector default_initial_state(const ModelSpec& spec) {
    if (spec.kind == ModelKind::Lorenz63) return Vector::Ones(3);
    return mfe_laminar();
}

TimeSeries rk4_integrate(const ModelSpec& spec, const Vector& initial, std::size_t n_steps,
                         std::size_t transient_steps, std::optional<std::uint64_t> seed) {
    if (static_cast<std::size_t>(initial.size()) != spec.dimension()) {
        throw InvalidInput("rk4_integrate: initial state has " + std::to_string(initial.size()) +
                           " components, model needs " + std::to_string(spec.dimension()));
    }
    Vector x0 = initial;
    if (seed) {
        auto engine = rng::make_engine(rng::derive_seed(*seed, rng::Stream::InitialCondition));
        const Index first = spec.kind == ModelKind::Mfe9 ? 1 : 0;
        for (Index i = first; i < x0.size(); ++i) x0[i] += rng::uniform(engine, -0.1, 0.1);
    }
    TimeSeries out = rk4_integrate(spec.vector_field(), x0, spec.dt, n_steps, transient_steps);
    out.lyapunov_time = spec.lyapunov_time();
    return out;
}

Vector NormalizationParams::apply(const Vector& x) const {
    if (x.size() != min.size()) throw InvalidInput("normalize: dimension mismatch");
    return ((x - min).array() / (max - min).array()).matrix();
}

Vector NormalizationParams::invert(const Vector& u) const {
    if (u.size() != min.size()) throw InvalidInput("denormalize: dimension mismatch");
    return (u.array() * (max - min).array() + min.array()).matrix();
}

TimeSeries NormalizationParams::apply(const TimeSeries& series) const {
    if (series.components() != min.size()) throw InvalidInput("normalize: dimension mismatch");
    TimeSeries out = series;
    const Eigen::RowVectorXd lo = min.transpose();
    const Eigen::RowVectorXd range = (max - min).transpose();
    out.data = (series.data.rowwise() - lo).array().rowwise() / range.array();
    return out;
}

TimeSeries NormalizationParams::invert(const TimeSeries& series) const {
    if (series.components() != min.size()) throw InvalidInput("denormalize: dimension mismatch");
    TimeSeries out = series;
    const Eigen::RowVectorXd lo = min.transpose();
    const Eigen::RowVectorXd range = (max - min).transpose();
    out.data = (series.data.array().rowwise() * range.array()).rowwise() + lo.array();
    return out;
}

std::pair<TimeSeries, NormalizationParams> normalize(const TimeSeries& series) {
    if (series.steps() < 1) throw InvalidInput("normalize: empty series");
    if (!series.data.allFinite()) throw InvalidInput("normalize: series has non-finite entries");
    NormalizationParams params{series.data.colwise().minCoeff().transpose(),
                               series.data.colwise().maxCoeff().transpose()};
    for (Index c = 0; c < params.min.size(); ++c) {
        if (!(params.max[c] > params.min[c])) {
            throw InvalidInput("normalize: component " + std::to_string(c) + " is constant");
        }
    }
    return {params.apply(series), params};
}

TimeSeries denormalize(const TimeSeries& series, const NormalizationParams& params) {
    return params.invert(series);
}

void write_csv(std::ostream& out, const TimeSeries& series) {
    out << 't';
    for (Index c = 0; c < series.components(); ++c) out << ",c" << c;
    out << '\n';
    for (Index i = 0; i < series.steps(); ++i) {
        out << csv::format_double(series.time(i));
        for (Index c = 0; c < series.components(); ++c) {
            out << ',' << csv::format_double(series.data(i, c));
        }
        out << '\n';
    }
}

void write_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    write_csv(out, series);
}

TimeSeries read_csv(std::istream& in, double lyapunov_time) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("trajectory CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = csv::split(line);
    if (header.size() < 2 || header[0] != "t") {
        throw InvalidInput("trajectory CSV header must start with 't,c0'");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] != "c" + std::to_string(c - 1)) {
            throw InvalidInput("trajectory CSV header column " + std::to_string(c) +
                               " must be 'c" + std::to_string(c - 1) + "'");
        }
    }
    const Index dims = static_cast<Index>(header.size() - 1);
    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        if (static_cast<Index>(fields.size()) != dims + 1) {
            throw InvalidInput("trajectory CSV row " + std::to_string(times.size() + 1) +
                               " has " + std::to_string(fields.size()) + " fields");
        }
        times.push_back(csv::parse_double(fields[0]));
        for (Index c = 0; c < dims; ++c) values.push_back(csv::parse_double(fields[c + 1]));
    }
    if (times.empty()) throw InvalidInput("trajectory CSV has no rows");
    TimeSeries out;
    const Index rows = static_cast<Index>(times.size());
    out.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), rows, dims);
    out.t0 = times.front();
    out.dt = rows > 1 ? (times.back() - times.front()) / static_cast<double>(rows - 1) : 1.0;
    out.lyapunov_time = lyapunov_time;
    return out;
}

TimeSeries read_csv(const std::string& path, double lyapunov_time) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
    return read_csv(in, lyapunov_time);
}

}  // namespace qres::dynamics
