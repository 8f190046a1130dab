#include "qres/qsim.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "qres/error.hpp"
#include "qres/rng.hpp"
#include "qres/simd/kernels.hpp"

namespace qres::qsim {

namespace {
constexpr unsigned kMaxQubits = 24;
}

StateVector::StateVector(unsigned n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw InvalidInput("StateVector: qubit count must be in [1, " +
                           std::to_string(kMaxQubits) + "]");
    }
    amps_.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
    amps_[0] = 1.0;
}

void StateVector::check_qubit(unsigned q) const {
    if (q >= n_) {
        throw InvalidInput("qubit index " + std::to_string(q) + " out of range for " +
                           std::to_string(n_) + " qubits");
    }
}

void StateVector::apply_h(unsigned qubit) {
    check_qubit(qubit);
    const double h = std::numbers::sqrt2 / 2.0;
    simd::kernels().apply_real_gate(amps_.data(), amps_.size(), qubit, {h, h, h, -h});
}

void StateVector::apply_ry(unsigned qubit, double theta) {
    check_qubit(qubit);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    simd::kernels().apply_real_gate(amps_.data(), amps_.size(), qubit, {c, -s, s, c});
}

void StateVector::apply_cnot(unsigned control, unsigned target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw InvalidInput("CNOT control and target must differ");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t k = 0; k < amps_.size(); ++k) {
        if ((k & cbit) && !(k & tbit)) std::swap(amps_[k], amps_[k | tbit]);
    }
}

double StateVector::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

Vector StateVector::probabilities() const {
    Vector p(static_cast<Index>(amps_.size()));
    simd::kernels().norm_squared(amps_.data(), p.data(), amps_.size());
    return p;
}

void AnsatzConfig::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw InvalidInput("ansatz: n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
    }
    if (n_inputs < 1) throw InvalidInput("ansatz: n_inputs must be >= 1");
    if (encoding_layers < 1) throw InvalidInput("ansatz: encoding_layers must be >= 1");
    if (!(angle_scale > 0.0)) throw InvalidInput("ansatz: angle_scale must be > 0");
}

RandomUnitaryParams sample_random_unitary_params(unsigned n_qubits, std::uint64_t seed) {
    if (n_qubits < 1) throw InvalidInput("random unitary: n_qubits must be >= 1");
    auto engine = rng::make_engine(rng::derive_seed(seed, rng::Stream::RandomUnitary));
    RandomUnitaryParams params;
    params.seed = seed;
    params.alphas.resize(n_qubits);
    for (auto& a : params.alphas) a = rng::uniform(engine, 0.0, 4.0 * std::numbers::pi);
    return params;
}

std::vector<double> encode_input_angles(std::span<const double> u, const AnsatzConfig& config) {
    config.validate();
    if (u.size() != config.n_inputs) {
        throw InvalidInput("encode: expected " + std::to_string(config.n_inputs) +
                           " inputs, got " + std::to_string(u.size()));
    }
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (!(u[j] >= 0.0 && u[j] <= 1.0)) {
            throw RangeError("encode: input component " + std::to_string(j) + " = " +
                             std::to_string(u[j]) + " is outside [0, 1]");
        }
    }
    std::vector<double> theta(config.n_qubits);
    for (unsigned j = 0; j < config.n_qubits; ++j) theta[j] = config.angle_scale * u[j % u.size()];
    return theta;
}

void apply_block(StateVector& psi, std::span<const double> angles, Entangler entangling) {
    const unsigned n = psi.qubits();
    if (angles.size() != n) throw InvalidInput("block: one angle per qubit required");
    for (unsigned q = 0; q < n; ++q) psi.apply_h(q);
    for (unsigned q = 0; q < n; ++q) psi.apply_ry(q, angles[q]);
    if (entangling == Entangler::LinearChain) {
        for (unsigned q = 0; q + 1 < n; ++q) psi.apply_cnot(q, q + 1);
    } else {
        for (unsigned j = 0; j < n; ++j)
            for (unsigned k = j + 1; k < n; ++k) psi.apply_cnot(j, k);
    }
}

namespace {

void check_params(const RandomUnitaryParams& params, const AnsatzConfig& config) {
    if (params.alphas.size() != config.n_qubits) {
        throw InvalidInput("random unitary has " + std::to_string(params.alphas.size()) +
                           " angles, ansatz has " + std::to_string(config.n_qubits) + " qubits");
    }
}

void apply_input_and_random(StateVector& psi, std::span<const double> u,
                            const RandomUnitaryParams& params, const AnsatzConfig& config) {
    const auto theta = encode_input_angles(u, config);
    for (unsigned layer = 0; layer < config.encoding_layers; ++layer) {
        apply_block(psi, theta, config.entangling);
    }
    apply_block(psi, params.alphas, config.entangling);
}

}  // namespace

Vector run_rf_circuit(std::span<const double> u, const RandomUnitaryParams& params,
                      const AnsatzConfig& config) {
    config.validate();
    check_params(params, config);
    StateVector psi(config.n_qubits);
    apply_input_and_random(psi, u, params, config);
    return psi.probabilities();
}

std::vector<double> compress_reservoir_state(std::span<const double> r,
                                             const AnsatzConfig& config) {
    const std::size_t dim = config.dimension();
    if (r.size() != dim) {
        throw InvalidInput("recurrent state has " + std::to_string(r.size()) +
                           " entries, expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
        if (!(r[k] >= 0.0)) {
            throw InvalidInput("recurrent state entry " + std::to_string(k) + " is negative");
        }
    }
    const unsigned n = config.n_qubits;
    std::vector<double> angles(n);
    for (unsigned j = 0; j < n; ++j) {
        // Contiguous near-equal blocks [j*dim/n, (j+1)*dim/n).
        const std::size_t lo = j * dim / n;
        const std::size_t hi = (j + 1) * dim / n;
        double mass = 0.0;
        for (std::size_t k = lo; k < hi; ++k) mass += r[k];
        angles[j] = config.angle_scale * static_cast<double>(n) * mass;
    }
    return angles;
}

Vector run_qrc_circuit(std::span<const double> u, std::span<const double> r_prev,
                       const RandomUnitaryParams& params, const AnsatzConfig& config,
                       RecurrentBlock block) {
    config.validate();
    check_params(params, config);
    const auto recurrent = compress_reservoir_state(r_prev, config);
    StateVector psi(config.n_qubits);
    if (block == RecurrentBlock::Encoded) apply_block(psi, recurrent, config.entangling);
    apply_input_and_random(psi, u, params, config);
    return psi.probabilities();
}

}  // namespace qres::qsim
