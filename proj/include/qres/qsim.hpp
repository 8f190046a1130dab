#pragma once

// Dense statevector emulation of the reservoir circuits, built from the gate
// set {H, Ry, CNOT}. Qubit 0 is the least significant bit of a basis index.

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "qres/types.hpp"

namespace qres::qsim {

class StateVector {
public:
    // |0...0> on n qubits.
    explicit StateVector(unsigned n_qubits);

    unsigned qubits() const noexcept { return n_; }
    std::size_t dimension() const noexcept { return amps_.size(); }
    std::span<const std::complex<double>> amplitudes() const noexcept { return amps_; }
    std::span<std::complex<double>> amplitudes() noexcept { return amps_; }

    void apply_h(unsigned qubit);
    void apply_ry(unsigned qubit, double theta);
    void apply_cnot(unsigned control, unsigned target);

    double norm_squared() const noexcept;
    // |<k|psi>|^2 for every basis state k.
    Vector probabilities() const;

private:
    void check_qubit(unsigned q) const;

    unsigned n_;
    std::vector<std::complex<double>> amps_;
};

enum class Entangler { LinearChain, FullyConnected };

struct AnsatzConfig {
    unsigned n_qubits = 1;
    unsigned n_inputs = 1;
    unsigned encoding_layers = 2;
    Entangler entangling = Entangler::LinearChain;
    double angle_scale = std::numbers::pi;

    void validate() const;
    std::size_t dimension() const noexcept { return std::size_t{1} << n_qubits; }
};

// Rotation angles of the fixed random layer, alpha_j ~ Uniform[0, 4pi].
struct RandomUnitaryParams {
    std::vector<double> alphas;
    std::uint64_t seed = 0;
};

RandomUnitaryParams sample_random_unitary_params(unsigned n_qubits, std::uint64_t seed);

// theta_j = angle_scale * u[j mod N_u]; throws RangeError for u outside [0, 1].
std::vector<double> encode_input_angles(std::span<const double> u, const AnsatzConfig& config);

// One feature-map block: H on every qubit, Ry(angles), then the entangler.
void apply_block(StateVector& psi, std::span<const double> angles, Entangler entangling);

// Recurrence-free map: encoding blocks on u (encoding_layers times), then one
// random block on alpha, applied to |0...0>.
Vector run_rf_circuit(std::span<const double> u, const RandomUnitaryParams& params,
                      const AnsatzConfig& config);

enum class RecurrentBlock {
    Encoded,  // previous reservoir state enters through its own block
    Skipped,  // block removed; the circuit reduces to the recurrence-free map
};

// Compresses a 2^n reservoir vector to n angles: contiguous block masses,
// angle_j = angle_scale * n * mass_j, so the uniform vector maps to angle_scale
// on every qubit when n divides 2^n.
// Throws InvalidInput on negative entries.
std::vector<double> compress_reservoir_state(std::span<const double> r, const AnsatzConfig& config);

// Recurrent map: block on the compressed previous state, then the encoding
// blocks on u, then the random block.
Vector run_qrc_circuit(std::span<const double> u, std::span<const double> r_prev,
                       const RandomUnitaryParams& params, const AnsatzConfig& config,
                       RecurrentBlock block = RecurrentBlock::Encoded);

}  // namespace qres::qsim
