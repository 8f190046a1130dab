#include "qres/error.hpp"
#include "qres/experiment.hpp"

namespace qres::experiment {

namespace {

json seeds(int n) {
    json out = json::array();
    for (int i = 1; i <= n; ++i) out.push_back(i);
    return out;
}

json lorenz(int steps = 2222) { return {{"kind", "lorenz63"}, {"steps", steps}, {"transient", 1000}}; }
json mfe(int steps) { return {{"kind", "mfe9"}, {"steps", steps}, {"transient", 2000}}; }
json qubits(int n) { return {{"qubits", n}}; }
json svd_rank(int k) { return {{"method", "svd"}, {"rank", k}}; }
json savgol(int window, int order) { return {{"method", "savgol"}, {"window", window}, {"poly_order", order}}; }

struct Preset {
    const char* name;
    const char* description;
    json (*build)();
};

const Preset kPresets[] = {
    {"lorenz_rfqrc_sweep", "Lorenz-63, 7-qubit RF-QRC, shots 5e4/2e5/4e5, noisy vs filtered training MSE",
     [] {
         return json{{"name", "lorenz_rfqrc_sweep"},
                     {"model", lorenz()},
                     {"architecture", "rfqrc"},
                     {"ansatz", qubits(7)},
                     {"shots", {50000, 200000, 400000}},
                     {"denoisers", json::array({savgol(11, 3)})},
                     {"metrics", json::array({"train_mse"})},
                     {"seeds", seeds(3)}};
     }},
    {"lorenz_svd_sweep", "Lorenz-63, 7-qubit RF-QRC, rank-60 SVD vs the noisy full and 60-state reservoirs",
     [] {
         return json{{"name", "lorenz_svd_sweep"},
                     {"model", lorenz()},
                     {"architecture", "rfqrc"},
                     {"ansatz", qubits(7)},
                     {"shots", {1000, 10000, 100000}},
                     {"denoisers", json::array({svd_rank(60)})},
                     {"metrics", {"train_mse", "train_mse@k", "active_dim"}},
                     {"states", json::array({60})},
                     {"seeds", seeds(3)}};
     }},
    {"lorenz_filter_sweep", "Lorenz-63, 7-qubit RF-QRC, filtered vs noisy MSE over reservoir state counts",
     [] {
         return json{{"name", "lorenz_filter_sweep"},
                     {"model", lorenz()},
                     {"architecture", "rfqrc"},
                     {"ansatz", qubits(7)},
                     {"shots", {1000, 10000, 100000}},
                     {"denoisers", json::array({savgol(11, 3)})},
                     {"metrics", json::array({"train_mse@k"})},
                     {"states", {16, 32, 64, 128}},
                     {"seeds", seeds(3)}};
     }},
    {"mfe_svd_sweep", "MFE, 8-qubit RF-QRC, SVD rank sweep against equally reduced noisy reservoirs",
     [] {
         return json{{"name", "mfe_svd_sweep"},
                     {"model", mfe(2000)},
                     {"architecture", "rfqrc"},
                     {"ansatz", qubits(8)},
                     {"shots", {1000, 10000, 100000}},
                     {"denoisers", json::array({svd_rank(64)})},
                     {"metrics", {"train_mse", "train_mse@k", "active_dim"}},
                     {"states", {32, 64, 128}},
                     {"seeds", seeds(3)}};
     }},
    {"mfe_hardware_emulated", "MFE, 10-qubit RF-QRC, 1200 steps at 1e4 shots, noisy vs filtered loss and kinetic energy",
     [] {
         return json{{"name", "mfe_hardware_emulated"},
                     {"model", mfe(1200)},
                     {"architecture", "rfqrc"},
                     {"ansatz", qubits(10)},
                     {"shots", json::array({10000})},
                     {"leak_rate", 0.3},
                     {"denoisers", json::array({savgol(31, 3)})},
                     {"metrics", {"train_mse", "ke_mse", "snr_db"}},
                     {"seeds", seeds(5)}};
     }},
    {"mfe_snr_compare", "MFE, 6 qubits, SNR of recurrence-free vs recurrent QRC at finite shots",
     [] {
         return json{{"name", "mfe_snr_compare"},
                     {"model", mfe(1200)},
                     {"architecture", {"rfqrc", "qrc"}},
                     {"ansatz", qubits(6)},
                     {"shots", {1000, 10000}},
                     {"metrics", json::array({"snr_db"})},
                     {"seeds", seeds(10)}};
     }},
};

}  // namespace

std::vector<PresetInfo> preset_list() {
    std::vector<PresetInfo> out;
    for (const auto& p : kPresets) out.push_back({p.name, p.description});
    return out;
}

json preset(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) return p.build();
    }
    throw ConfigError("", "unknown preset '" + name + "'");
}

}  // namespace qres::experiment
