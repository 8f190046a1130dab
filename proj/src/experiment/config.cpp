#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qres/error.hpp"
#include "qres/experiment.hpp"

namespace qres::experiment {

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string index_path(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

// Object reader that records which keys were consumed and rejects the rest.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }
    std::string path(const std::string& key) const { return join_path(path_, key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(path(key), "expected a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) {
        const std::int64_t v = integer(key, static_cast<std::int64_t>(fallback));
        if (v < static_cast<std::int64_t>(min)) {
            throw ConfigError(path(key), "must be >= " + std::to_string(min));
        }
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(path(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs a module validator and re-labels its error with the config path.
template <class F>
void checked(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

ModelConfig parse_model(Fields f) {
    ModelConfig m;
    const std::string kind = f.string("kind", "lorenz63");
    if (kind == "lorenz63") {
        m.spec = dynamics::ModelSpec::lorenz63();
        for (const char* p : {"sigma", "rho", "beta"}) {
            m.spec.params[p] = f.number(p, m.spec.params[p]);
        }
        m.transient = 1000;
    } else if (kind == "mfe9") {
        m.spec = dynamics::ModelSpec::mfe9(f.number("reynolds", 400.0));
        m.transient = 2000;
    } else {
        throw ConfigError(f.path("kind"), "unknown model '" + kind + "' (lorenz63, mfe9)");
    }
    m.spec.dt = f.number("dt", m.spec.dt);
    m.spec.lyapunov_exponent = f.number("lyapunov_exponent", m.spec.lyapunov_exponent);
    m.steps = f.count("steps", 2222, 3);
    m.transient = f.count("transient", m.transient);
    m.perturb_initial = f.boolean("perturb_initial", true);
    f.finish();
    checked(f.path("kind"), [&] { m.spec.validate(); });
    return m;
}

denoise::DenoiseMethod parse_denoiser(Fields f) {
    const std::string method = f.string("method", "");
    if (method == "savgol") {
        denoise::FilterSpec spec;
        spec.window = static_cast<Index>(f.integer("window", spec.window));
        spec.poly_order = static_cast<Index>(f.integer("poly_order", spec.poly_order));
        f.finish();
        checked(f.path("window"), [&] { spec.validate(); });
        return denoise::FilterMethod{spec};
    }
    if (method == "svd") {
        const int modes = f.has("rank") + f.has("energy") + f.has("noise_floor");
        if (modes != 1) {
            throw ConfigError(f.path("method"), "svd needs exactly one of rank, energy, noise_floor");
        }
        denoise::SvdSpec spec;
        if (f.has("rank")) {
            spec = denoise::FixedRank{static_cast<Index>(f.integer("rank", 1))};
        } else if (f.has("energy")) {
            spec = denoise::EnergyFraction{f.number("energy", 0.99)};
        } else {
            spec = denoise::NoiseFloor{f.number("noise_floor", 2.0)};
        }
        f.finish();
        checked(f.path("method"), [&] { denoise::validate(spec); });
        return denoise::SvdMethod{spec};
    }
    throw ConfigError(f.path("method"), "expected \"savgol\" or \"svd\"");
}

template <class T, class F>
std::vector<T> parse_list(const json& v, const std::string& path, F&& item) {
    if (!v.is_array()) throw ConfigError(path, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(item(v[i], index_path(path, i)));
    return out;
}

std::uint64_t as_count(const json& v, const std::string& path, std::uint64_t min) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
        throw ConfigError(path, "expected an integer >= " + std::to_string(min));
    }
    return v.get<std::uint64_t>();
}

const char* entangler_name(qsim::Entangler e) {
    return e == qsim::Entangler::LinearChain ? "linear" : "full";
}

}  // namespace

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::TrainMse: return "train_mse";
        case Metric::TrainMseAtK: return "train_mse@k";
        case Metric::SnrDb: return "snr_db";
        case Metric::ActiveDim: return "active_dim";
        case Metric::ReservoirMse: return "reservoir_mse";
        case Metric::KeMse: return "ke_mse";
    }
    return "unknown";
}

Metric parse_metric(const std::string& name) {
    for (Metric m : {Metric::TrainMse, Metric::TrainMseAtK, Metric::SnrDb, Metric::ActiveDim,
                     Metric::ReservoirMse, Metric::KeMse}) {
        if (metric_name(m) == name) return m;
    }
    throw InvalidInput("unknown metric '" + name + "'");
}

ExperimentConfig parse_config(const json& doc) {
    Fields f(doc, "");
    ExperimentConfig cfg;
    cfg.name = f.string("name", cfg.name);
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
        throw ConfigError("name", "must be a non-empty name without path separators");
    }

    if (f.has("model")) cfg.model = parse_model(Fields(f.at("model"), "model"));
    const auto n_inputs = static_cast<unsigned>(cfg.model.spec.dimension());

    if (f.has("architecture")) {
        const json& a = f.at("architecture");
        auto one = [](const json& v, const std::string& path) {
            if (!v.is_string()) throw ConfigError(path, "expected an architecture name");
            reservoir::Architecture arch{};
            checked(path, [&] { arch = reservoir::parse_architecture(v.get<std::string>()); });
            return arch;
        };
        cfg.architectures = a.is_array() ? parse_list<reservoir::Architecture>(a, "architecture", one)
                                         : std::vector{one(a, "architecture")};
        if (cfg.architectures.empty()) throw ConfigError("architecture", "list is empty");
    }

    cfg.ansatz.n_inputs = n_inputs;
    if (f.has("ansatz")) {
        Fields a(f.at("ansatz"), "ansatz");
        cfg.ansatz.n_qubits = static_cast<unsigned>(a.count("qubits", 5, 1));
        cfg.ansatz.encoding_layers = static_cast<unsigned>(a.count("encoding_layers", 2, 1));
        const std::string ent = a.string("entangling", "linear");
        if (ent == "linear") {
            cfg.ansatz.entangling = qsim::Entangler::LinearChain;
        } else if (ent == "full") {
            cfg.ansatz.entangling = qsim::Entangler::FullyConnected;
        } else {
            throw ConfigError(a.path("entangling"), "expected \"linear\" or \"full\"");
        }
        cfg.ansatz.angle_scale = a.number("angle_scale", std::numbers::pi);
        a.finish();
    } else {
        cfg.ansatz.n_qubits = 5;
    }
    checked("ansatz", [&] { cfg.ansatz.validate(); });

    if (f.has("esn")) {
        Fields e(f.at("esn"), "esn");
        cfg.esn.n_reservoir = static_cast<Index>(e.count("neurons", 100, 1));
        cfg.esn.input_scale = e.number("input_scale", 1.0);
        cfg.esn.spectral_radius = e.number("spectral_radius", 0.99);
        cfg.esn.connectivity_degree = static_cast<Index>(e.count("degree", 3, 1));
        e.finish();
    }
    checked("esn", [&] { cfg.esn.validate(); });

    if (f.has("shots")) {
        cfg.shots_grid = parse_list<std::optional<std::uint64_t>>(
            f.at("shots"), "shots", [](const json& v, const std::string& path) {
                if (v.is_string() && v.get<std::string>() == "exact") return std::optional<std::uint64_t>{};
                return std::optional<std::uint64_t>{as_count(v, path, 1)};
            });
        if (cfg.shots_grid.empty()) throw ConfigError("shots", "list is empty");
    }

    cfg.leak_rate = f.number("leak_rate", cfg.leak_rate);
    checked("leak_rate", [&] { reservoir::validate_leak_rate(cfg.leak_rate); });
    cfg.beta = f.number("beta", cfg.beta);
    if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta)) throw ConfigError("beta", "must be >= 0");
    cfg.bias = f.boolean("bias", cfg.bias);
    cfg.washout = static_cast<Index>(f.count("washout", 100));
    if (cfg.washout + 2 > static_cast<Index>(cfg.model.steps)) {
        throw ConfigError("washout", "leaves no training columns for " +
                                         std::to_string(cfg.model.steps) + " steps");
    }
    cfg.include_noisy = f.boolean("include_noisy", cfg.include_noisy);

    if (f.has("denoisers")) {
        cfg.denoisers = parse_list<denoise::DenoiseMethod>(
            f.at("denoisers"), "denoisers",
            [](const json& v, const std::string& path) { return parse_denoiser(Fields(v, path)); });
    }
    if (!cfg.include_noisy && cfg.denoisers.empty()) {
        throw ConfigError("include_noisy", "no arms left: enable the noisy arm or add denoisers");
    }

    if (f.has("metrics")) {
        cfg.metrics = parse_list<Metric>(f.at("metrics"), "metrics", [](const json& v, const std::string& path) {
            if (!v.is_string()) throw ConfigError(path, "expected a metric name");
            Metric m{};
            checked(path, [&] { m = parse_metric(v.get<std::string>()); });
            return m;
        });
        if (cfg.metrics.empty()) throw ConfigError("metrics", "list is empty");
    }
    if (f.has("states")) {
        cfg.states = parse_list<Index>(f.at("states"), "states", [](const json& v, const std::string& path) {
            return static_cast<Index>(as_count(v, path, 1));
        });
    }
    for (Metric m : cfg.metrics) {
        if (m == Metric::TrainMseAtK && cfg.states.empty()) {
            throw ConfigError("states", "train_mse@k needs a non-empty states list");
        }
        if (m == Metric::KeMse && cfg.model.spec.kind != dynamics::ModelKind::Mfe9) {
            throw ConfigError("metrics", "ke_mse needs the mfe9 model");
        }
    }
    cfg.active_energy = f.number("active_energy", cfg.active_energy);
    if (!(cfg.active_energy > 0.0 && cfg.active_energy <= 1.0)) {
        throw ConfigError("active_energy", "must lie in (0, 1]");
    }

    cfg.chunks = f.count("chunks", 1, 1);
    cfg.workers = f.count("workers", 1, 0);

    if (!f.has("seeds")) throw ConfigError("seeds", "required");
    cfg.seeds = parse_list<std::uint64_t>(f.at("seeds"), "seeds", [](const json& v, const std::string& path) {
        return as_count(v, path, 0);
    });
    if (cfg.seeds.empty()) throw ConfigError("seeds", "must contain at least one seed");

    cfg.output = f.string("output", "");
    f.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    json model;
    if (cfg.model.spec.kind == dynamics::ModelKind::Lorenz63) {
        model["kind"] = "lorenz63";
        for (const char* p : {"sigma", "rho", "beta"}) model[p] = cfg.model.spec.param(p);
    } else {
        model["kind"] = "mfe9";
        model["reynolds"] = cfg.model.spec.param("re");
    }
    model["dt"] = cfg.model.spec.dt;
    model["lyapunov_exponent"] = cfg.model.spec.lyapunov_exponent;
    model["steps"] = cfg.model.steps;
    model["transient"] = cfg.model.transient;
    model["perturb_initial"] = cfg.model.perturb_initial;
    doc["model"] = model;

    json arch = json::array();
    for (auto a : cfg.architectures) arch.push_back(std::string(reservoir::architecture_name(a)));
    doc["architecture"] = arch;
    doc["ansatz"] = {{"qubits", cfg.ansatz.n_qubits},
                     {"encoding_layers", cfg.ansatz.encoding_layers},
                     {"entangling", entangler_name(cfg.ansatz.entangling)},
                     {"angle_scale", cfg.ansatz.angle_scale}};
    doc["esn"] = {{"neurons", cfg.esn.n_reservoir},
                  {"input_scale", cfg.esn.input_scale},
                  {"spectral_radius", cfg.esn.spectral_radius},
                  {"degree", cfg.esn.connectivity_degree}};
    json shots = json::array();
    for (const auto& s : cfg.shots_grid) {
        if (s) {
            shots.push_back(*s);
        } else {
            shots.push_back("exact");
        }
    }
    doc["shots"] = shots;
    doc["leak_rate"] = cfg.leak_rate;
    doc["beta"] = cfg.beta;
    doc["bias"] = cfg.bias;
    doc["washout"] = cfg.washout;
    doc["include_noisy"] = cfg.include_noisy;
    json dn = json::array();
    for (const auto& d : cfg.denoisers) {
        if (const auto* fm = std::get_if<denoise::FilterMethod>(&d)) {
            dn.push_back({{"method", "savgol"}, {"window", fm->spec.window}, {"poly_order", fm->spec.poly_order}});
        } else {
            const auto& spec = std::get<denoise::SvdMethod>(d).spec;
            json s{{"method", "svd"}};
            if (const auto* r = std::get_if<denoise::FixedRank>(&spec)) s["rank"] = r->rank;
            if (const auto* e = std::get_if<denoise::EnergyFraction>(&spec)) s["energy"] = e->eta;
            if (const auto* n = std::get_if<denoise::NoiseFloor>(&spec)) s["noise_floor"] = n->tau;
            dn.push_back(s);
        }
    }
    doc["denoisers"] = dn;
    json metrics = json::array();
    for (Metric m : cfg.metrics) metrics.push_back(metric_name(m));
    doc["metrics"] = metrics;
    doc["states"] = cfg.states;
    doc["active_energy"] = cfg.active_energy;
    doc["chunks"] = cfg.chunks;
    doc["workers"] = cfg.workers;
    doc["seeds"] = cfg.seeds;
    if (!cfg.output.empty()) doc["output"] = cfg.output;
    return doc;
}

std::string config_hash(const ExperimentConfig& cfg) {
    json doc = to_json(cfg);
    // Scheduling and destination do not change results.
    doc.erase("output");
    doc.erase("workers");
    doc.erase("chunks");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

std::string version() {
#ifdef QRES_VERSION
    return QRES_VERSION;
#else
    return "unknown";
#endif
}

}  // namespace qres::experiment
