#include <cmath>
#include <fstream>
#include <map>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/experiment.hpp"

namespace qres::experiment {

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return header.size();
    }
};

Table read_table(const std::filesystem::path& path, const std::vector<std::string>& required) {
    const auto lines = csv::read_lines(path.string());
    if (lines.empty()) throw InvalidInput(path.string() + ": file is empty");
    Table t;
    t.header = csv::split(lines[0]);
    std::string missing;
    for (const auto& name : required) {
        if (t.column(name) == t.header.size()) missing += (missing.empty() ? "" : ", ") + name;
    }
    if (!missing.empty()) throw InvalidInput(path.string() + ": missing column(s) " + missing);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = csv::split(lines[i]);
        if (fields.size() != t.header.size()) {
            throw InvalidInput(path.string() + ": line " + std::to_string(i + 1) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

struct Accumulator {
    std::vector<double> values;
    double extra = 0.0;  // running sum of a companion column

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
    // Population standard deviation (ddof 0).
    double stddev() const {
        const double m = mean();
        double s = 0.0;
        for (double v : values) s += (v - m) * (v - m);
        return std::sqrt(s / static_cast<double>(values.size()));
    }
};

// Groups rows by key columns, keeping first-seen order.
struct Grouped {
    std::vector<std::vector<std::string>> keys;
    std::map<std::vector<std::string>, Accumulator> acc;

    Accumulator& at(const std::vector<std::string>& key) {
        auto it = acc.find(key);
        if (it == acc.end()) {
            keys.push_back(key);
            it = acc.emplace(key, Accumulator{}).first;
        }
        return it->second;
    }
};

}  // namespace

Figure parse_figure(const std::string& tag) {
    for (Figure f : {Figure::ShotSweep, Figure::SnrBars, Figure::MseVsStates, Figure::KeReconstruction}) {
        if (figure_tag(f) == tag) return f;
    }
    throw InvalidInput("unknown figure '" + tag +
                       "' (shot-sweep, snr-bars, mse-vs-states, ke-reconstruction)");
}

std::string figure_tag(Figure f) {
    switch (f) {
        case Figure::ShotSweep: return "shot-sweep";
        case Figure::SnrBars: return "snr-bars";
        case Figure::MseVsStates: return "mse-vs-states";
        case Figure::KeReconstruction: return "ke-reconstruction";
    }
    return "unknown";
}

std::filesystem::path emit_plotdata(const std::filesystem::path& results_csv, Figure figure,
                                    const std::filesystem::path& out_dir) {
    const std::filesystem::path dir = out_dir.empty() ? results_csv.parent_path() : out_dir;
    const std::filesystem::path out_path = dir / ("plot_" + figure_tag(figure) + ".csv");

    Grouped groups;
    std::vector<std::string> key_names;
    bool with_truth = false;

    if (figure == Figure::KeReconstruction) {
        const auto path = results_csv.parent_path() / "ke_series.csv";
        key_names = {"arch", "shots", "denoiser", "step"};
        const Table t = read_table(path, {"arch", "shots", "denoiser", "seed", "step", "ke_true", "ke_pred"});
        std::vector<std::size_t> cols;
        for (const auto& k : key_names) cols.push_back(t.column(k));
        const std::size_t pred = t.column("ke_pred"), truth = t.column("ke_true");
        for (const auto& row : t.rows) {
            std::vector<std::string> key;
            for (std::size_t c : cols) key.push_back(row[c]);
            auto& a = groups.at(key);
            a.values.push_back(csv::parse_double(row[pred]));
            a.extra += csv::parse_double(row[truth]);
        }
        with_truth = true;
    } else {
        const Table t = read_table(results_csv, {"arch", "qubits", "shots", "denoiser", "metric", "value", "seed"});
        const std::size_t metric = t.column("metric"), value = t.column("value");
        auto select = [&](const std::string& m) -> std::optional<std::string> {
            switch (figure) {
                case Figure::ShotSweep:
                    if (m == "train_mse" || m == "reservoir_mse") return std::string();
                    break;
                case Figure::SnrBars:
                    if (m == "snr_db") return std::string();
                    break;
                case Figure::MseVsStates:
                    if (m.rfind("train_mse@", 0) == 0) return m.substr(10);
                    break;
                case Figure::KeReconstruction: break;
            }
            return std::nullopt;
        };
        switch (figure) {
            case Figure::ShotSweep: key_names = {"arch", "qubits", "denoiser", "metric", "shots"}; break;
            case Figure::SnrBars: key_names = {"arch", "qubits", "shots", "denoiser"}; break;
            default: key_names = {"arch", "qubits", "shots", "denoiser", "states"}; break;
        }
        for (const auto& row : t.rows) {
            const auto extra_key = select(row[metric]);
            if (!extra_key) continue;
            std::vector<std::string> key;
            for (const auto& k : key_names) {
                if (k == "states") {
                    key.push_back(*extra_key);
                } else {
                    key.push_back(row[t.column(k)]);
                }
            }
            groups.at(key).values.push_back(csv::parse_double(row[value]));
        }
    }
    if (groups.keys.empty()) {
        throw InvalidInput(results_csv.string() + ": no rows for figure " + figure_tag(figure));
    }

    std::filesystem::create_directories(dir);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path.string());
    auto header = key_names;
    if (with_truth) header.push_back("ke_true");
    for (const char* c : {"mean", "std", "n"}) header.push_back(c);
    out << csv::join(header) << '\n';
    for (const auto& key : groups.keys) {
        const auto& a = groups.acc.at(key);
        auto row = key;
        if (with_truth) row.push_back(csv::format_double(a.extra / static_cast<double>(a.values.size())));
        row.push_back(csv::format_double(a.mean()));
        row.push_back(csv::format_double(a.stddev()));
        row.push_back(std::to_string(a.values.size()));
        out << csv::join(row) << '\n';
    }
    return out_path;
}

}  // namespace qres::experiment
