#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <doctest.h>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/experiment.hpp"

using namespace qres;
using namespace qres::experiment;
namespace fs = std::filesystem;

namespace {

json minimal() { return json::parse(R"({"name": "t", "seeds": [1]})"); }

std::string field_of_error(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.field_path();
    }
    return "<no error>";
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qres_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::map<std::string, std::string> first_row(const fs::path& csv_path) {
    const auto lines = csv::read_lines(csv_path.string());
    const auto head = csv::split(lines.at(0)), row = csv::split(lines.at(1));
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < head.size(); ++i) out[head[i]] = row[i];
    return out;
}

}  // namespace

TEST_CASE("config parsing defaults") {
    const auto cfg = parse_config(minimal());
    CHECK(cfg.name == "t");
    CHECK(cfg.architectures == std::vector{reservoir::Architecture::RfQrc});
    CHECK(cfg.beta == 1e-6);
    CHECK(cfg.washout == 100);
    CHECK(cfg.model.steps == 2222);
    CHECK(cfg.ansatz.n_inputs == 3);
    CHECK(cfg.shots_grid.size() == 1);
    CHECK_FALSE(cfg.shots_grid[0].has_value());
    CHECK(parse_config(to_json(cfg)).name == "t");
    CHECK(config_hash(parse_config(to_json(cfg))) == config_hash(cfg));
}

TEST_CASE("config errors name the field") {
    auto doc = minimal();
    doc["seeds"] = json::array();
    CHECK(field_of_error(doc) == "seeds");
    doc = minimal();
    doc.erase("seeds");
    CHECK(field_of_error(doc) == "seeds");
    doc = minimal();
    doc["shots"] = json::array({100, 1000, -5});
    CHECK(field_of_error(doc) == "shots[2]");
    doc = minimal();
    doc["colour"] = "red";
    CHECK(field_of_error(doc) == "colour");
    doc = minimal();
    doc["ansatz"] = {{"qubits", 0}};
    CHECK(field_of_error(doc).rfind("ansatz", 0) == 0);
    doc = minimal();
    doc["denoisers"] = json::array({{{"method", "svd"}, {"rank", 4}, {"energy", 0.9}}});
    CHECK(field_of_error(doc).rfind("denoisers[0]", 0) == 0);
    doc = minimal();
    doc["metrics"] = json::array({"train_mse@k"});
    CHECK(field_of_error(doc).rfind("states", 0) == 0);
    doc = minimal();
    doc["metrics"] = json::array({"ke_mse"});
    CHECK(field_of_error(doc) != "<no error>");
    doc = minimal();
    doc["architecture"] = "lstm";
    CHECK(field_of_error(doc).rfind("architecture", 0) == 0);
    doc = minimal();
    doc["metrics"] = json::array({"train_mse", "accuracy"});
    CHECK(field_of_error(doc) == "metrics[1]");
    CHECK_THROWS_AS(parse_metric("accuracy"), InvalidInput);
}

TEST_CASE("presets parse") {
    const auto list = preset_list();
    CHECK(list.size() >= 6);
    for (const auto& p : list) {
        const auto cfg = parse_config(preset(p.name));
        CHECK(cfg.name == p.name);
        CHECK_FALSE(cfg.seeds.empty());
    }
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("cell enumeration order") {
    auto doc = minimal();
    doc["architecture"] = json::array({"rfqrc", "esn"});
    doc["shots"] = json::array({10, "exact"});
    doc["seeds"] = json::array({1, 2});
    const auto cells = enumerate_cells(parse_config(doc));
    REQUIRE(cells.size() == 6);
    CHECK(cells[0].arch == reservoir::Architecture::RfQrc);
    CHECK(cells[0].shots == std::optional<std::uint64_t>(10));
    CHECK(cells[1].seed == 2);
    CHECK_FALSE(cells[2].shots.has_value());
    CHECK(cells[4].arch == reservoir::Architecture::Esn);
    CHECK_FALSE(cells[4].shots.has_value());
}

TEST_CASE("output directory precedence") {
    auto cfg = parse_config(minimal());
    cfg.output = "/tmp/explicit";
    CHECK(resolve_output_dir(cfg) == fs::path("/tmp/explicit"));
    cfg.output.clear();
    ::setenv("QRES_OUTPUT_DIR", "/tmp/envroot", 1);
    CHECK(resolve_output_dir(cfg) == fs::path("/tmp/envroot") / "t");
    ::unsetenv("QRES_OUTPUT_DIR");
    CHECK(resolve_output_dir(cfg) == fs::path("results") / "t");
}

TEST_CASE("run_experiment writes results and manifest") {
    const auto dir = scratch("run");
    auto doc = json::parse(R"({
        "name": "unit", "model": {"steps": 200}, "ansatz": {"qubits": 3},
        "shots": [200, "exact"], "washout": 20,
        "denoisers": [{"method": "savgol", "window": 7, "poly_order": 2}, {"method": "svd", "rank": 4}],
        "metrics": ["train_mse", "reservoir_mse", "snr_db", "active_dim"], "seeds": [3]
    })");
    doc["output"] = dir.string();
    const auto summary = run_experiment(parse_config(doc));
    CHECK(summary.cells == 2);
    CHECK(summary.failed == 0);
    CHECK(summary.exit_code() == 0);
    const auto lines = csv::read_lines((dir / "results.csv").string());
    CHECK(lines.front() == kResultsHeader);
    CHECK(lines.size() == 1 + 2 * 3 * 4);
    CHECK(first_row(dir / "results.csv").at("denoiser") == "none");
    CHECK_FALSE(fs::exists(dir / "errors.csv"));
    std::ifstream in(dir / "manifest.json");
    const auto manifest = json::parse(in);
    CHECK(manifest["failed_cells"] == 0);
    CHECK(manifest["seeds"] == json::array({3}));
    CHECK(manifest["config_hash"] == config_hash(parse_config(doc)));
}

TEST_CASE("plotdata aggregation") {
    const auto dir = scratch("plot");
    write(dir / "results.csv", std::string(kResultsHeader) + "\n" +
                                   "rfqrc,5,100,0.1,1e-06,none,train_mse,1,1,0.5\n"
                                   "rfqrc,5,100,0.1,1e-06,none,train_mse,3,2,0.5\n"
                                   "rfqrc,5,100,0.1,1e-06,none,snr_db,20,1,0.5\n"
                                   "rfqrc,5,1000,0.1,1e-06,none,train_mse,0.5,1,0.5\n");
    const auto out = emit_plotdata(dir / "results.csv", Figure::ShotSweep);
    CHECK(out == dir / "plot_shot-sweep.csv");
    const auto lines = csv::read_lines(out.string());
    REQUIRE(lines.size() == 3);
    const auto row = first_row(out);
    CHECK(csv::parse_double(row.at("mean")) == 2.0);
    CHECK(csv::parse_double(row.at("std")) == 1.0);
    CHECK(row.at("n") == "2");
    CHECK(csv::split(lines[2]).back() == "1");

    const auto snr = emit_plotdata(dir / "results.csv", Figure::SnrBars, dir / "sub");
    CHECK(csv::parse_double(first_row(snr).at("std")) == 0.0);
    CHECK(csv::parse_double(first_row(snr).at("mean")) == 20.0);

    CHECK_THROWS_AS(emit_plotdata(dir / "results.csv", Figure::MseVsStates), InvalidInput);
    CHECK_THROWS_AS(parse_figure("pie-chart"), InvalidInput);
    CHECK(parse_figure(figure_tag(Figure::KeReconstruction)) == Figure::KeReconstruction);
    write(dir / "broken.csv", "arch,value\nrfqrc,1\n");
    CHECK_THROWS_AS(emit_plotdata(dir / "broken.csv", Figure::ShotSweep), InvalidInput);
}
