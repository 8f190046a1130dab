// Runs the seeded invariant checks for one module (or the oracle comparisons
// with --oracles) and exits non-zero on any failure.
//
//   qres_properties <module> [--cases N]
//   qres_properties --oracles

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "suites.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Property checks"};
    std::string module;
    std::size_t cases = 100;
    bool oracles = false;
    app.add_option("module", module)->check(CLI::IsMember(qres_test::invariant_modules()));
    app.add_option("--cases", cases)->check(CLI::PositiveNumber);
    app.add_flag("--oracles", oracles);
    CLI11_PARSE(app, argc, argv);
    if (module.empty() && !oracles) {
        std::cerr << "name a module or pass --oracles\n";
        return 1;
    }

    const auto start = std::chrono::steady_clock::now();
    const auto results = oracles ? qres_test::oracle_suite() : qres_test::invariant_suite(module, cases);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "ok   " : "FAIL ") << r.module << ": " << r.name << " [" << r.cases - r.failures
                  << "/" << r.cases << "]";
        if (!r.detail.empty()) std::cout << "  " << r.detail;
        std::cout << '\n';
        failed += r.passed ? 0 : 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << results.size() - failed << "/" << results.size() << " checks passed in " << secs << " s\n";
    return failed == 0 ? 0 : 1;
}
