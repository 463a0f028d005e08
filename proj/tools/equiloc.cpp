#include <CLI11.hpp>

#include <iostream>

#include "equiloc.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Equivariant oscillatory integrals, desingularization, and residue localization"};
    std::string task, config, out, mu;
    app.add_option("task", task, "oscint | desing | residue | dh | weyl | check")
        ->required()
        ->check(CLI::IsMember({"oscint", "desing", "residue", "dh", "weyl", "check"}));
    app.add_option("--config", config, "scenario file (key = JSON value per line)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--mu", mu, "comma-separated mu list (overrides the config)");
    CLI11_PARSE(app, argc, argv);

    try {
        equiloc::ScenarioConfig cfg = equiloc::load_scenario(config);
        if (!cfg.task.empty() && cfg.task != task)
            equiloc::fail(equiloc::ErrorKind::parse, cfg.where("task") + ": config is for task '" + cfg.task + "', not '" + task + "'");
        cfg.task = task;
        if (!out.empty()) cfg.out_dir = out;
        if (!mu.empty()) cfg.mus = equiloc::parse_mu_list(mu);
        equiloc::RunManifest m = equiloc::run_scenario(cfg);
        for (const auto& [name, pass] : m.checks) std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
        for (const auto& [name, v] : m.values) std::cout << name << " = " << v << "\n";
        std::cout << "wrote " << cfg.out_dir << "/manifest.txt\n";
        return m.all_pass() ? 0 : 1;
    } catch (const equiloc::Error& e) {
        std::cerr << "equiloc: " << e.what() << "\n";
        return 2;
    }
}
