// homtomo: batch front-end for HOM scans, tomography, entanglement scans and
// sigma diagnostics.
//
// Exit codes: 0 ok, 2 usage, 3 config, 4 io, 5 validation (library error).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

int report(const std::string& category, const std::string& what, int code) {
    std::cerr << "error[" << category << "]: " << what << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal tomography with Hong-Ou-Mandel reference photons"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool exact = false;
    std::uint64_t seed = 0;

    for (const std::string& name : homtomo::cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_flag("--exact", exact, "use exact probabilities, ignoring the trial plan");
        sub->add_option("--seed", seed, "seed for simulated counts (overrides trials.seed)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("usage", e.what(), 2);
    }

    const CLI::App* sub = app.get_subcommands().front();
    homtomo::cli::RunOptions opts;
    if (!out_dir.empty()) {
        opts.out_dir = out_dir;
    }
    opts.exact = exact;
    if (sub->count("--seed") > 0) {
        opts.seed = seed;
    }

    try {
        const homtomo::cli::Config cfg = homtomo::cli::load_config(config_path);
        for (const auto& path : homtomo::cli::run_command(sub->get_name(), cfg, opts)) {
            std::cout << path.string() << '\n';
        }
    } catch (const homtomo::cli::CliError& e) {
        const int code = e.category() == "usage" ? 2 : e.category() == "io" ? 4 : 3;
        return report(e.category(), e.what(), code);
    } catch (const homtomo::Error& e) {
        return report(std::string(homtomo::to_string(e.kind())), e.what(), 5);
    } catch (const nlohmann::json::exception& e) {
        return report("config", e.what(), 3);
    }
    return 0;
}
