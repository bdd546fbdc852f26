#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace homtomo::cli {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides output.dir
    bool exact = false;                            // ignore the trial plan
    std::optional<std::uint64_t> seed;             // overrides trials.seed
};

/// Files written, in order.
using Written = std::vector<std::filesystem::path>;

Written cmd_hom_scan(const Config& cfg, const RunOptions& opts);
Written cmd_tomography(const Config& cfg, const RunOptions& opts);
Written cmd_entangle_scan(const Config& cfg, const RunOptions& opts);
Written cmd_sigma_check(const Config& cfg, const RunOptions& opts);

const std::vector<std::string>& command_names();
/// Dispatch by subcommand name; throws CliError("usage") for unknown names.
Written run_command(const std::string& name, const Config& cfg, const RunOptions& opts);

}  // namespace homtomo::cli
