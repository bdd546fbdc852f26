#pragma once

// JSON run configuration shared by all subcommands.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "homtomo/counts.hpp"
#include "homtomo/grid.hpp"
#include "homtomo/reference.hpp"
#include "homtomo/twophoton.hpp"

namespace homtomo::cli {

/// Failure outside the library: bad flags, malformed config, file access.
class CliError : public std::runtime_error {
public:
    CliError(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct Config {
    nlohmann::json doc;
    std::filesystem::path base_dir;  // relative file references resolve here
    std::uint64_t hash;              // FNV-1a 64 of the file bytes
};

std::uint64_t fnv1a64(const std::string& bytes);

Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& text, std::filesystem::path base_dir);

TimeGrid parse_grid(const Config& cfg);
ReferenceSpec parse_reference_spec(const nlohmann::json& node, const std::string& where);
FilterOperator parse_filter(const Config& cfg, const TimeGrid& grid);

/// Single-photon signal; "mixture" nests other shapes.
DensityMatrix parse_signal(const Config& cfg, const TimeGrid& grid, const FilterOperator& filter);
/// Photon-pair signal: "pdc" or "product".
BipartiteState parse_pair_signal(const Config& cfg, const TimeGrid& grid, const FilterOperator& filter);

/// A list of numbers given either as an array or as {start, stop, count} (inclusive).
std::vector<double> parse_range(const nlohmann::json& node, const std::string& where);
/// schedule.<key> when present, otherwise the fallback.
std::vector<double> schedule_range(const Config& cfg, const std::string& key, std::optional<std::vector<double>> fallback);
double schedule_number(const Config& cfg, const std::string& key, double fallback);

std::optional<TrialPlan> parse_trials(const Config& cfg);

/// tomography.<key> with a fallback.
bool tomography_flag(const Config& cfg, const std::string& key, bool fallback);
double tomography_number(const Config& cfg, const std::string& key, double fallback);
std::optional<std::filesystem::path> tomography_path(const Config& cfg, const std::string& key);

std::filesystem::path output_dir(const Config& cfg);

}  // namespace homtomo::cli
