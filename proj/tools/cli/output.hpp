#pragma once

// Text outputs: CSV tables and matrix documents with a '#' metadata preamble.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homtomo/grid.hpp"
#include "homtomo/tomography.hpp"

namespace homtomo::cli {

inline constexpr int kSchemaVersion = 1;

struct Preamble {
    std::string command;
    std::uint64_t config_hash;
    std::optional<std::uint64_t> seed;  // absent for exact runs
};

/// %.17g: round-trips every double.
std::string format_number(double v);

class Table {
public:
    Table(Preamble preamble, std::vector<std::string> columns)
        : preamble_(std::move(preamble)), columns_(std::move(columns)) {}

    void add_row(std::vector<std::string> cells);
    void add_note(std::string line) { notes_.push_back(std::move(line)); }
    void add_footer(std::string line) { footer_.push_back(std::move(line)); }
    void write(const std::filesystem::path& path) const;

private:
    Preamble preamble_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::string> notes_;
    std::vector<std::string> footer_;
};

/// shape line followed by row,col,re,im for every entry (row-major).
void write_matrix(const std::filesystem::path& path, const Preamble& preamble, const std::string& kind,
                  const std::vector<double>& times, const Matrix& m);

/// Columns: kind,t1_s,t2_s,phi_rad,rate,stderr (kind is delay or coherence).
void write_rates(const std::filesystem::path& path, const Preamble& preamble, const std::vector<RateRecord>& records);
std::vector<RateRecord> read_rates(const std::filesystem::path& path);

}  // namespace homtomo::cli
