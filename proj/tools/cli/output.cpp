#include "output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "config.hpp"

namespace homtomo::cli {

namespace {

void write_preamble(std::ostream& out, const Preamble& p) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.config_hash));
    out << "# schema_version: " << kSchemaVersion << '\n';
    out << "# command: " << p.command << '\n';
    out << "# config_hash: fnv1a64:" << hash << '\n';
    out << "# seed: " << (p.seed ? std::to_string(*p.seed) : std::string("none")) << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CliError("io", "cannot write " + path.string());
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw CliError("io", "failed writing " + path.string());
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw CliError("config", "rates file: cannot parse number '" + s + "' in " + where);
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) {
        throw std::logic_error("table row width does not match header");
    }
    rows_.push_back(std::move(cells));
}

void Table::write(const std::filesystem::path& path) const {
    std::ofstream out = open_output(path);
    write_preamble(out, preamble_);
    for (const auto& n : notes_) {
        out << "# " << n << '\n';
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        out << (i ? "," : "") << columns_[i];
    }
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
    for (const auto& f : footer_) {
        out << "# " << f << '\n';
    }
    finish(out, path);
}

void write_matrix(const std::filesystem::path& path, const Preamble& preamble, const std::string& kind,
                  const std::vector<double>& times, const Matrix& m) {
    std::ofstream out = open_output(path);
    write_preamble(out, preamble);
    out << "# kind: " << kind << '\n';
    if (!times.empty()) {
        out << "# times_s: ";
        for (std::size_t i = 0; i < times.size(); ++i) {
            out << (i ? "," : "") << format_number(times[i]);
        }
        out << '\n';
    }
    out << "shape: " << m.rows() << ',' << m.cols() << '\n';
    out << "row,col,re,im\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << r << ',' << c << ',' << format_number(m(r, c).real()) << ',' << format_number(m(r, c).imag())
                << '\n';
        }
    }
    finish(out, path);
}

void write_rates(const std::filesystem::path& path, const Preamble& preamble, const std::vector<RateRecord>& records) {
    Table t(preamble, {"kind", "t1_s", "t2_s", "phi_rad", "rate", "stderr"});
    for (const auto& r : records) {
        t.add_row({r.kind == SettingKind::delay ? "delay" : "coherence", format_number(r.t1), format_number(r.t2),
                   format_number(r.phi), format_number(r.rate), format_number(r.std_error)});
    }
    t.write(path);
}

std::vector<RateRecord> read_rates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CliError("io", "cannot open rates file " + path.string());
    }
    std::vector<RateRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto cells = split_csv(line);
        if (!header_seen) {
            header_seen = true;
            if (cells.empty() || cells[0] != "kind") {
                throw CliError("config", "rates file must start with the header kind,t1_s,t2_s,phi_rad,rate,stderr");
            }
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 6) {
            throw CliError("config", "rates file: expected 6 columns at " + where);
        }
        RateRecord r{};
        if (cells[0] == "delay") {
            r.kind = SettingKind::delay;
        } else if (cells[0] == "coherence") {
            r.kind = SettingKind::coherence;
        } else {
            throw CliError("config", "rates file: unknown kind '" + cells[0] + "' at " + where);
        }
        r.t1 = parse_double(cells[1], where);
        r.t2 = parse_double(cells[2], where);
        r.phi = parse_double(cells[3], where);
        r.rate = parse_double(cells[4], where);
        r.std_error = parse_double(cells[5], where);
        if (r.rate < 0.0 || r.rate > 1.0 || r.std_error < 0.0) {
            throw CliError("config", "rates file: rate must lie in [0, 1] and stderr >= 0 at " + where);
        }
        records.push_back(r);
    }
    return records;
}

}  // namespace homtomo::cli
