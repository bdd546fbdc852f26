#include "commands.hpp"

#include <algorithm>
#include <cmath>

#include "homtomo/measurement.hpp"
#include "homtomo/tomography.hpp"
#include "homtomo/twophoton.hpp"
#include "output.hpp"

namespace homtomo::cli {

namespace {

std::optional<TrialPlan> effective_plan(const Config& cfg, const RunOptions& opts) {
    std::optional<TrialPlan> plan = parse_trials(cfg);
    if (opts.exact) {
        return std::nullopt;
    }
    if (plan && opts.seed) {
        plan->seed = *opts.seed;
    }
    return plan;
}

Preamble preamble_for(const std::string& command, const Config& cfg, const std::optional<TrialPlan>& plan) {
    return Preamble{command, cfg.hash, plan ? std::optional<std::uint64_t>(plan->seed) : std::nullopt};
}

std::filesystem::path prepare_out_dir(const Config& cfg, const RunOptions& opts) {
    const std::filesystem::path dir = opts.out_dir ? *opts.out_dir : output_dir(cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw CliError("io", "cannot create output directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

}  // namespace

Written cmd_hom_scan(const Config& cfg, const RunOptions& opts) {
    const TimeGrid grid = parse_grid(cfg);
    const FilterOperator filter = parse_filter(cfg, grid);
    const DensityMatrix rho = parse_signal(cfg, grid, filter);
    std::vector<double> delays = schedule_range(cfg, "delays", std::nullopt);
    std::stable_sort(delays.begin(), delays.end());
    const auto plan = effective_plan(cfg, opts);

    Table table(preamble_for("hom-scan", cfg, plan), {"delay_s", "probability", "stderr"});
    const auto scan = hom_scan(rho, filter, delays);
    for (std::size_t i = 0; i < scan.size(); ++i) {
        double p = scan[i].probability;
        double err = 0.0;
        if (plan) {
            const RateEstimate est = sample_rate(p, *plan, i);
            p = est.rate;
            err = est.std_error;
        }
        table.add_row({format_number(scan[i].delay), format_number(p), format_number(err)});
    }
    const auto path = prepare_out_dir(cfg, opts) / "hom_scan.csv";
    table.write(path);
    return {path};
}

Written cmd_sigma_check(const Config& cfg, const RunOptions& opts) {
    const TimeGrid grid = parse_grid(cfg);
    const FilterOperator filter = parse_filter(cfg, grid);
    const std::vector<double> phis = schedule_range(cfg, "phis", std::vector<double>{});
    std::vector<double> grid_phis = phis;
    if (grid_phis.empty()) {
        for (int i = 0; i <= 40; ++i) {
            grid_phis.push_back(-pi * ((40.0 - i) / 40.0) + pi * (i / 40.0));
        }
    }
    const double t = schedule_number(cfg, "sigma_time", 0.0);

    Table table(preamble_for("sigma-check", cfg, std::nullopt), {"phi_rad", "sigma"});
    table.add_note("passband_rad_s: " + format_number(filter.passband_width()));
    table.add_note(std::string("transform_limited: ") + (filter.transform_limited() ? "true" : "false"));
    double lowest = 1.0;
    for (double phi : grid_phis) {
        const double s = sigma_overlap(filter, t, phi);
        lowest = std::min(lowest, s);
        table.add_row({format_number(phi), format_number(s)});
    }
    table.add_footer("min_sigma: " + format_number(lowest));
    const auto path = prepare_out_dir(cfg, opts) / "sigma.csv";
    table.write(path);
    return {path};
}

Written cmd_tomography(const Config& cfg, const RunOptions& opts) {
    const TimeGrid grid = parse_grid(cfg);
    const FilterOperator filter = parse_filter(cfg, grid);
    TomographySchedule schedule{schedule_range(cfg, "times", std::nullopt),
                                schedule_range(cfg, "phases", TomographySchedule::default_phases()), filter};
    schedule.validate();
    const bool deconvolve = tomography_flag(cfg, "deconvolve", true);
    const double clip = tomography_number(cfg, "clip_threshold", kDeconvolutionClip);
    const auto plan = effective_plan(cfg, opts);

    std::vector<RateRecord> records;
    std::optional<DensityMatrix> truth;
    if (const auto rates_file = tomography_path(cfg, "rates_file")) {
        records = read_rates(*rates_file);
    } else {
        truth = parse_signal(cfg, grid, filter);
        records = simulate_rates(*truth, schedule, plan);
    }
    const Reconstruction rec = reconstruct(records, schedule, deconvolve, clip);

    const Preamble pre = preamble_for("tomography", cfg, plan);
    const auto dir = prepare_out_dir(cfg, opts);
    Written written;
    written.push_back(dir / "rates.csv");
    write_rates(written.back(), pre, records);
    written.push_back(dir / "rho_filtered.txt");
    write_matrix(written.back(), pre, "filtered_density", rec.times, rec.filtered);
    if (rec.deconvolved) {
        written.push_back(dir / "rho_deconvolved.txt");
        write_matrix(written.back(), pre, "deconvolved_density_operator", grid.times(), rec.deconvolved->as_operator());
    }

    Table summary(pre, {"key", "value"});
    summary.add_row({"support_points", std::to_string(rec.times.size())});
    summary.add_row({"records", std::to_string(records.size())});
    summary.add_row({"filtered_negativity", format_number(rec.filtered_negativity)});
    summary.add_row({"negativity_mass", format_number(rec.negativity_mass)});
    summary.add_row({"unresolved_mass", format_number(rec.unresolved_mass)});
    summary.add_row({"max_redundancy_residual", format_number(rec.max_redundancy_residual)});
    summary.add_row({"inconsistent_records", std::to_string(rec.inconsistent_records)});
    if (truth) {
        const Matrix truth_filtered = filtered_density(*truth, filter, schedule.times);
        summary.add_row({"fidelity_filtered", format_number(fidelity(rec.filtered, truth_filtered))});
        if (rec.deconvolved) {
            summary.add_row({"fidelity_deconvolved", format_number(fidelity(*rec.deconvolved, *truth))});
        }
    }
    written.push_back(dir / "tomography_summary.csv");
    summary.write(written.back());
    return written;
}

Written cmd_entangle_scan(const Config& cfg, const RunOptions& opts) {
    const TimeGrid grid = parse_grid(cfg);
    const FilterOperator filter = parse_filter(cfg, grid);
    const BipartiteState state = parse_pair_signal(cfg, grid, filter);
    const std::vector<double> delta_ts = schedule_range(cfg, "delta_t", std::nullopt);
    const double t_base = schedule_number(cfg, "t_base", 0.0);
    const double k = schedule_number(cfg, "phase_grid", 4.0);
    if (k != std::floor(k) || k < 3.0) {
        throw CliError("config", "schedule.phase_grid must be an integer >= 3");
    }
    const auto plan = effective_plan(cfg, opts);

    PhaseGridOptions options;
    options.grid_size = static_cast<std::size_t>(k);
    if (plan) {
        const TrialPlan p = *plan;
        options.sampler = [p](double prob, std::uint64_t index) { return sample_rate(prob, p, index).rate; };
    }
    const TimescaleResult result = entanglement_timescale(state, filter, t_base, delta_ts, options);

    Table table(preamble_for("entangle-scan", cfg, plan),
                {"delta_t_s", "coherence_re", "coherence_im", "coherence_abs", "witness", "margin"});
    table.add_note("coherence: two-photon coherence normalized by the four subspace populations");
    table.add_note("level_3_8: " + format_number(kTimescaleLevel));
    for (const TimescaleRow& row : result.rows) {
        if (row.degenerate) {
            table.add_note("delta_t = 0 is the degenerate limit: the four subspace states coincide and the "
                           "coherence is 1/4 by construction");
        }
        const complex c = row.coherence.normalized;
        table.add_row({format_number(row.delta_t), format_number(c.real()), format_number(c.imag()),
                       format_number(std::abs(c)), row.witness.entangled ? "1" : "0",
                       format_number(row.witness.margin)});
    }
    table.add_footer("min_abs: " + format_number(result.min_abs));
    table.add_footer("max_abs: " + format_number(result.max_abs));
    table.add_footer("crossing_s: " + (result.crossing ? format_number(*result.crossing) : std::string("none")));
    const auto path = prepare_out_dir(cfg, opts) / "entangle_scan.csv";
    table.write(path);
    return {path};
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"hom-scan", "tomography", "entangle-scan", "sigma-check"};
    return names;
}

Written run_command(const std::string& name, const Config& cfg, const RunOptions& opts) {
    if (name == "hom-scan") {
        return cmd_hom_scan(cfg, opts);
    }
    if (name == "tomography") {
        return cmd_tomography(cfg, opts);
    }
    if (name == "entangle-scan") {
        return cmd_entangle_scan(cfg, opts);
    }
    if (name == "sigma-check") {
        return cmd_sigma_check(cfg, opts);
    }
    throw CliError("usage", "unknown command '" + name + "'");
}

}  // namespace homtomo::cli
