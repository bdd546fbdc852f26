#pragma once

// Temporal density-matrix reconstruction from bunching rates.
//
// Single-pulse scans give the filtered diagonal rho_F(t, t) = <t|F^+ rho F|t>;
// two-time references at several phases give the filtered coherences
// rho_F(t1, t2). Optionally the filter is inverted on the span of the
// filtered time eigenstates to recover rho on the grid.

#include <cstdint>
#include <optional>
#include <vector>

#include "homtomo/counts.hpp"
#include "homtomo/grid.hpp"
#include "homtomo/measurement.hpp"
#include "homtomo/reference.hpp"

namespace homtomo {

inline constexpr double kDeconvolutionClip = 1e-3;

struct TomographySchedule {
    std::vector<double> times;
    std::vector<double> phases;
    FilterOperator filter;

    static std::vector<double> default_phases() { return {0.0, 0.5 * pi, pi, 1.5 * pi}; }
    /// Throws on unordered times, fewer than 3 phases or phases equal modulo 2 pi.
    void validate() const;
};

enum class SettingKind { delay, coherence };

struct RateRecord {
    SettingKind kind;
    double t1;   // delay for SettingKind::delay
    double t2;   // unused for SettingKind::delay
    double phi;  // unused for SettingKind::delay
    double rate;
    double std_error;
};

/// Forward model: one delay record per scheduled time, then every pair i < j
/// at every phase. With a plan the exact probabilities are replaced by sampled
/// rates (setting index = record position).
std::vector<RateRecord> simulate_rates(const DensityMatrix& rho, const TomographySchedule& schedule,
                                       const std::optional<TrialPlan>& plan = std::nullopt);

struct DiagonalEstimate {
    std::vector<double> times;
    std::vector<double> values;      // rho_F(t, t) = 2 (1/2 - rate)
    std::vector<double> std_errors;  // 2 * rate std_error
    std::vector<bool> inconsistent;  // rate > 1/2 beyond 3 std_error
};

DiagonalEstimate reconstruct_diagonal(const std::vector<RateRecord>& delay_records);

struct OffDiagonalEstimate {
    double t1;
    double t2;
    complex value;              // rho_F(t1, t2)
    double population;          // fitted d1 + d2
    double redundancy_residual; // p(0) + p(pi) - p(pi/2) - p(3pi/2) for the standard phases, else fit rms
    double std_error;           // of Re and Im
};

/// Records must share (t1, t2) with t1 < t2 and hold at least 3 distinct phases.
/// When the diagonal pair (d1, d2) with its std error is supplied, a fitted
/// population off by more than 5 combined std errors is rejected.
OffDiagonalEstimate reconstruct_offdiagonal(const std::vector<RateRecord>& pair_records,
                                            std::optional<std::pair<double, double>> diagonal_sum = std::nullopt);

/// Projects onto the PSD cone by clipping negative eigenvalues and rescales to
/// unit trace. Returns the removed negative mass relative to the input trace.
std::pair<Matrix, double> project_physical(const Matrix& hermitian);

struct Reconstruction {
    std::vector<double> times;
    /// Hermitized rho_F on the support times, as measured.
    Matrix filtered_raw;
    /// filtered_raw clipped to PSD and scaled to unit trace.
    Matrix filtered;
    double filtered_negativity = 0.0;
    std::optional<DensityMatrix> deconvolved;
    double negativity_mass = 0.0;
    /// 1 - trace of the deconvolved operator before renormalization.
    double unresolved_mass = 0.0;
    double max_redundancy_residual = 0.0;
    std::size_t inconsistent_records = 0;
};

Reconstruction assemble_density(const TomographySchedule& schedule, const DiagonalEstimate& diagonal,
                                const std::vector<OffDiagonalEstimate>& offdiagonal, bool deconvolve,
                                double clip_threshold = kDeconvolutionClip);

/// Diagonal, pairs and assembly from a flat record list.
Reconstruction reconstruct(const std::vector<RateRecord>& records, const TomographySchedule& schedule,
                           bool deconvolve, double clip_threshold = kDeconvolutionClip);

/// <t_i|F^+ rho F|t_j> on the schedule times, computed directly.
Matrix filtered_density(const DensityMatrix& rho, const FilterOperator& filter, const std::vector<double>& times);

/// (tr sqrt(sqrt(a) b sqrt(a)))^2 for trace-normalized positive matrices.
double fidelity(const Matrix& a, const Matrix& b);
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace homtomo
