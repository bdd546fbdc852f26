#pragma once

// Photon pairs measured with one reference in each arm. The four-fold
// coincidence observable is M_A (x) M_B; its component oscillating with
// phi_A + phi_B isolates the two-photon coherence <t1A, t1B|rho|t2A, t2B>
// of the filtered state, which separable states keep at or below 1/4.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "homtomo/grid.hpp"
#include "homtomo/measurement.hpp"
#include "homtomo/reference.hpp"

namespace homtomo {

inline constexpr double kSeparableBound = 0.25;
inline constexpr double kMaximalCoherence = 0.5;
/// Halfway between the separable and the maximal coherence.
inline constexpr double kTimescaleLevel = 0.375;

/// Pure two-photon amplitude psi(t_A, t_B) (rows: arm A) with a mixture weight.
struct PairComponent {
    double weight;
    Matrix amp;
};

class BipartiteState {
public:
    /// Weights must be positive and sum to 1; each amp must satisfy
    /// sum |psi_jk|^2 dt^2 = 1.
    BipartiteState(TimeGrid grid, std::vector<PairComponent> ensemble);

    /// Normalizes amp.
    static BipartiteState pure(TimeGrid grid, Matrix amp);
    static BipartiteState product(const TemporalState& a, const TemporalState& b);
    static BipartiteState mixture(const std::vector<std::pair<double, BipartiteState>>& parts);

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<PairComponent>& ensemble() const noexcept { return ensemble_; }

private:
    TimeGrid grid_;
    std::vector<PairComponent> ensemble_;
};

/// psi(tA, tB) ~ exp(-(tA + tB - 2 center)^2 / (8 Tp^2) - (tA - tB)^2 / (8 Tc^2)).
/// Requires pump_duration >= correlation_time > 0; equality gives a product state.
BipartiteState pdc_model(const TimeGrid& grid, double pump_duration, double correlation_time, double center = 0.0);

enum class Arm { A, B };

/// Reduced single-photon state of one arm.
DensityMatrix reduced_density(const BipartiteState& state, Arm arm);

/// <M (x) 1> or <1 (x) M>: the two-fold coincidence probability in one arm.
double arm_probability(const BipartiteState& state, const MeasurementOperator& op, Arm arm);

/// <M_A (x) M_B>, applying each single-arm operator to the amplitude matrix.
double fourfold_probability(const BipartiteState& state, const MeasurementOperator& op_a,
                            const MeasurementOperator& op_b);

struct PairSetting {
    CoherenceSetting a;
    CoherenceSetting b;
};

double fourfold_probability(const BipartiteState& state, const FilterOperator& filter_a,
                            const FilterOperator& filter_b, const PairSetting& setting);

/// 4x4 projector on the product reference in the basis
/// {|t1A,t1B>, |t1A,t2B>, |t2A,t1B>, |t2A,t2B>}.
Eigen::Matrix4cd projector_matrix(double phi_a, double phi_b);

struct PairTimes {
    double t1a;
    double t2a;
    double t1b;
    double t2b;
};

/// Maps an exact probability to a measured rate; the index identifies the setting.
using RateSampler = std::function<double(double probability, std::uint64_t setting_index)>;

struct PhaseGridOptions {
    std::size_t grid_size = 4;
    double offset_a = 0.0;
    double offset_b = 0.0;
    RateSampler sampler;  // empty: exact probabilities
    std::uint64_t index_base = 0;
};

/// Fourier coefficient of exp(i(phi_A + phi_B)) over a K x K phase grid,
/// scaled to <F t1A, F t1B|rho|F t2A, F t2B>. Requires K >= 3 and t1 != t2 in each arm.
complex two_photon_coherence(const BipartiteState& state, const FilterOperator& filter_a,
                             const FilterOperator& filter_b, const PairTimes& times,
                             const PhaseGridOptions& options = {});

/// Filtered populations <F ta, F tb|rho|F ta, F tb> in projector_matrix basis order,
/// inferred from single-pulse four-fold and two-fold coincidence probabilities.
std::array<double, 4> subspace_populations(const BipartiteState& state, const FilterOperator& filter_a,
                                           const FilterOperator& filter_b, const PairTimes& times,
                                           const RateSampler& sampler = {}, std::uint64_t index_base = 0);

/// Direct 4x4 matrix <F a, F b|rho|F c, F d> in projector_matrix basis order.
Eigen::Matrix4cd filtered_subspace_density(const BipartiteState& state, const FilterOperator& filter_a,
                                           const FilterOperator& filter_b, const PairTimes& times);

struct CoherenceEstimate {
    complex raw;
    double population;  // sum of the four subspace populations
    complex normalized; // raw / population
};

CoherenceEstimate measure_coherence(const BipartiteState& state, const FilterOperator& filter_a,
                                    const FilterOperator& filter_b, const PairTimes& times,
                                    const PhaseGridOptions& options = {});

struct Witness {
    bool entangled;
    double margin;  // |coherence| - 1/4
    double phase;   // arg(coherence)
};

/// Strict inequality: |coherence| = 1/4 is not a violation.
Witness entanglement_witness(complex coherence);

struct TimescaleRow {
    double delta_t;
    CoherenceEstimate coherence;
    Witness witness;
    /// delta_t = 0: all four subspace states coincide and the normalized
    /// coherence is 1/4 by construction.
    bool degenerate;
};

struct TimescaleResult {
    std::vector<TimescaleRow> rows;
    std::optional<double> crossing;  // first delta_t where |C| crosses 3/8, linearly interpolated
    double min_abs;
    double max_abs;
};

/// Normalized coherence C(dt) at t1 = t_base, t2 = t_base + dt in both arms.
/// delta_ts must be non-negative and strictly increasing.
TimescaleResult entanglement_timescale(const BipartiteState& state, const FilterOperator& filter, double t_base,
                                       const std::vector<double>& delta_ts, const PhaseGridOptions& options = {});

}  // namespace homtomo
