#pragma once

// Reference pulses, delays and the bandwidth filter F that turns an ideal time
// eigenstate into the physical reference pulse: F|t> = |Phi(t)>.

#include <variant>

#include "homtomo/grid.hpp"

namespace homtomo {

/// Transform-limited Gaussian, envelope exp(-(t - t_peak)^2 / (4 tau^2)):
/// tau is the rms width of the intensity.
struct GaussianShape {
    double tau;
};

/// Flat spectrum over [omega0 - delta_omega/2, omega0 + delta_omega/2]. A bin
/// belongs to the band iff its center frequency does.
struct RectSpectrumShape {
    double delta_omega;
};

using PulseShape = std::variant<GaussianShape, RectSpectrumShape>;

struct ReferenceSpec {
    PulseShape shape;
    double peak_time = 0.0;
    double phase = 0.0;
};

/// Gaussian tau whose spectral intensity |f(w)|^2 has the given FWHM.
double gaussian_tau_for_bandwidth(double fwhm);

/// Maximum norm fraction allowed outside the window (or across its edge).
inline constexpr double kLeakageTolerance = 1e-3;

TemporalState make_pulse(const TimeGrid& grid, const ReferenceSpec& spec);

/// Delay by multiplying <w_k| by exp(i w_k delay); includes the carrier phase
/// exp(i omega0 delay). Works for any real delay. Windowed states are rejected
/// if more than kLeakageTolerance of the norm would wrap around the window.
TemporalState time_shift(const TemporalState& state, double delay);

/// Norm fraction that a delay would move across the window edge.
double wrap_fraction(const TemporalState& state, double delay);

class FilterOperator {
public:
    const TimeGrid& grid() const noexcept { return pulse_.grid(); }
    /// f(w_k) = sqrt(2 pi) <w_k|Phi(0)>.
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    /// The reference pulse at zero delay, Phi(0) = F|0>.
    const TemporalState& pulse() const noexcept { return pulse_; }
    /// Real, non-negative spectrum (F self-adjoint).
    bool transform_limited() const noexcept { return transform_limited_; }

    TemporalState apply(const TemporalState& state) const;
    TemporalState apply_adjoint(const TemporalState& state) const;
    /// F|t> for any t (not only grid samples): the reference delayed to t.
    TemporalState at_time(double t) const;
    /// dw times the number of bins with |f|^2 >= rel * max |f|^2.
    double passband_width(double rel = 0.5) const;

private:
    friend FilterOperator filter_from_pulse(const TemporalState& pulse_at_zero);
    FilterOperator(TemporalState pulse, Vector eigenvalues, bool transform_limited)
        : pulse_(std::move(pulse)), eigenvalues_(std::move(eigenvalues)), transform_limited_(transform_limited) {}

    TemporalState pulse_;
    Vector eigenvalues_;
    bool transform_limited_;
};

/// Requires a normalized pulse peaked at t = 0 (within one sample).
FilterOperator filter_from_pulse(const TemporalState& pulse_at_zero);

enum class PhaseMode {
    /// normalize(F|t1> + exp(i phi) F|t2>)
    exact_phase,
    /// normalize(F|t1> + F|t2 + phi/omega0>): phase from a sub-period delay.
    subperiod_shift,
};

TemporalState superposition_reference(const FilterOperator& filter, double t1, double t2, double phi,
                                      PhaseMode mode = PhaseMode::subperiod_shift);

/// Normalized overlap |<t|F^+F|t + phi/omega0>|^2 / (<t|F^+F|t> <t'|F^+F|t'>).
double sigma_overlap(const FilterOperator& filter, double t, double phi);

}  // namespace homtomo
