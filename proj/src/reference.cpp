#include "homtomo/reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homtomo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Continuum intensity of a Gaussian envelope outside [lo, hi].
double gaussian_tail_mass(double center, double tau, double lo, double hi) {
    const double s = std::sqrt(2.0) * tau;
    return 0.5 * std::erfc((center - lo) / s) + 0.5 * std::erfc((hi - center) / s);
}

TemporalState make_gaussian(const TimeGrid& grid, const GaussianShape& shape, double peak, double phase) {
    require(shape.tau > 0.0 && std::isfinite(shape.tau), ErrorKind::invalid_argument, "gaussian tau must be > 0");
    const double lo = grid.t_start() - 0.5 * grid.dt();
    const double hi = grid.t_end() + 0.5 * grid.dt();
    const double outside = gaussian_tail_mass(peak, shape.tau, lo, hi);
    if (outside > kLeakageTolerance) {
        std::ostringstream msg;
        msg << "gaussian pulse leaks " << outside << " of its norm outside the grid window";
        fail(ErrorKind::leakage, msg.str());
    }
    // Spectral intensity exp(-2 nu^2 tau^2) beyond the Nyquist band aliases.
    const double aliased = std::erfc(std::sqrt(2.0) * pi * shape.tau / grid.dt());
    if (aliased > kLeakageTolerance) {
        std::ostringstream msg;
        msg << "gaussian pulse is under-resolved: " << aliased << " of its spectrum aliases";
        fail(ErrorKind::leakage, msg.str());
    }
    const complex carrier = std::polar(1.0, grid.omega0() * peak + phase);
    Vector amp(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.time(j) - peak;
        amp(static_cast<Eigen::Index>(j)) = carrier * std::exp(-x * x / (4.0 * shape.tau * shape.tau));
    }
    return TemporalState::normalized(grid, std::move(amp), Boundary::windowed);
}

TemporalState make_rect(const TimeGrid& grid, const RectSpectrumShape& shape, double peak, double phase) {
    require(shape.delta_omega > 0.0 && std::isfinite(shape.delta_omega), ErrorKind::invalid_argument,
            "rect bandwidth must be > 0");
    require(shape.delta_omega <= 2.0 * pi / grid.dt(), ErrorKind::invalid_argument,
            "rect bandwidth exceeds the grid band 2*pi/dt");
    const double half = 0.5 * shape.delta_omega * (1.0 + 1e-12);
    Vector spec = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    std::size_t bins = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(grid.detuning(k)) <= half) {
            spec(static_cast<Eigen::Index>(k)) = std::polar(1.0, grid.omega(k) * peak + phase);
            ++bins;
        }
    }
    require(bins > 0, ErrorKind::invalid_argument, "rect bandwidth is narrower than one frequency bin");
    spec /= std::sqrt(static_cast<double>(bins) * grid.domega());
    TemporalState pulse = to_time(SpectralState(grid, std::move(spec)), Boundary::periodic);
    return TemporalState::normalized(grid, pulse.amp(), Boundary::periodic);
}

}  // namespace

double gaussian_tau_for_bandwidth(double fwhm) {
    require(fwhm > 0.0, ErrorKind::invalid_argument, "bandwidth must be > 0");
    // |f|^2 ~ exp(-2 nu^2 tau^2): rms 1/(2 tau), FWHM = 2 sqrt(2 ln 2) / (2 tau).
    return std::sqrt(2.0 * std::log(2.0)) / fwhm;
}

TemporalState make_pulse(const TimeGrid& grid, const ReferenceSpec& spec) {
    require(std::isfinite(spec.peak_time) && grid.contains(spec.peak_time), ErrorKind::invalid_argument,
            "pulse peak time lies outside the grid window");
    return std::visit(overloaded{
                          [&](const GaussianShape& s) { return make_gaussian(grid, s, spec.peak_time, spec.phase); },
                          [&](const RectSpectrumShape& s) { return make_rect(grid, s, spec.peak_time, spec.phase); },
                      },
                      spec.shape);
}

double wrap_fraction(const TemporalState& state, double delay) {
    const TimeGrid& g = state.grid();
    const double lo = g.t_start() - 0.5 * g.dt();
    const double hi = g.t_end() + 0.5 * g.dt();
    double crossing = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = std::norm(state.amp()(static_cast<Eigen::Index>(j)));
        total += w;
        const double moved = g.time(j) + delay;
        if (moved < lo || moved > hi) {
            crossing += w;
        }
    }
    return total > 0.0 ? crossing / total : 0.0;
}

TemporalState time_shift(const TemporalState& state, double delay) {
    require(std::isfinite(delay), ErrorKind::invalid_argument, "delay must be finite");
    if (state.boundary() == Boundary::windowed) {
        const double leak = wrap_fraction(state, delay);
        if (leak > kLeakageTolerance) {
            std::ostringstream msg;
            msg << "delay " << delay << " s pushes " << leak << " of the norm across the window edge";
            fail(ErrorKind::leakage, msg.str());
        }
    }
    if (delay == 0.0) {
        return state;
    }
    SpectralState spec = to_frequency(state);
    Vector amp = spec.amp();
    const TimeGrid& g = state.grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
        amp(static_cast<Eigen::Index>(k)) *= std::polar(1.0, g.omega(k) * delay);
    }
    return to_time(SpectralState(g, std::move(amp)), state.boundary());
}

// --- filter -----------------------------------------------------------------

FilterOperator filter_from_pulse(const TemporalState& pulse_at_zero) {
    require(pulse_at_zero.is_normalized(), ErrorKind::invalid_argument, "reference pulse must be normalized");
    const TimeGrid& g = pulse_at_zero.grid();
    Eigen::Index peak = 0;
    pulse_at_zero.amp().cwiseAbs2().maxCoeff(&peak);
    require(std::abs(g.time(static_cast<std::size_t>(peak))) <= g.dt() * (1.0 + 1e-9), ErrorKind::invalid_argument,
            "filter pulse must peak at t = 0");

    Vector eig = to_frequency(pulse_at_zero).amp() * std::sqrt(2.0 * pi);
    const double scale = eig.cwiseAbs().maxCoeff();
    bool limited = true;
    for (Eigen::Index k = 0; k < eig.size(); ++k) {
        if (std::abs(eig(k).imag()) > 1e-9 * scale || eig(k).real() < -1e-9 * scale) {
            limited = false;
            break;
        }
    }
    if (limited) {
        // Snap round-off so that F = F^+ holds exactly.
        for (Eigen::Index k = 0; k < eig.size(); ++k) {
            eig(k) = complex(std::max(eig(k).real(), 0.0), 0.0);
        }
    }
    return FilterOperator(pulse_at_zero, std::move(eig), limited);
}

TemporalState FilterOperator::apply(const TemporalState& state) const {
    require_same_grid(grid(), state.grid());
    SpectralState spec = to_frequency(state);
    Vector amp = spec.amp().cwiseProduct(eigenvalues_);
    return to_time(SpectralState(grid(), std::move(amp)), Boundary::periodic);
}

TemporalState FilterOperator::apply_adjoint(const TemporalState& state) const {
    require_same_grid(grid(), state.grid());
    SpectralState spec = to_frequency(state);
    Vector amp = spec.amp().cwiseProduct(eigenvalues_.conjugate());
    return to_time(SpectralState(grid(), std::move(amp)), Boundary::periodic);
}

TemporalState FilterOperator::at_time(double t) const { return time_shift(pulse_, t); }

double FilterOperator::passband_width(double rel) const {
    const Eigen::VectorXd power = eigenvalues_.cwiseAbs2();
    const double threshold = rel * power.maxCoeff();
    const auto bins = (power.array() >= threshold).count();
    return static_cast<double>(bins) * grid().domega();
}

// --- superpositions -----------------------------------------------------------

TemporalState superposition_reference(const FilterOperator& filter, double t1, double t2, double phi, PhaseMode mode) {
    require(t1 != t2, ErrorKind::invalid_argument, "superposition reference needs two distinct times");
    const TemporalState first = filter.at_time(t1);
    Vector amp = first.amp();
    if (mode == PhaseMode::exact_phase) {
        amp += std::polar(1.0, phi) * filter.at_time(t2).amp();
    } else {
        amp += filter.at_time(t2 + phi / filter.grid().omega0()).amp();
    }
    return TemporalState::normalized(filter.grid(), std::move(amp), first.boundary());
}

double sigma_overlap(const FilterOperator& filter, double t, double phi) {
    require(filter.grid().contains(t), ErrorKind::invalid_argument, "sigma_overlap time lies outside the window");
    // <t|F^+F|t+s> = sum_k |f_k|^2 exp(i w_k s) dw / (2 pi); t and the carrier
    // phase drop out of the normalized modulus.
    const TimeGrid& g = filter.grid();
    const double s = phi / g.omega0();
    complex cross{0.0, 0.0};
    double diag = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double w = std::norm(filter.eigenvalues()(static_cast<Eigen::Index>(k)));
        cross += w * std::polar(1.0, g.detuning(k) * s);
        diag += w;
    }
    return std::norm(cross) / (diag * diag);
}

}  // namespace homtomo
