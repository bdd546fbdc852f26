#pragma once

// Discrete time/frequency lattice and the state and operator types built on it.
//
// Amplitudes are envelopes relative to the carrier omega0: the physical field
// is env(t) * exp(-i omega0 t). The time-to-frequency map uses the convention
// <w|t> = exp(i w t) / sqrt(2 pi), restricted to the centered frequency band
//
//     w_k = omega0 + 2 pi (k - n/2) / (n dt),   k = 0 .. n-1
//
// and is unitary with respect to the quadrature weights dt (time) and
// dw = 2 pi / (n dt) (frequency). The grid is circular: shifts wrap around.

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "homtomo/error.hpp"

namespace homtomo {

using complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;

class TimeGrid {
public:
    TimeGrid(std::size_t n_points, double dt, double t_start, double omega0);

    /// Grid with t = 0 on sample n/2 (so pulses "at zero" sit mid-window).
    static TimeGrid centered(std::size_t n_points, double dt, double omega0);

    std::size_t size() const noexcept { return n_; }
    double dt() const noexcept { return dt_; }
    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_start_ + static_cast<double>(n_ - 1) * dt_; }
    double omega0() const noexcept { return omega0_; }
    double domega() const noexcept { return 2.0 * pi / (static_cast<double>(n_) * dt_); }
    /// Offset of frequency bin k from the carrier.
    double detuning(std::size_t k) const noexcept;
    double omega(std::size_t k) const noexcept { return omega0_ + detuning(k); }
    double time(std::size_t j) const noexcept { return t_start_ + static_cast<double>(j) * dt_; }
    std::vector<double> times() const;

    /// Index of the sample closest to t, clamped to the window.
    std::size_t nearest_index(double t) const noexcept;
    /// Exact sample index if t lies on the lattice (within 1e-9 dt).
    std::optional<std::size_t> index_of(double t) const noexcept;
    bool contains(double t) const noexcept { return t >= t_start_ - 0.5 * dt_ && t <= t_end() + 0.5 * dt_; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t n_;
    double dt_;
    double t_start_;
    double omega0_;
};

void require_same_grid(const TimeGrid& a, const TimeGrid& b);

/// How a state relates to the window edges.
/// windowed: sampled from a function with (almost) compact support; shifts
///           that push weight across the edge are rejected.
/// periodic: band-limited construction native to the circular grid.
enum class Boundary { windowed, periodic };

class TemporalState {
public:
    TemporalState(TimeGrid grid, Vector amp, Boundary boundary = Boundary::windowed);

    /// Rescales amp to unit norm.
    static TemporalState normalized(TimeGrid grid, Vector amp, Boundary boundary = Boundary::windowed);

    const TimeGrid& grid() const noexcept { return grid_; }
    const Vector& amp() const noexcept { return amp_; }
    Boundary boundary() const noexcept { return boundary_; }

    double norm_squared() const;
    bool is_normalized(double tol = 1e-9) const;
    /// amp * sqrt(dt): coordinates in which the inner product is Euclidean.
    Vector orthonormal_coords() const;

private:
    TimeGrid grid_;
    Vector amp_;
    Boundary boundary_;
};

class SpectralState {
public:
    SpectralState(TimeGrid grid, Vector amp);

    const TimeGrid& grid() const noexcept { return grid_; }
    /// amp(k) = <w_k|state>.
    const Vector& amp() const noexcept { return amp_; }
    double norm_squared() const;

private:
    TimeGrid grid_;
    Vector amp_;
};

SpectralState to_frequency(const TemporalState& state);
TemporalState to_time(const SpectralState& spec, Boundary boundary = Boundary::windowed);

/// sum_j conj(a_j) b_j dt.
complex inner(const TemporalState& a, const TemporalState& b);

/// Ideal time eigenstate |t_j>: modulus 1/dt at sample j, carrying the
/// carrier phase exp(i omega0 t_j) so that inner(delta_j, psi) is the full-field
/// amplitude psi(t_j). Not normalizable: inner(delta_j, delta_j) = 1/dt.
TemporalState time_eigenstate(const TimeGrid& grid, std::size_t j);

/// Single-photon density matrix; kernel(j, k) = rho(t_j, t_k).
class DensityMatrix {
public:
    /// Validates Hermiticity, unit trace and positivity.
    DensityMatrix(TimeGrid grid, Matrix kernel);

    static DensityMatrix pure(const TemporalState& state);
    /// Convex combination of pure states; weights must be positive and sum to 1.
    static DensityMatrix mixture(const std::vector<std::pair<double, TemporalState>>& components);
    /// From an operator in orthonormal coordinates (kernel = op / dt), validated.
    static DensityMatrix from_operator(const TimeGrid& grid, const Matrix& op);

    const TimeGrid& grid() const noexcept { return grid_; }
    const Matrix& kernel() const noexcept { return kernel_; }
    /// kernel * dt: trace-one positive operator in orthonormal coordinates.
    Matrix as_operator() const { return kernel_ * grid_.dt(); }
    /// <a|rho|b> for (possibly unnormalized) states a, b.
    complex matrix_element(const TemporalState& a, const TemporalState& b) const;

private:
    struct Trusted {};
    DensityMatrix(Trusted, TimeGrid grid, Matrix kernel);

    TimeGrid grid_;
    Matrix kernel_;
};

/// weight * |vec><vec| with vec in amplitude units.
struct RankOneTerm {
    double weight;
    Vector vec;
};

/// Bunching observable: offset * identity + kernel (kernel entries in the
/// same delta convention as DensityMatrix, so rank-one pieces carry dt^2).
class MeasurementOperator {
public:
    /// Dense kernel; rejected if not Hermitian within 1e-12 (relative to its scale).
    static MeasurementOperator from_kernel(TimeGrid grid, Matrix kernel, double offset);
    static MeasurementOperator from_terms(TimeGrid grid, double offset, std::vector<RankOneTerm> terms);

    const TimeGrid& grid() const noexcept { return grid_; }
    double offset() const noexcept { return offset_; }
    Matrix kernel() const;
    bool is_factored() const noexcept { return !dense_.has_value(); }
    const std::vector<RankOneTerm>& terms() const noexcept { return terms_; }
    /// kernel * dt: the non-identity part in orthonormal coordinates.
    Matrix as_operator() const { return kernel() * grid_.dt(); }
    /// Apply (offset + kernel) to orthonormal-coordinate columns.
    Matrix apply(const Matrix& columns) const;

private:
    MeasurementOperator(TimeGrid grid, double offset) : grid_(std::move(grid)), offset_(offset) {}

    TimeGrid grid_;
    double offset_;
    std::optional<Matrix> dense_;
    std::vector<RankOneTerm> terms_;
};

/// Tr(rho M) = offset + sum_jk kernel_kj rho_jk dt^2.
double expectation(const MeasurementOperator& op, const DensityMatrix& rho);
/// <psi|M|psi> for a normalized pure state.
double expectation(const MeasurementOperator& op, const TemporalState& psi);

}  // namespace homtomo
