#include "homtomo/twophoton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace homtomo {

namespace {

constexpr double kNormTol = 1e-9;

// Orthonormal-coordinate amplitude matrix: amp * dt has unit Frobenius norm.
Matrix pair_coords(const PairComponent& c, double dt) { return c.amp * dt; }

double sampled(const RateSampler& sampler, double p, std::uint64_t index) { return sampler ? sampler(p, index) : p; }

MeasurementOperator two_time_operator(const TimeGrid& grid, const Vector& g1, const Vector& g2, double phi) {
    return MeasurementOperator::from_terms(grid, 0.5, {RankOneTerm{-0.25, g1 + std::polar(1.0, phi) * g2}});
}

double gaussian_tail(double sigma, double lo, double hi) {
    const double s = std::sqrt(2.0) * sigma;
    return 0.5 * std::erfc(-lo / s) + 0.5 * std::erfc(hi / s);
}

}  // namespace

BipartiteState::BipartiteState(TimeGrid grid, std::vector<PairComponent> ensemble)
    : grid_(std::move(grid)), ensemble_(std::move(ensemble)) {
    require(!ensemble_.empty(), ErrorKind::invalid_argument, "bipartite ensemble is empty");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    const double dt = grid_.dt();
    double total = 0.0;
    for (const auto& c : ensemble_) {
        require(c.weight > 0.0, ErrorKind::invalid_argument, "ensemble weights must be positive");
        require(c.amp.rows() == n && c.amp.cols() == n, ErrorKind::invalid_argument,
                "pair amplitude shape does not match grid");
        require(std::abs(c.amp.squaredNorm() * dt * dt - 1.0) <= kNormTol, ErrorKind::invalid_argument,
                "pair amplitude is not normalized");
        total += c.weight;
    }
    require(std::abs(total - 1.0) <= kNormTol, ErrorKind::invalid_argument, "ensemble weights must sum to 1");
}

BipartiteState BipartiteState::pure(TimeGrid grid, Matrix amp) {
    const double norm2 = amp.squaredNorm() * grid.dt() * grid.dt();
    require(norm2 > 0.0 && std::isfinite(norm2), ErrorKind::invalid_argument, "cannot normalize a zero pair amplitude");
    amp /= std::sqrt(norm2);
    std::vector<PairComponent> ensemble;
    ensemble.push_back(PairComponent{1.0, std::move(amp)});
    return BipartiteState(std::move(grid), std::move(ensemble));
}

BipartiteState BipartiteState::product(const TemporalState& a, const TemporalState& b) {
    require_same_grid(a.grid(), b.grid());
    require(a.is_normalized() && b.is_normalized(), ErrorKind::invalid_argument, "product factors must be normalized");
    std::vector<PairComponent> ensemble;
    ensemble.push_back(PairComponent{1.0, a.amp() * b.amp().transpose()});
    return BipartiteState(a.grid(), std::move(ensemble));
}

BipartiteState BipartiteState::mixture(const std::vector<std::pair<double, BipartiteState>>& parts) {
    require(!parts.empty(), ErrorKind::invalid_argument, "empty mixture");
    std::vector<PairComponent> ensemble;
    for (const auto& [weight, part] : parts) {
        require_same_grid(parts.front().second.grid(), part.grid());
        require(weight > 0.0, ErrorKind::invalid_argument, "mixture weights must be positive");
        for (const auto& c : part.ensemble()) {
            ensemble.push_back(PairComponent{weight * c.weight, c.amp});
        }
    }
    return BipartiteState(parts.front().second.grid(), std::move(ensemble));
}

BipartiteState pdc_model(const TimeGrid& grid, double pump_duration, double correlation_time, double center) {
    require(correlation_time > 0.0 && pump_duration >= correlation_time, ErrorKind::invalid_argument,
            "pdc model needs pump_duration >= correlation_time > 0");
    // Arm marginals are Gaussian with intensity variance (Tp^2 + Tc^2) / 2.
    const double sigma = std::sqrt(0.5 * (pump_duration * pump_duration + correlation_time * correlation_time));
    const double lo = grid.t_start() - 0.5 * grid.dt() - center;
    const double hi = grid.t_end() + 0.5 * grid.dt() - center;
    const double leak = gaussian_tail(sigma, lo, hi);
    if (leak > kLeakageTolerance) {
        std::ostringstream msg;
        msg << "pdc state leaks " << leak << " of its norm outside the grid window";
        fail(ErrorKind::leakage, msg.str());
    }
    require(std::erfc(std::sqrt(2.0) * pi * correlation_time / grid.dt()) <= kLeakageTolerance, ErrorKind::leakage,
            "correlation time is not resolved by the grid");

    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix amp(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double ta = grid.time(static_cast<std::size_t>(j)) - center;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double tb = grid.time(static_cast<std::size_t>(k)) - center;
            const double s = ta + tb;
            const double d = ta - tb;
            amp(j, k) = std::exp(-s * s / (8.0 * pump_duration * pump_duration) -
                                 d * d / (8.0 * correlation_time * correlation_time));
        }
    }
    return BipartiteState::pure(grid, std::move(amp));
}

DensityMatrix reduced_density(const BipartiteState& state, Arm arm) {
    const double dt = state.grid().dt();
    const auto n = static_cast<Eigen::Index>(state.grid().size());
    Matrix op = Matrix::Zero(n, n);
    for (const auto& c : state.ensemble()) {
        const Matrix psi = pair_coords(c, dt);
        if (arm == Arm::A) {
            op.noalias() += c.weight * psi * psi.adjoint();
        } else {
            op.noalias() += c.weight * psi.transpose() * psi.conjugate();
        }
    }
    return DensityMatrix::from_operator(state.grid(), 0.5 * (op + op.adjoint()));
}

double arm_probability(const BipartiteState& state, const MeasurementOperator& op, Arm arm) {
    require_same_grid(state.grid(), op.grid());
    const double dt = state.grid().dt();
    complex total{0.0, 0.0};
    for (const auto& c : state.ensemble()) {
        const Matrix psi = arm == Arm::A ? pair_coords(c, dt) : Matrix(pair_coords(c, dt).transpose());
        total += c.weight * (psi.conjugate().cwiseProduct(op.apply(psi))).sum();
    }
    return total.real();
}

double fourfold_probability(const BipartiteState& state, const MeasurementOperator& op_a,
                            const MeasurementOperator& op_b) {
    require_same_grid(state.grid(), op_a.grid());
    require_same_grid(state.grid(), op_b.grid());
    const double dt = state.grid().dt();
    complex total{0.0, 0.0};
    for (const auto& c : state.ensemble()) {
        const Matrix psi = pair_coords(c, dt);
        // (A (x) B) psi = A psi B^T = (B (A psi)^T)^T.
        const Matrix left = op_a.apply(psi);
        const Matrix both_t = op_b.apply(left.transpose());
        total += c.weight * (psi.transpose().conjugate().cwiseProduct(both_t)).sum();
    }
    if (std::abs(total.imag()) > 1e-10) {
        fail(ErrorKind::not_hermitian, "four-fold expectation has an imaginary residue");
    }
    return total.real();
}

double fourfold_probability(const BipartiteState& state, const FilterOperator& filter_a,
                            const FilterOperator& filter_b, const PairSetting& setting) {
    return fourfold_probability(state, coherence_operator(filter_a, setting.a), coherence_operator(filter_b, setting.b));
}

Eigen::Matrix4cd projector_matrix(double phi_a, double phi_b) {
    Eigen::Vector4cd c;
    c << complex(1.0, 0.0), std::polar(1.0, phi_b), std::polar(1.0, phi_a), std::polar(1.0, phi_a + phi_b);
    return 0.25 * c * c.adjoint();
}

complex two_photon_coherence(const BipartiteState& state, const FilterOperator& filter_a,
                             const FilterOperator& filter_b, const PairTimes& times, const PhaseGridOptions& options) {
    require(options.grid_size >= 3, ErrorKind::invalid_argument,
            "phase grid needs K >= 3 to resolve the (1,1) Fourier component");
    require(times.t1a != times.t2a && times.t1b != times.t2b, ErrorKind::invalid_argument,
            "each arm needs two distinct reference times");
    require_same_grid(state.grid(), filter_a.grid());
    require_same_grid(state.grid(), filter_b.grid());
    const TimeGrid& grid = state.grid();
    const Vector g1a = filter_a.at_time(times.t1a).amp();
    const Vector g2a = filter_a.at_time(times.t2a).amp();
    const Vector g1b = filter_b.at_time(times.t1b).amp();
    const Vector g2b = filter_b.at_time(times.t2b).amp();

    const std::size_t k_size = options.grid_size;
    const double step = 2.0 * pi / static_cast<double>(k_size);
    std::vector<MeasurementOperator> ops_b;
    ops_b.reserve(k_size);
    for (std::size_t b = 0; b < k_size; ++b) {
        ops_b.push_back(two_time_operator(grid, g1b, g2b, options.offset_b + step * static_cast<double>(b)));
    }
    complex coeff{0.0, 0.0};
    for (std::size_t a = 0; a < k_size; ++a) {
        const double phi_a = options.offset_a + step * static_cast<double>(a);
        const MeasurementOperator op_a = two_time_operator(grid, g1a, g2a, phi_a);
        for (std::size_t b = 0; b < k_size; ++b) {
            const double phi_b = options.offset_b + step * static_cast<double>(b);
            const double p = sampled(options.sampler, fourfold_probability(state, op_a, ops_b[b]),
                                     options.index_base + a * k_size + b);
            coeff += p * std::polar(1.0, -(phi_a + phi_b));
        }
    }
    coeff /= static_cast<double>(k_size * k_size);
    // The correlation term (1/16) <v_A v_B|rho|v_A v_B> carries rho_F(11, 22) e^{i(phi_A + phi_B)}.
    return 16.0 * coeff;
}

std::array<double, 4> subspace_populations(const BipartiteState& state, const FilterOperator& filter_a,
                                           const FilterOperator& filter_b, const PairTimes& times,
                                           const RateSampler& sampler, std::uint64_t index_base) {
    const MeasurementOperator a_ops[2] = {delayed_operator(filter_a, times.t1a), delayed_operator(filter_a, times.t2a)};
    const MeasurementOperator b_ops[2] = {delayed_operator(filter_b, times.t1b), delayed_operator(filter_b, times.t2b)};
    // <G> = 1 - 2 P2 for the single-arm bunching probability P2.
    double g_a[2];
    double g_b[2];
    for (int i = 0; i < 2; ++i) {
        g_a[i] = 1.0 - 2.0 * sampled(sampler, arm_probability(state, a_ops[i], Arm::A), index_base + 4 + i);
        g_b[i] = 1.0 - 2.0 * sampled(sampler, arm_probability(state, b_ops[i], Arm::B), index_base + 6 + i);
    }
    std::array<double, 4> pops{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const auto idx = static_cast<std::uint64_t>(2 * i + j);
            const double p4 = sampled(sampler, fourfold_probability(state, a_ops[i], b_ops[j]), index_base + idx);
            // P4 = 1/4 - <G_A>/4 - <G_B>/4 + <G_A G_B>/4.
            pops[idx] = 4.0 * p4 - 1.0 + g_a[i] + g_b[j];
        }
    }
    return pops;
}

Eigen::Matrix4cd filtered_subspace_density(const BipartiteState& state, const FilterOperator& filter_a,
                                           const FilterOperator& filter_b, const PairTimes& times) {
    const Vector ga[2] = {filter_a.at_time(times.t1a).orthonormal_coords(),
                          filter_a.at_time(times.t2a).orthonormal_coords()};
    const Vector gb[2] = {filter_b.at_time(times.t1b).orthonormal_coords(),
                          filter_b.at_time(times.t2b).orthonormal_coords()};
    const double dt = state.grid().dt();
    Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
    for (const auto& c : state.ensemble()) {
        const Matrix psi = pair_coords(c, dt);
        Eigen::Vector4cd proj;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                proj(2 * i + j) = ga[i].dot(psi * gb[j].conjugate());
            }
        }
        out += c.weight * proj * proj.adjoint();
    }
    return out;
}

CoherenceEstimate measure_coherence(const BipartiteState& state, const FilterOperator& filter_a,
                                    const FilterOperator& filter_b, const PairTimes& times,
                                    const PhaseGridOptions& options) {
    CoherenceEstimate est{};
    est.raw = two_photon_coherence(state, filter_a, filter_b, times, options);
    const std::uint64_t k2 = options.grid_size * options.grid_size;
    const auto pops = subspace_populations(state, filter_a, filter_b, times, options.sampler, options.index_base + k2);
    est.population = pops[0] + pops[1] + pops[2] + pops[3];
    require(est.population > 0.0, ErrorKind::inconsistent_data, "no two-photon population at the selected times");
    est.normalized = est.raw / est.population;
    return est;
}

Witness entanglement_witness(complex coherence) {
    const double magnitude = std::abs(coherence);
    return Witness{magnitude > kSeparableBound, magnitude - kSeparableBound, std::arg(coherence)};
}

TimescaleResult entanglement_timescale(const BipartiteState& state, const FilterOperator& filter, double t_base,
                                       const std::vector<double>& delta_ts, const PhaseGridOptions& options) {
    require(!delta_ts.empty(), ErrorKind::invalid_argument, "empty delta-t scan");
    for (std::size_t i = 0; i < delta_ts.size(); ++i) {
        require(delta_ts[i] >= 0.0, ErrorKind::invalid_argument, "delta-t scan must be non-negative");
        require(i == 0 || delta_ts[i] > delta_ts[i - 1], ErrorKind::invalid_argument,
                "delta-t scan must be strictly increasing");
    }
    const std::uint64_t per_row = options.grid_size * options.grid_size + 8;
    TimescaleResult out{};
    out.min_abs = std::numeric_limits<double>::infinity();
    out.max_abs = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < delta_ts.size(); ++i) {
        const double dt_scan = delta_ts[i];
        const PairTimes times{t_base, t_base + dt_scan, t_base, t_base + dt_scan};
        PhaseGridOptions row_options = options;
        row_options.index_base = options.index_base + i * per_row;
        TimescaleRow row{};
        row.delta_t = dt_scan;
        row.degenerate = dt_scan == 0.0;
        if (row.degenerate) {
            // All four subspace states coincide: every element equals the population p.
            const auto pops = subspace_populations(state, filter, filter, times, options.sampler,
                                                   row_options.index_base + options.grid_size * options.grid_size);
            const double p = pops[0];
            require(p > 0.0, ErrorKind::inconsistent_data, "no two-photon population at t_base");
            row.coherence = CoherenceEstimate{complex(p, 0.0), 4.0 * p, complex(kSeparableBound, 0.0)};
        } else {
            row.coherence = measure_coherence(state, filter, filter, times, row_options);
        }
        row.witness = entanglement_witness(row.coherence.normalized);
        const double magnitude = std::abs(row.coherence.normalized);
        out.min_abs = std::min(out.min_abs, magnitude);
        out.max_abs = std::max(out.max_abs, magnitude);
        out.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < out.rows.size() && !out.crossing; ++i) {
        const double y0 = std::abs(out.rows[i].coherence.normalized) - kTimescaleLevel;
        const double y1 = std::abs(out.rows[i + 1].coherence.normalized) - kTimescaleLevel;
        if (y0 == 0.0) {
            out.crossing = out.rows[i].delta_t;
        } else if (y0 * y1 < 0.0 || y1 == 0.0) {
            const double x0 = out.rows[i].delta_t;
            const double x1 = out.rows[i + 1].delta_t;
            out.crossing = x0 + (x1 - x0) * y0 / (y0 - y1);
        }
    }
    return out;
}

}  // namespace homtomo
