#include "homtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace homtomo {

namespace {

constexpr double kRateTol = 1e-9;

double wrap_phase(double phi) {
    double r = std::fmod(phi, 2.0 * pi);
    if (r < 0.0) {
        r += 2.0 * pi;
    }
    return r;
}

bool same_phase(double a, double b) {
    const double d = std::abs(wrap_phase(a) - wrap_phase(b));
    return std::min(d, 2.0 * pi - d) < 1e-9;
}

bool same_time(double a, double b, double dt) { return std::abs(a - b) <= 1e-9 * dt; }

// Orthonormal-coordinate columns F|t_i>.
Matrix filtered_columns(const FilterOperator& filter, const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(filter.grid().size());
    Matrix cols(n, static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = filter.at_time(times[i]).orthonormal_coords();
    }
    return cols;
}

}  // namespace

void TomographySchedule::validate() const {
    require(!times.empty(), ErrorKind::invalid_argument, "tomography schedule has no support times");
    for (std::size_t i = 1; i < times.size(); ++i) {
        require(times[i] > times[i - 1], ErrorKind::invalid_argument, "schedule times must be strictly increasing");
    }
    for (double t : times) {
        require(filter.grid().contains(t), ErrorKind::invalid_argument, "schedule time outside the grid window");
    }
    if (times.size() > 1) {
        require(phases.size() >= 3, ErrorKind::invalid_argument, "coherence scans need at least 3 phases");
    }
    for (std::size_t i = 0; i < phases.size(); ++i) {
        for (std::size_t j = i + 1; j < phases.size(); ++j) {
            require(!same_phase(phases[i], phases[j]), ErrorKind::invalid_argument,
                    "schedule phases must be distinct modulo 2 pi");
        }
    }
}

std::vector<RateRecord> simulate_rates(const DensityMatrix& rho, const TomographySchedule& schedule,
                                       const std::optional<TrialPlan>& plan) {
    schedule.validate();
    require_same_grid(rho.grid(), schedule.filter.grid());
    std::vector<RateRecord> records;
    auto push = [&](SettingKind kind, double t1, double t2, double phi, double p) {
        RateRecord rec{kind, t1, t2, phi, p, 0.0};
        if (plan) {
            const RateEstimate est = sample_rate(p, *plan, records.size());
            rec.rate = est.rate;
            rec.std_error = est.std_error;
        }
        records.push_back(rec);
    };
    for (double t : schedule.times) {
        push(SettingKind::delay, t, 0.0, 0.0, expectation(delayed_operator(schedule.filter, t), rho));
    }
    for (std::size_t i = 0; i < schedule.times.size(); ++i) {
        for (std::size_t j = i + 1; j < schedule.times.size(); ++j) {
            for (double phi : schedule.phases) {
                const CoherenceSetting setting{schedule.times[i], schedule.times[j], phi};
                push(SettingKind::coherence, setting.t1, setting.t2, phi,
                     expectation(coherence_operator(schedule.filter, setting), rho));
            }
        }
    }
    return records;
}

DiagonalEstimate reconstruct_diagonal(const std::vector<RateRecord>& delay_records) {
    DiagonalEstimate out;
    for (const auto& rec : delay_records) {
        require(rec.kind == SettingKind::delay, ErrorKind::invalid_argument,
                "diagonal reconstruction takes single-pulse (delay) records");
        out.times.push_back(rec.t1);
        out.values.push_back(2.0 * (0.5 - rec.rate));
        out.std_errors.push_back(2.0 * rec.std_error);
        out.inconsistent.push_back(rec.rate > 0.5 + 3.0 * rec.std_error + kRateTol);
    }
    return out;
}

OffDiagonalEstimate reconstruct_offdiagonal(const std::vector<RateRecord>& pair_records,
                                            std::optional<std::pair<double, double>> diagonal_sum) {
    require(!pair_records.empty(), ErrorKind::invalid_argument, "no coherence records for pair");
    const double t1 = pair_records.front().t1;
    const double t2 = pair_records.front().t2;
    require(t1 < t2, ErrorKind::invalid_argument, "coherence records must have t1 < t2");
    std::vector<double> phases;
    for (const auto& rec : pair_records) {
        require(rec.kind == SettingKind::coherence, ErrorKind::invalid_argument,
                "off-diagonal reconstruction takes coherence records");
        require(rec.t1 == t1 && rec.t2 == t2, ErrorKind::invalid_argument, "records mix different time pairs");
        for (double seen : phases) {
            require(!same_phase(seen, rec.phi), ErrorKind::invalid_argument, "duplicate phase in coherence records");
        }
        phases.push_back(rec.phi);
    }
    require(phases.size() >= 3, ErrorKind::invalid_argument, "missing phase: need at least 3 phases per pair");

    // p(phi) = 1/2 - D/4 - 1/2 (Re cos phi - Im sin phi) = a + b cos phi + c sin phi.
    const auto m = static_cast<Eigen::Index>(pair_records.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd rates(m);
    Eigen::VectorXd variance(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& rec = pair_records[static_cast<std::size_t>(r)];
        design(r, 0) = 1.0;
        design(r, 1) = std::cos(rec.phi);
        design(r, 2) = std::sin(rec.phi);
        rates(r) = rec.rate;
        variance(r) = rec.std_error * rec.std_error;
    }
    const Eigen::MatrixXd normal = design.transpose() * design;
    Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    require(solver.info() == Eigen::Success && std::abs(normal.determinant()) > 1e-12, ErrorKind::invalid_argument,
            "phases do not determine the coherence");
    const Eigen::Vector3d params = solver.solve(design.transpose() * rates);
    const Eigen::MatrixXd pinv = solver.solve(design.transpose());
    const Eigen::MatrixXd cov = pinv * variance.asDiagonal() * pinv.transpose();

    OffDiagonalEstimate est;
    est.t1 = t1;
    est.t2 = t2;
    est.value = complex(-2.0 * params(1), 2.0 * params(2));
    est.population = 2.0 - 4.0 * params(0);
    est.std_error = 2.0 * std::sqrt(std::max(cov(1, 1), cov(2, 2)));

    // Redundancy check p(0) + p(pi) = p(pi/2) + p(3pi/2) when those phases are present.
    std::optional<double> standard[4];
    const double targets[4] = {0.0, pi, 0.5 * pi, 1.5 * pi};
    for (const auto& rec : pair_records) {
        for (int q = 0; q < 4; ++q) {
            if (same_phase(rec.phi, targets[q])) {
                standard[q] = rec.rate;
            }
        }
    }
    if (standard[0] && standard[1] && standard[2] && standard[3]) {
        est.redundancy_residual = *standard[0] + *standard[1] - *standard[2] - *standard[3];
    } else {
        const Eigen::VectorXd resid = rates - design * params;
        est.redundancy_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
    }

    if (diagonal_sum) {
        const double sigma_pop = 4.0 * std::sqrt(std::max(cov(0, 0), 0.0));
        const double combined = std::hypot(sigma_pop, diagonal_sum->second);
        if (std::abs(est.population - diagonal_sum->first) > 5.0 * combined + kRateTol) {
            std::ostringstream msg;
            msg << "coherence scan population " << est.population << " disagrees with diagonal scan "
                << diagonal_sum->first << " for pair (" << t1 << ", " << t2 << ")";
            fail(ErrorKind::inconsistent_data, msg.str());
        }
    }
    return est;
}

std::pair<Matrix, double> project_physical(const Matrix& hermitian) {
    const Matrix h = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    Eigen::VectorXd values = eig.eigenvalues();
    const double trace = values.sum();
    double negative = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values(i) < 0.0) {
            negative -= values(i);
            values(i) = 0.0;
        }
    }
    const double kept = values.sum();
    require(kept > 0.0, ErrorKind::inconsistent_data, "reconstruction has no positive weight (signal outside band?)");
    Matrix out = eig.eigenvectors() * (values / kept).asDiagonal() * eig.eigenvectors().adjoint();
    out = 0.5 * (out + out.adjoint());
    return {out, trace > 0.0 ? negative / trace : negative};
}

Reconstruction assemble_density(const TomographySchedule& schedule, const DiagonalEstimate& diagonal,
                                const std::vector<OffDiagonalEstimate>& offdiagonal, bool deconvolve,
                                double clip_threshold) {
    require(!schedule.times.empty(), ErrorKind::invalid_argument, "empty tomography schedule");
    const std::size_t m = schedule.times.size();
    const double dt = schedule.filter.grid().dt();
    require(diagonal.values.size() == m, ErrorKind::invalid_argument, "diagonal does not match schedule");

    Reconstruction out;
    out.times = schedule.times;
    out.filtered_raw = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        require(same_time(diagonal.times[i], schedule.times[i], dt), ErrorKind::invalid_argument,
                "diagonal times do not match schedule");
        out.filtered_raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diagonal.values[i];
        if (diagonal.inconsistent[i]) {
            ++out.inconsistent_records;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            auto it = std::find_if(offdiagonal.begin(), offdiagonal.end(), [&](const OffDiagonalEstimate& e) {
                return same_time(e.t1, schedule.times[i], dt) && same_time(e.t2, schedule.times[j], dt);
            });
            require(it != offdiagonal.end(), ErrorKind::invalid_argument, "schedule pair missing from coherence data");
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            out.filtered_raw(ii, jj) = it->value;
            out.filtered_raw(jj, ii) = std::conj(it->value);
            out.max_redundancy_residual = std::max(out.max_redundancy_residual, std::abs(it->redundancy_residual));
        }
    }
    out.filtered_raw = 0.5 * (out.filtered_raw + out.filtered_raw.adjoint()).eval();
    std::tie(out.filtered, out.filtered_negativity) = project_physical(out.filtered_raw);

    if (deconvolve) {
        // rho_F = A^H R A with A = [F|t_i>]; the least-squares R on span(A) is
        // A G^+ rho_F G^+ A^H with the Gram matrix G = A^H A.
        const Matrix cols = filtered_columns(schedule.filter, schedule.times);
        const Matrix gram = cols.adjoint() * cols;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (gram + gram.adjoint()));
        const Eigen::VectorXd& g = eig.eigenvalues();
        const double cutoff = clip_threshold * g.maxCoeff();
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(g.size());
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            if (g(k) > cutoff) {
                inv(k) = 1.0 / g(k);
            }
        }
        const Matrix gram_pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
        const Matrix lift = cols * gram_pinv;
        Matrix op = lift * out.filtered_raw * lift.adjoint();
        op = 0.5 * (op + op.adjoint()).eval();
        out.unresolved_mass = 1.0 - op.trace().real();
        auto [physical, negativity] = project_physical(op);
        out.negativity_mass = negativity;
        out.deconvolved = DensityMatrix::from_operator(schedule.filter.grid(), physical);
    } else {
        out.negativity_mass = out.filtered_negativity;
    }
    return out;
}

Reconstruction reconstruct(const std::vector<RateRecord>& records, const TomographySchedule& schedule,
                           bool deconvolve, double clip_threshold) {
    schedule.validate();
    const double dt = schedule.filter.grid().dt();
    std::vector<RateRecord> diag_records;
    for (double t : schedule.times) {
        auto it = std::find_if(records.begin(), records.end(), [&](const RateRecord& r) {
            return r.kind == SettingKind::delay && same_time(r.t1, t, dt);
        });
        require(it != records.end(), ErrorKind::invalid_argument, "missing single-pulse record for a schedule time");
        diag_records.push_back(*it);
    }
    const DiagonalEstimate diagonal = reconstruct_diagonal(diag_records);

    std::vector<OffDiagonalEstimate> pairs;
    for (std::size_t i = 0; i < schedule.times.size(); ++i) {
        for (std::size_t j = i + 1; j < schedule.times.size(); ++j) {
            std::vector<RateRecord> pair_records;
            for (const auto& r : records) {
                if (r.kind != SettingKind::coherence) {
                    continue;
                }
                const bool direct = same_time(r.t1, schedule.times[i], dt) && same_time(r.t2, schedule.times[j], dt);
                const bool swapped = same_time(r.t2, schedule.times[i], dt) && same_time(r.t1, schedule.times[j], dt);
                if (direct || swapped) {
                    RateRecord canonical = r;
                    canonical.t1 = schedule.times[i];
                    canonical.t2 = schedule.times[j];
                    canonical.phi = direct ? r.phi : -r.phi;
                    pair_records.push_back(canonical);
                }
            }
            require(!pair_records.empty(), ErrorKind::invalid_argument, "missing coherence records for a schedule pair");
            const double sum = diagonal.values[i] + diagonal.values[j];
            const double sum_err = std::hypot(diagonal.std_errors[i], diagonal.std_errors[j]);
            pairs.push_back(reconstruct_offdiagonal(pair_records, std::make_pair(sum, sum_err)));
        }
    }
    return assemble_density(schedule, diagonal, pairs, deconvolve, clip_threshold);
}

Matrix filtered_density(const DensityMatrix& rho, const FilterOperator& filter, const std::vector<double>& times) {
    require_same_grid(rho.grid(), filter.grid());
    const Matrix cols = filtered_columns(filter, times);
    return cols.adjoint() * rho.as_operator() * cols;
}

double fidelity(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols() && a.rows() == a.cols(), ErrorKind::invalid_argument,
            "fidelity operands differ in shape");
    Eigen::SelfAdjointEigenSolver<Matrix> ea(0.5 * (a + a.adjoint()));
    const Eigen::VectorXd root = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_a = ea.eigenvectors() * root.asDiagonal() * ea.eigenvectors().adjoint();
    const Matrix inner_m = sqrt_a * b * sqrt_a;
    Eigen::SelfAdjointEigenSolver<Matrix> em(0.5 * (inner_m + inner_m.adjoint()), Eigen::EigenvaluesOnly);
    // Round-off eigenvalues near zero would otherwise contribute sqrt(eps).
    const Eigen::VectorXd mu = em.eigenvalues();
    const double floor = 1e-12 * std::max(mu.maxCoeff(), 0.0);
    double root_trace = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (mu(i) > floor) {
            root_trace += std::sqrt(mu(i));
        }
    }
    const double norm = a.trace().real() * b.trace().real();
    require(norm > 0.0, ErrorKind::invalid_argument, "fidelity of a zero matrix");
    return std::clamp(root_trace * root_trace / norm, 0.0, 1.0);
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    require_same_grid(a.grid(), b.grid());
    return fidelity(a.as_operator(), b.as_operator());
}

}  // namespace homtomo
