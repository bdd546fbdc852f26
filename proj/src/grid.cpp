#include "homtomo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace homtomo {

namespace {

constexpr double kTraceTol = 1e-9;
constexpr double kHermitianTol = 1e-12;
constexpr double kPsdTol = 1e-9;
constexpr double kImagResidueTol = 1e-10;

// W^m = exp(2 pi i m / n) for m = 0..n-1.
std::vector<complex> roots_of_unity(std::size_t n) {
    std::vector<complex> w(n);
    for (std::size_t m = 0; m < n; ++m) {
        w[m] = std::polar(1.0, 2.0 * pi * static_cast<double>(m) / static_cast<double>(n));
    }
    return w;
}

std::size_t wrap_index(long long value, std::size_t n) {
    const auto nn = static_cast<long long>(n);
    long long r = value % nn;
    if (r < 0) {
        r += nn;
    }
    return static_cast<std::size_t>(r);
}

double hermitian_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const Matrix& m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (hermitian_defect(m) > kHermitianTol * scale) {
        std::ostringstream msg;
        msg << what << " is not Hermitian (defect " << hermitian_defect(m) << ")";
        fail(ErrorKind::not_hermitian, msg.str());
    }
}

}  // namespace

TimeGrid::TimeGrid(std::size_t n_points, double dt, double t_start, double omega0)
    : n_(n_points), dt_(dt), t_start_(t_start), omega0_(omega0) {
    require(n_points >= 2, ErrorKind::invalid_argument, "grid needs at least 2 points");
    require(std::isfinite(dt) && dt > 0.0, ErrorKind::invalid_argument, "grid spacing dt must be > 0");
    require(std::isfinite(t_start), ErrorKind::invalid_argument, "grid t_start must be finite");
    require(std::isfinite(omega0) && omega0 > 0.0, ErrorKind::invalid_argument, "carrier omega0 must be > 0");
    // The sampled band [omega0 - pi/dt, omega0 + pi/dt) must stay at positive frequency.
    require(2.0 * pi / dt < 2.0 * omega0, ErrorKind::invalid_argument,
            "band 2*pi/dt must be narrower than 2*omega0 (increase dt or omega0)");
}

TimeGrid TimeGrid::centered(std::size_t n_points, double dt, double omega0) {
    return TimeGrid(n_points, dt, -static_cast<double>(n_points / 2) * dt, omega0);
}

double TimeGrid::detuning(std::size_t k) const noexcept {
    const auto offset = static_cast<long long>(k) - static_cast<long long>(n_ / 2);
    return static_cast<double>(offset) * domega();
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        t[j] = time(j);
    }
    return t;
}

std::size_t TimeGrid::nearest_index(double t) const noexcept {
    const double x = std::round((t - t_start_) / dt_);
    if (x <= 0.0) {
        return 0;
    }
    return std::min(n_ - 1, static_cast<std::size_t>(x));
}

std::optional<std::size_t> TimeGrid::index_of(double t) const noexcept {
    const double x = (t - t_start_) / dt_;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 || r < 0.0 || r > static_cast<double>(n_ - 1)) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(r);
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
    require(a == b, ErrorKind::grid_mismatch, "operands live on different time grids");
}

// --- states -----------------------------------------------------------------

TemporalState::TemporalState(TimeGrid grid, Vector amp, Boundary boundary)
    : grid_(std::move(grid)), amp_(std::move(amp)), boundary_(boundary) {
    require(static_cast<std::size_t>(amp_.size()) == grid_.size(), ErrorKind::invalid_argument,
            "amplitude length does not match grid size");
}

TemporalState TemporalState::normalized(TimeGrid grid, Vector amp, Boundary boundary) {
    const double norm2 = amp.squaredNorm() * grid.dt();
    require(norm2 > 0.0 && std::isfinite(norm2), ErrorKind::invalid_argument, "cannot normalize a zero state");
    amp /= std::sqrt(norm2);
    return TemporalState(std::move(grid), std::move(amp), boundary);
}

double TemporalState::norm_squared() const { return amp_.squaredNorm() * grid_.dt(); }

bool TemporalState::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

Vector TemporalState::orthonormal_coords() const { return amp_ * std::sqrt(grid_.dt()); }

SpectralState::SpectralState(TimeGrid grid, Vector amp) : grid_(std::move(grid)), amp_(std::move(amp)) {
    require(static_cast<std::size_t>(amp_.size()) == grid_.size(), ErrorKind::invalid_argument,
            "spectral amplitude length does not match grid size");
}

double SpectralState::norm_squared() const { return amp_.squaredNorm() * grid_.domega(); }

// S_k = dt/sqrt(2 pi) * sum_j exp(i nu_k t_j) a_j with nu_k = w_k - omega0.
// nu_k t_j = nu_k t_start + 2 pi (k - n/2) j / n.
SpectralState to_frequency(const TemporalState& state) {
    const TimeGrid& g = state.grid();
    const std::size_t n = g.size();
    const auto w = roots_of_unity(n);
    const auto half = static_cast<long long>(n / 2);
    const double scale = g.dt() / std::sqrt(2.0 * pi);
    const Vector& a = state.amp();

    Vector out(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const long long kk = static_cast<long long>(k) - half;
        complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            acc += w[wrap_index(kk * static_cast<long long>(j), n)] * a(static_cast<Eigen::Index>(j));
        }
        out(static_cast<Eigen::Index>(k)) = scale * std::polar(1.0, g.detuning(k) * g.t_start()) * acc;
    }
    return SpectralState(g, std::move(out));
}

TemporalState to_time(const SpectralState& spec, Boundary boundary) {
    const TimeGrid& g = spec.grid();
    const std::size_t n = g.size();
    const auto w = roots_of_unity(n);
    const auto half = static_cast<long long>(n / 2);
    const double scale = g.domega() / std::sqrt(2.0 * pi);

    Vector phased(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        phased(static_cast<Eigen::Index>(k)) =
            std::polar(1.0, -g.detuning(k) * g.t_start()) * spec.amp()(static_cast<Eigen::Index>(k));
    }
    Vector out(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        complex acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const long long kk = static_cast<long long>(k) - half;
            acc += std::conj(w[wrap_index(kk * static_cast<long long>(j), n)]) * phased(static_cast<Eigen::Index>(k));
        }
        out(static_cast<Eigen::Index>(j)) = scale * acc;
    }
    return TemporalState(g, std::move(out), boundary);
}

complex inner(const TemporalState& a, const TemporalState& b) {
    require_same_grid(a.grid(), b.grid());
    return a.amp().dot(b.amp()) * a.grid().dt();
}

TemporalState time_eigenstate(const TimeGrid& grid, std::size_t j) {
    require(j < grid.size(), ErrorKind::invalid_argument, "time eigenstate index out of range");
    Vector amp = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    amp(static_cast<Eigen::Index>(j)) = std::polar(1.0 / grid.dt(), grid.omega0() * grid.time(j));
    return TemporalState(grid, std::move(amp), Boundary::periodic);
}

// --- density matrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(Trusted, TimeGrid grid, Matrix kernel) : grid_(std::move(grid)), kernel_(std::move(kernel)) {}

DensityMatrix::DensityMatrix(TimeGrid grid, Matrix kernel) : grid_(std::move(grid)), kernel_(std::move(kernel)) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    require(kernel_.rows() == n && kernel_.cols() == n, ErrorKind::invalid_argument,
            "density kernel shape does not match grid");
    const Matrix op = as_operator();
    const double defect = hermitian_defect(op);
    require(defect <= kHermitianTol * std::max(1.0, op.cwiseAbs().maxCoeff()), ErrorKind::not_hermitian,
            "density matrix is not Hermitian");
    const double trace = op.trace().real();
    require(std::abs(trace - 1.0) <= kTraceTol, ErrorKind::invalid_argument, "density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(op, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    require(ev.minCoeff() >= -kPsdTol * std::max(ev.maxCoeff(), 0.0), ErrorKind::invalid_argument,
            "density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const TemporalState& state) {
    require(state.is_normalized(), ErrorKind::invalid_argument, "pure density matrix needs a normalized state");
    Matrix kernel = state.amp() * state.amp().adjoint();
    return DensityMatrix(Trusted{}, state.grid(), std::move(kernel));
}

DensityMatrix DensityMatrix::mixture(const std::vector<std::pair<double, TemporalState>>& components) {
    require(!components.empty(), ErrorKind::invalid_argument, "empty mixture");
    const TimeGrid& grid = components.front().second.grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix kernel = Matrix::Zero(n, n);
    double total = 0.0;
    for (const auto& [weight, state] : components) {
        require_same_grid(grid, state.grid());
        require(weight > 0.0, ErrorKind::invalid_argument, "mixture weights must be positive");
        require(state.is_normalized(), ErrorKind::invalid_argument, "mixture components must be normalized");
        kernel += weight * state.amp() * state.amp().adjoint();
        total += weight;
    }
    require(std::abs(total - 1.0) <= kTraceTol, ErrorKind::invalid_argument, "mixture weights must sum to 1");
    return DensityMatrix(Trusted{}, grid, std::move(kernel));
}

DensityMatrix DensityMatrix::from_operator(const TimeGrid& grid, const Matrix& op) {
    return DensityMatrix(grid, op / grid.dt());
}

complex DensityMatrix::matrix_element(const TemporalState& a, const TemporalState& b) const {
    require_same_grid(grid_, a.grid());
    require_same_grid(grid_, b.grid());
    const double dt = grid_.dt();
    return a.amp().dot(kernel_ * b.amp()) * dt * dt;
}

// --- measurement operators ----------------------------------------------------

MeasurementOperator MeasurementOperator::from_kernel(TimeGrid grid, Matrix kernel, double offset) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    require(kernel.rows() == n && kernel.cols() == n, ErrorKind::invalid_argument,
            "operator kernel shape does not match grid");
    require_hermitian(kernel * grid.dt(), "measurement kernel");
    MeasurementOperator op(std::move(grid), offset);
    op.dense_ = std::move(kernel);
    return op;
}

MeasurementOperator MeasurementOperator::from_terms(TimeGrid grid, double offset, std::vector<RankOneTerm> terms) {
    for (const auto& term : terms) {
        require(static_cast<std::size_t>(term.vec.size()) == grid.size(), ErrorKind::invalid_argument,
                "rank-one term length does not match grid");
    }
    MeasurementOperator op(std::move(grid), offset);
    op.terms_ = std::move(terms);
    return op;
}

Matrix MeasurementOperator::kernel() const {
    if (dense_) {
        return *dense_;
    }
    const auto n = static_cast<Eigen::Index>(grid_.size());
    Matrix k = Matrix::Zero(n, n);
    for (const auto& term : terms_) {
        k.noalias() += term.weight * term.vec * term.vec.adjoint();
    }
    return k;
}

Matrix MeasurementOperator::apply(const Matrix& columns) const {
    Matrix out = offset_ * columns;
    const double dt = grid_.dt();
    if (dense_) {
        out.noalias() += (*dense_ * dt) * columns;
        return out;
    }
    for (const auto& term : terms_) {
        // weight |v><v| in orthonormal coordinates is weight * dt * v v^H.
        out.noalias() += (term.weight * dt) * term.vec * (term.vec.adjoint() * columns);
    }
    return out;
}

double expectation(const MeasurementOperator& op, const DensityMatrix& rho) {
    require_same_grid(op.grid(), rho.grid());
    const double dt = op.grid().dt();
    complex value{op.offset(), 0.0};
    if (op.is_factored()) {
        for (const auto& term : op.terms()) {
            value += term.weight * term.vec.dot(rho.kernel() * term.vec) * dt * dt;
        }
    } else {
        // sum_jk K_kj rho_jk = trace(K rho)
        value += (op.kernel().cwiseProduct(rho.kernel().transpose())).sum() * dt * dt;
    }
    if (std::abs(value.imag()) > kImagResidueTol) {
        std::ostringstream msg;
        msg << "expectation has imaginary residue " << value.imag();
        fail(ErrorKind::not_hermitian, msg.str());
    }
    return value.real();
}

double expectation(const MeasurementOperator& op, const TemporalState& psi) {
    require_same_grid(op.grid(), psi.grid());
    require(psi.is_normalized(), ErrorKind::invalid_argument, "expectation needs a normalized state");
    const double dt = op.grid().dt();
    complex value{op.offset(), 0.0};
    if (op.is_factored()) {
        for (const auto& term : op.terms()) {
            value += term.weight * std::norm(term.vec.dot(psi.amp()) * dt);
        }
    } else {
        value += psi.amp().dot(op.kernel() * psi.amp()) * dt * dt;
    }
    if (std::abs(value.imag()) > kImagResidueTol) {
        fail(ErrorKind::not_hermitian, "expectation has an imaginary residue");
    }
    return value.real();
}

}  // namespace homtomo
