#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "homtomo/reference.hpp"
#include "test_support.hpp"

using namespace homtomo;
using homtomo::testing::gaussian;
using homtomo::testing::kDt;
using homtomo::testing::kOmega0;
using homtomo::testing::standard_grid;

namespace {

TemporalState rect_pulse(const TimeGrid& g, double delta_omega, double peak = 0.0) {
    return make_pulse(g, ReferenceSpec{RectSpectrumShape{delta_omega}, peak, 0.0});
}

double ortho_distance(const TemporalState& a, const TemporalState& b) {
    return (a.amp() - b.amp()).norm() * std::sqrt(a.grid().dt());
}

// sum_{m=-h}^{h} exp(-i m x), the discrete counterpart of sinc.
double dirichlet(int half_bins, double x) {
    const double m = 2.0 * half_bins + 1.0;
    if (std::abs(std::sin(0.5 * x)) < 1e-15) {
        return m;
    }
    return std::sin(0.5 * m * x) / std::sin(0.5 * x);
}

// Independent evaluation of the normalized overlap for a flat band of
// `bins` bins: |sum_k exp(i nu_k s)|^2 / bins^2.
double rect_sigma_oracle(int bins, double domega, double s) {
    const double d = dirichlet((bins - 1) / 2, domega * s);
    return d * d / (static_cast<double>(bins) * bins);
}

// sigma at phi = pi for a 0.2 omega0 flat band on the 256-point standard grid (39 bins).
constexpr double kRectSigmaRegression = 0.96636985697936;

}  // namespace

TEST(MakePulse, RectEnvelopeIsDirichletKernel) {
    const TimeGrid g = standard_grid(256);
    const double delta = 7.0 * g.domega();
    const TemporalState p = rect_pulse(g, delta);
    const double scale = p.amp()(128).real() / 7.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double expected = scale * dirichlet(3, g.domega() * g.time(j));
        EXPECT_NEAR(p.amp()(static_cast<Eigen::Index>(j)).real(), expected, 1e-10 * std::abs(scale) * 7.0);
        EXPECT_NEAR(p.amp()(static_cast<Eigen::Index>(j)).imag(), 0.0, 1e-10 * std::abs(scale) * 7.0);
    }
    EXPECT_GT(scale, 0.0);
}

TEST(MakePulse, GaussianPeakAtNearestSample) {
    const TimeGrid g = standard_grid(256);
    for (double t0 : {0.0, 13.3e-15, -41.9e-15}) {
        const TemporalState p = gaussian(g, 9e-15, t0);
        Eigen::Index peak = 0;
        p.amp().cwiseAbs().maxCoeff(&peak);
        EXPECT_EQ(static_cast<std::size_t>(peak), g.nearest_index(t0));
    }
}

TEST(MakePulse, UnitNormProperty) {
    const TimeGrid g = standard_grid(256);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> tau(3e-15, 30e-15);
    std::uniform_real_distribution<double> peak(-60e-15, 60e-15);
    std::uniform_real_distribution<double> band(0.02, 0.4);
    for (int i = 0; i < 50; ++i) {
        EXPECT_NEAR(gaussian(g, tau(rng), peak(rng)).norm_squared(), 1.0, 1e-9);
        EXPECT_NEAR(rect_pulse(g, band(rng) * kOmega0, peak(rng)).norm_squared(), 1.0, 1e-9);
    }
}

TEST(MakePulse, LeakageGuard) {
    const TimeGrid g = standard_grid(64);
    try {
        gaussian(g, 40e-15);
        FAIL() << "expected leakage error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::leakage);
    }
    // Under-resolved: spectrum wider than the grid band.
    EXPECT_THROW(gaussian(g, 0.4e-15), Error);
    EXPECT_THROW(gaussian(g, 5e-15, 1e-12), Error);
    EXPECT_THROW(rect_pulse(g, -1.0), Error);
}

TEST(TimeShift, ZeroAndGroupProperty) {
    const TimeGrid g = standard_grid(256);
    const TemporalState p = gaussian(g, 10e-15);
    EXPECT_EQ(ortho_distance(time_shift(p, 0.0), p), 0.0);
    const double a = 7.3e-15;
    const double b = -19.1e-15;
    EXPECT_LT(ortho_distance(time_shift(time_shift(p, a), b), time_shift(p, a + b)), 1e-10);
}

TEST(TimeShift, FractionalShiftMatchesClosedForm) {
    const TimeGrid g = standard_grid(256);
    const double tau = 10e-15;
    const double d = 3.5 * kDt;
    const TemporalState shifted = time_shift(gaussian(g, tau), d);
    // Direct sampling of the delayed envelope with its carrier phase.
    Vector expected(256);
    for (std::size_t j = 0; j < 256; ++j) {
        const double x = g.time(j) - d;
        expected(static_cast<Eigen::Index>(j)) = std::polar(std::exp(-x * x / (4 * tau * tau)), kOmega0 * d);
    }
    const TemporalState oracle = TemporalState::normalized(g, expected);
    EXPECT_LT(ortho_distance(shifted, oracle), 1e-9);

    Eigen::Index peak = 0;
    shifted.amp().cwiseAbs().maxCoeff(&peak);
    const double t_peak = g.time(static_cast<std::size_t>(peak));
    EXPECT_TRUE(std::abs(t_peak - d) <= 0.5 * kDt + 1e-20);
}

TEST(TimeShift, IntegerShiftEqualsResampling) {
    const TimeGrid g = standard_grid(256);
    const TemporalState p = gaussian(g, 8e-15);
    for (int m : {-9, 1, 4, 17}) {
        const TemporalState shifted = time_shift(p, m * kDt);
        const TemporalState resampled = gaussian(g, 8e-15, m * kDt);
        EXPECT_LT(ortho_distance(shifted, resampled), 1e-9) << m;
    }
}

TEST(TimeShift, WindowedStateRejectsWrap) {
    const TimeGrid g = standard_grid(128);
    const TemporalState p = gaussian(g, 8e-15);
    try {
        time_shift(p, 120e-15);
        FAIL() << "expected leakage error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::leakage);
    }
    // Periodic states wrap freely.
    const TemporalState r = rect_pulse(g, 0.2 * kOmega0);
    EXPECT_NEAR(time_shift(r, 120e-15).norm_squared(), 1.0, 1e-12);
}

TEST(Filter, ReproducesPulseFromTimeEigenstates) {
    const TimeGrid g = standard_grid(128);
    const TemporalState p = gaussian(g, 6e-15);
    const FilterOperator f = filter_from_pulse(p);
    EXPECT_TRUE(f.transform_limited());
    EXPECT_LT(ortho_distance(f.apply(time_eigenstate(g, 64)), p), 1e-10);
    for (std::size_t j = 40; j <= 88; j += 3) {
        const TemporalState via_filter = f.apply(time_eigenstate(g, j));
        EXPECT_LT(ortho_distance(via_filter, time_shift(p, g.time(j))), 1e-10) << j;
        EXPECT_LT(ortho_distance(via_filter, f.at_time(g.time(j))), 1e-10) << j;
    }
}

TEST(Filter, RectEigenvaluesAndInverseGain) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(rect_pulse(g, 0.2 * kOmega0));
    std::size_t bins = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::abs(g.detuning(k)) <= 0.1 * kOmega0) {
            ++bins;
        }
    }
    const double gain = 2.0 * pi / (static_cast<double>(bins) * g.domega());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const complex e = f.eigenvalues()(static_cast<Eigen::Index>(k));
        if (std::abs(g.detuning(k)) <= 0.1 * kOmega0) {
            EXPECT_NEAR(std::norm(e), gain, 1e-10 * gain);
        } else {
            EXPECT_LT(std::abs(e), 1e-12 * std::sqrt(gain));
        }
    }
    EXPECT_NEAR(f.passband_width(), bins * g.domega(), 1e-6);

    std::mt19937_64 rng(4);
    const TemporalState psi = homtomo::testing::random_in_band_state(rng, g, 0.1 * kOmega0);
    const TemporalState ff = f.apply_adjoint(f.apply(psi));
    EXPECT_LT((ff.amp() - gain * psi.amp()).norm() * std::sqrt(kDt), 1e-10 * gain);
}

TEST(Filter, DiagonalInFrequency) {
    const TimeGrid g = standard_grid(64);
    const FilterOperator f = filter_from_pulse(gaussian(g, 5e-15));
    for (std::size_t k : {0u, 20u, 32u, 50u}) {
        Vector spec = Vector::Zero(64);
        spec(static_cast<Eigen::Index>(k)) = 1.0;
        const SpectralState out = to_frequency(f.apply(to_time(SpectralState(g, spec), Boundary::periodic)));
        for (Eigen::Index m = 0; m < 64; ++m) {
            const complex expected = m == static_cast<Eigen::Index>(k) ? f.eigenvalues()(m) : complex(0.0);
            EXPECT_LT(std::abs(out.amp()(m) - expected), 1e-12 * std::abs(f.eigenvalues()(32)));
        }
    }
}

TEST(Filter, SelfAdjointForTransformLimited) {
    const TimeGrid g = standard_grid(64);
    const FilterOperator f = filter_from_pulse(gaussian(g, 5e-15));
    std::mt19937_64 rng(8);
    const TemporalState psi = homtomo::testing::random_state(rng, g);
    EXPECT_LT((f.apply(psi).amp() - f.apply_adjoint(psi).amp()).norm() * std::sqrt(kDt),
              1e-12 * f.eigenvalues().cwiseAbs().maxCoeff());
}

TEST(Filter, RejectsOffCenterOrUnnormalizedPulse) {
    const TimeGrid g = standard_grid(64);
    EXPECT_THROW(filter_from_pulse(gaussian(g, 5e-15, 6 * kDt)), Error);
    const TemporalState p = gaussian(g, 5e-15);
    EXPECT_THROW(filter_from_pulse(TemporalState(g, 2.0 * p.amp())), Error);
}

TEST(Filter, ChirpedPulseIsNotTransformLimited) {
    const TimeGrid g = standard_grid(128);
    Vector amp(128);
    for (std::size_t j = 0; j < 128; ++j) {
        const double t = g.time(j);
        amp(static_cast<Eigen::Index>(j)) = std::polar(std::exp(-t * t / (4 * 36e-30)), t * t * 1e28);
    }
    EXPECT_FALSE(filter_from_pulse(TemporalState::normalized(g, amp)).transform_limited());
}

TEST(Superposition, ModesAgreeAtZeroPhase) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(gaussian(g, 8e-15));
    const TemporalState a = superposition_reference(f, -30e-15, 40e-15, 0.0, PhaseMode::exact_phase);
    const TemporalState b = superposition_reference(f, -30e-15, 40e-15, 0.0, PhaseMode::subperiod_shift);
    EXPECT_LT(ortho_distance(a, b), 1e-12);
    EXPECT_THROW(superposition_reference(f, 10e-15, 10e-15, 0.3), Error);
}

TEST(Superposition, SeparatedBranchesShareNormEqually) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(gaussian(g, 6e-15));
    const TemporalState s = superposition_reference(f, -80e-15, 80e-15, 0.0);
    EXPECT_NEAR(std::norm(inner(f.at_time(-80e-15), s)), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(inner(f.at_time(80e-15), s)), 0.5, 1e-12);
}

TEST(Superposition, ExactPhaseConvention) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(gaussian(g, 6e-15));
    const double phi = 1.1;
    const TemporalState s = superposition_reference(f, -80e-15, 80e-15, phi, PhaseMode::exact_phase);
    const complex c1 = inner(f.at_time(-80e-15), s);
    const complex c2 = inner(f.at_time(80e-15), s);
    EXPECT_NEAR(std::arg(c2 / c1), phi, 1e-10);
}

TEST(Superposition, NarrowbandModeOverlap) {
    // Gaussian filter with spectral FWHM 0.05 omega0, phase pi.
    const TimeGrid g = standard_grid(512);
    const double tau = gaussian_tau_for_bandwidth(0.05 * kOmega0);
    const FilterOperator f = filter_from_pulse(gaussian(g, tau));
    const TemporalState exact = superposition_reference(f, -150e-15, 150e-15, pi, PhaseMode::exact_phase);
    const TemporalState shifted = superposition_reference(f, -150e-15, 150e-15, pi, PhaseMode::subperiod_shift);
    EXPECT_GE(std::norm(inner(exact, shifted)), 0.99);
}

TEST(Sigma, ZeroPhaseAndSymmetry) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(gaussian(g, 4e-15));
    EXPECT_EQ(sigma_overlap(f, 0.0, 0.0), 1.0);
    for (double phi : {0.3, 1.7, pi}) {
        const double s = sigma_overlap(f, 0.0, phi);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        EXPECT_NEAR(s, sigma_overlap(f, 0.0, -phi), 1e-14);
        EXPECT_NEAR(s, sigma_overlap(f, 30e-15, phi), 1e-14);
    }
}

TEST(Sigma, GaussianMatchesTimeDomainOverlap) {
    const TimeGrid g = standard_grid(512);
    for (double rel : {0.02, 0.05, 0.1}) {
        const double tau = gaussian_tau_for_bandwidth(rel * kOmega0);
        const FilterOperator f = filter_from_pulse(gaussian(g, tau));
        const double s = pi / kOmega0;
        // Time-domain quadrature of independently sampled pulses, and the continuum law.
        const double quadrature = std::norm(inner(gaussian(g, tau), gaussian(g, tau, s)));
        EXPECT_NEAR(sigma_overlap(f, 0.0, pi), quadrature, 1e-9);
        EXPECT_NEAR(sigma_overlap(f, 0.0, pi), std::exp(-s * s / (4 * tau * tau)), 1e-9);
    }
    // FWHM 0.05 omega0 at phi = pi.
    const FilterOperator f = filter_from_pulse(gaussian(g, gaussian_tau_for_bandwidth(0.05 * kOmega0)));
    EXPECT_NEAR(sigma_overlap(f, 0.0, pi), 0.99555, 5e-5);
}

TEST(Sigma, ApproachesOneForNarrowBands) {
    const TimeGrid g = standard_grid(1024);
    double previous = 0.0;
    for (double rel : {0.4, 0.2, 0.1, 0.05, 0.02}) {
        const FilterOperator f = filter_from_pulse(rect_pulse(g, rel * kOmega0));
        const double s = sigma_overlap(f, 0.0, pi);
        EXPECT_GT(s, previous);
        previous = s;
    }
    EXPECT_GT(previous, 0.999);
}

TEST(Sigma, RectFilterRegression) {
    const TimeGrid g = standard_grid(256);
    const FilterOperator f = filter_from_pulse(rect_pulse(g, 0.2 * kOmega0));
    const int bins = static_cast<int>(std::lround(f.passband_width() / g.domega()));
    const double sigma = sigma_overlap(f, 0.0, pi);
    EXPECT_NEAR(sigma, rect_sigma_oracle(bins, g.domega(), pi / kOmega0), 1e-12);
    // Continuum limit sinc^2(0.1 pi) = 0.9675.
    EXPECT_NEAR(sigma, 0.9675, 5e-3);
    EXPECT_NEAR(sigma, kRectSigmaRegression, 1e-9);
}
