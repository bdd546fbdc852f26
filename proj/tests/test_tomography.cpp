#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "homtomo/tomography.hpp"
#include "test_support.hpp"

using namespace homtomo;
using homtomo::testing::gaussian;
using homtomo::testing::kDt;
using homtomo::testing::kOmega0;
using homtomo::testing::standard_grid;

namespace {

// Seven-bin flat band sampled at eight equally spaced times: the filtered
// time states form a tight frame of the band.
struct BandSetup {
    TimeGrid grid = standard_grid(256);
    FilterOperator filter =
        filter_from_pulse(make_pulse(grid, ReferenceSpec{RectSpectrumShape{7.0 * grid.domega()}, 0.0, 0.0}));
    double half_band = 3.5 * grid.domega();

    TomographySchedule schedule() const {
        std::vector<double> times;
        for (int i = 0; i < 8; ++i) {
            times.push_back((-112 + 32 * i) * kDt);
        }
        return TomographySchedule{times, TomographySchedule::default_phases(), filter};
    }
};

TomographySchedule gaussian_schedule(const TimeGrid& g, std::vector<double> times) {
    return TomographySchedule{std::move(times), TomographySchedule::default_phases(), filter_from_pulse(gaussian(g, 5e-15))};
}

std::vector<RateRecord> pair_records(const std::vector<RateRecord>& all, double t1, double t2) {
    std::vector<RateRecord> out;
    for (const auto& r : all) {
        if (r.kind == SettingKind::coherence && r.t1 == t1 && r.t2 == t2) {
            out.push_back(r);
        }
    }
    return out;
}

RateRecord delay_record(double t, double rate, double err = 0.0) {
    return RateRecord{SettingKind::delay, t, 0.0, 0.0, rate, err};
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

}  // namespace

TEST(Schedule, Validation) {
    const TimeGrid g = standard_grid(128);
    const FilterOperator f = filter_from_pulse(gaussian(g, 5e-15));
    EXPECT_NO_THROW((TomographySchedule{{-10e-15, 10e-15}, TomographySchedule::default_phases(), f}.validate()));
    EXPECT_THROW((TomographySchedule{{10e-15, -10e-15}, TomographySchedule::default_phases(), f}.validate()), Error);
    EXPECT_THROW((TomographySchedule{{}, TomographySchedule::default_phases(), f}.validate()), Error);
    EXPECT_THROW((TomographySchedule{{-10e-15, 10e-15}, {0.0, pi}, f}.validate()), Error);
    EXPECT_THROW((TomographySchedule{{-10e-15, 10e-15}, {0.0, pi, 2.0 * pi}, f}.validate()), Error);
}

TEST(Simulate, RecordLayoutAndDeterminism) {
    const TimeGrid g = standard_grid(128);
    const auto schedule = gaussian_schedule(g, {-30e-15, 0.0, 30e-15});
    const DensityMatrix rho = DensityMatrix::pure(gaussian(g, 10e-15));
    const auto exact = simulate_rates(rho, schedule);
    ASSERT_EQ(exact.size(), 3u + 3u * 4u);
    EXPECT_EQ(exact[2].kind, SettingKind::delay);
    EXPECT_EQ(exact[3].kind, SettingKind::coherence);
    EXPECT_EQ(exact[3].t1, -30e-15);
    EXPECT_EQ(exact[3].t2, 0.0);
    EXPECT_EQ(exact[4].phi, 0.5 * pi);
    EXPECT_EQ(exact.back().t1, 0.0);

    const auto a = simulate_rates(rho, schedule, TrialPlan{1000, 42});
    const auto b = simulate_rates(rho, schedule, TrialPlan{1000, 42});
    const auto c = simulate_rates(rho, schedule, TrialPlan{1000, 43});
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rate, b[i].rate);
        differs = differs || a[i].rate != c[i].rate;
    }
    EXPECT_TRUE(differs);
}

TEST(Diagonal, Examples) {
    const auto flat = reconstruct_diagonal({delay_record(0.0, 0.5), delay_record(1e-15, 0.5)});
    EXPECT_EQ(flat.values[0], 0.0);
    EXPECT_EQ(flat.values[1], 0.0);

    const auto peaked = reconstruct_diagonal({delay_record(-1e-15, 0.5), delay_record(0.0, 0.0), delay_record(1e-15, 0.5)});
    EXPECT_EQ(peaked.values[1], 1.0);
    EXPECT_EQ(peaked.values[0], 0.0);

    const auto flagged = reconstruct_diagonal({delay_record(0.0, 0.6, 0.01), delay_record(1e-15, 0.52, 0.01)});
    EXPECT_TRUE(flagged.inconsistent[0]);
    EXPECT_FALSE(flagged.inconsistent[1]);
    EXPECT_THROW(reconstruct_diagonal({RateRecord{SettingKind::coherence, 0.0, 1e-15, 0.0, 0.5, 0.0}}), Error);
}

TEST(Diagonal, NoiselessGaussianRoundTrip) {
    const TimeGrid g = standard_grid(256);
    std::vector<double> times;
    for (int i = -10; i <= 10; ++i) {
        times.push_back(i * 4e-15);
    }
    const auto schedule = gaussian_schedule(g, times);
    const DensityMatrix rho = DensityMatrix::pure(gaussian(g, 12e-15, 3e-15));
    std::vector<RateRecord> delays;
    for (const auto& r : simulate_rates(rho, schedule)) {
        if (r.kind == SettingKind::delay) {
            delays.push_back(r);
        }
    }
    const auto diag = reconstruct_diagonal(delays);
    const Matrix direct = filtered_density(rho, schedule.filter, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_NEAR(diag.values[i], direct(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real(), 1e-9);
    }
}

TEST(OffDiagonal, SingleBranchHasNoCoherence) {
    const TimeGrid g = standard_grid(256);
    const auto schedule = gaussian_schedule(g, {-60e-15, 60e-15});
    const auto records = simulate_rates(DensityMatrix::pure(schedule.filter.at_time(-60e-15)), schedule);
    const auto pair = pair_records(records, -60e-15, 60e-15);
    for (const auto& r : pair) {
        EXPECT_NEAR(r.rate, pair.front().rate, 1e-12);
    }
    const auto est = reconstruct_offdiagonal(pair);
    EXPECT_NEAR(std::abs(est.value), 0.0, 1e-12);
    EXPECT_NEAR(est.population, 1.0, 1e-12);
}

TEST(OffDiagonal, InPhaseSuperposition) {
    const TimeGrid g = standard_grid(256);
    const auto schedule = gaussian_schedule(g, {-60e-15, 60e-15});
    const Vector sum = schedule.filter.at_time(-60e-15).amp() + schedule.filter.at_time(60e-15).amp();
    const auto records = simulate_rates(DensityMatrix::pure(TemporalState::normalized(g, sum)), schedule);
    const auto pair = pair_records(records, -60e-15, 60e-15);
    EXPECT_NEAR(pair[0].rate, 0.0, 1e-12);
    const auto est = reconstruct_offdiagonal(pair);
    EXPECT_NEAR(est.value.real(), 0.5, 1e-12);
    EXPECT_NEAR(est.value.imag(), 0.0, 1e-12);
    EXPECT_NEAR(est.redundancy_residual, 0.0, 1e-12);
}

TEST(OffDiagonal, PhaseInversionMatchesForwardModel) {
    const TimeGrid g = standard_grid(128);
    const std::vector<double> times{-20e-15, 14e-15};
    const auto schedule = gaussian_schedule(g, times);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const DensityMatrix rho = DensityMatrix::pure(homtomo::testing::random_state(rng, g));
        const auto est = reconstruct_offdiagonal(pair_records(simulate_rates(rho, schedule), times[0], times[1]));
        const Matrix direct = filtered_density(rho, schedule.filter, times);
        EXPECT_LT(std::abs(est.value - direct(0, 1)), 1e-9);
        EXPECT_NEAR(est.population, (direct(0, 0) + direct(1, 1)).real(), 1e-9);
    }
}

TEST(OffDiagonal, ThreePhaseScheduleSuffices) {
    const TimeGrid g = standard_grid(128);
    const std::vector<double> times{-20e-15, 14e-15};
    auto schedule = gaussian_schedule(g, times);
    schedule.phases = {0.0, 2.0 * pi / 3.0, 4.0 * pi / 3.0};
    std::mt19937_64 rng(32);
    const DensityMatrix rho = DensityMatrix::pure(homtomo::testing::random_state(rng, g));
    const auto est = reconstruct_offdiagonal(pair_records(simulate_rates(rho, schedule), times[0], times[1]));
    EXPECT_LT(std::abs(est.value - filtered_density(rho, schedule.filter, times)(0, 1)), 1e-9);
}

TEST(OffDiagonal, Errors) {
    const auto rec = [](double phi, double rate) {
        return RateRecord{SettingKind::coherence, 0.0, 1e-15, phi, rate, 0.001};
    };
    EXPECT_THROW(reconstruct_offdiagonal({rec(0.0, 0.2), rec(pi, 0.3)}), Error);
    EXPECT_THROW(reconstruct_offdiagonal({rec(0.0, 0.2), rec(pi, 0.3), rec(2 * pi, 0.3)}), Error);
    // Fitted population 2 - 4 * 0.25 = 1 against a diagonal sum of 0.5.
    const std::vector<RateRecord> pair{rec(0.0, 0.25), rec(0.5 * pi, 0.25), rec(pi, 0.25), rec(1.5 * pi, 0.25)};
    try {
        reconstruct_offdiagonal(pair, std::make_pair(0.5, 0.002));
        FAIL() << "expected inconsistent data";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::inconsistent_data);
    }
    EXPECT_NO_THROW(reconstruct_offdiagonal(pair, std::make_pair(1.0, 0.002)));
}

TEST(Assemble, NoiselessInBandRoundTrip) {
    const BandSetup setup;
    const auto schedule = setup.schedule();
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 5; ++trial) {
        const TemporalState psi = homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band);
        const DensityMatrix rho = DensityMatrix::pure(psi);
        const Reconstruction rec = reconstruct(simulate_rates(rho, schedule), schedule, true);
        ASSERT_TRUE(rec.deconvolved.has_value());
        EXPECT_GE(fidelity(*rec.deconvolved, rho), 1.0 - 1e-6);
        EXPECT_NEAR(rec.unresolved_mass, 0.0, 1e-9);
        EXPECT_LT(rec.max_redundancy_residual, 1e-12);
    }
}

TEST(Assemble, MixedInBandRoundTrip) {
    const BandSetup setup;
    const auto schedule = setup.schedule();
    std::mt19937_64 rng(41);
    const DensityMatrix rho = DensityMatrix::mixture(
        {{0.6, homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band)},
         {0.4, homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band)}});
    const Reconstruction rec = reconstruct(simulate_rates(rho, schedule), schedule, true);
    EXPECT_GE(fidelity(*rec.deconvolved, rho), 1.0 - 1e-6);
    EXPECT_LT((rec.deconvolved->as_operator() - rho.as_operator()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Assemble, OutOfBandWeightIsUnresolved) {
    const BandSetup setup;
    const auto schedule = setup.schedule();
    std::mt19937_64 rng(42);
    const TemporalState in_band = homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band);
    Vector spec = homtomo::testing::random_vector(rng, setup.grid.size());
    for (std::size_t k = 0; k < setup.grid.size(); ++k) {
        if (std::abs(setup.grid.detuning(k)) <= setup.half_band * 1.01) {
            spec(static_cast<Eigen::Index>(k)) = 0.0;
        }
    }
    const TemporalState out_band = TemporalState::normalized(
        setup.grid, to_time(SpectralState(setup.grid, spec), Boundary::periodic).amp(), Boundary::periodic);
    const DensityMatrix rho = DensityMatrix::mixture({{0.7, in_band}, {0.3, out_band}});
    const Reconstruction rec = reconstruct(simulate_rates(rho, schedule), schedule, true);
    EXPECT_NEAR(rec.unresolved_mass, 0.3, 1e-9);
    EXPECT_GE(fidelity(*rec.deconvolved, DensityMatrix::pure(in_band)), 1.0 - 1e-6);
}

TEST(Assemble, MaximallyMixedTwoTimeState) {
    const TimeGrid g = standard_grid(256);
    const auto schedule = gaussian_schedule(g, {-60e-15, 60e-15});
    const DensityMatrix rho =
        DensityMatrix::mixture({{0.5, schedule.filter.at_time(-60e-15)}, {0.5, schedule.filter.at_time(60e-15)}});
    const Reconstruction rec = reconstruct(simulate_rates(rho, schedule), schedule, false);
    EXPECT_LT((rec.filtered - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rec.filtered_raw - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, SinglePointSchedule) {
    const TimeGrid g = standard_grid(128);
    const auto schedule = gaussian_schedule(g, {5e-15});
    const auto records = simulate_rates(DensityMatrix::pure(gaussian(g, 8e-15)), schedule);
    ASSERT_EQ(records.size(), 1u);
    const Reconstruction rec = reconstruct(records, schedule, false);
    ASSERT_EQ(rec.filtered.rows(), 1);
    EXPECT_NEAR(rec.filtered(0, 0).real(), 1.0, 1e-12);
}

TEST(Assemble, EmptyScheduleRejected) {
    const TimeGrid g = standard_grid(64);
    const auto schedule = gaussian_schedule(g, {});
    EXPECT_THROW(assemble_density(schedule, DiagonalEstimate{}, {}, false), Error);
}

TEST(Assemble, SwappedRecordsAccepted) {
    const TimeGrid g = standard_grid(128);
    const std::vector<double> times{-20e-15, 14e-15};
    const auto schedule = gaussian_schedule(g, times);
    std::mt19937_64 rng(44);
    const DensityMatrix rho = DensityMatrix::pure(homtomo::testing::random_state(rng, g));
    auto records = simulate_rates(rho, schedule);
    const Reconstruction direct = reconstruct(records, schedule, false);
    for (auto& r : records) {
        if (r.kind == SettingKind::coherence) {
            std::swap(r.t1, r.t2);
            r.phi = -r.phi;
        }
    }
    const Reconstruction swapped = reconstruct(records, schedule, false);
    EXPECT_LT((direct.filtered_raw - swapped.filtered_raw).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, NoisyOutputIsPhysical) {
    const BandSetup setup;
    const auto schedule = setup.schedule();
    std::mt19937_64 rng(45);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DensityMatrix rho =
            DensityMatrix::pure(homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band));
        const Reconstruction rec = reconstruct(simulate_rates(rho, schedule, TrialPlan{200, seed}), schedule, true);
        for (const Matrix& m : {rec.filtered, rec.deconvolved->as_operator()}) {
            EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_NEAR(m.trace().real(), 1.0, 1e-9);
            EXPECT_GE(min_eigenvalue(m), -1e-12);
        }
        EXPECT_GE(rec.negativity_mass, 0.0);
    }
}

TEST(Assemble, FidelityImprovesWithTrials) {
    const BandSetup setup;
    const auto schedule = setup.schedule();
    std::mt19937_64 rng(46);
    const DensityMatrix rho =
        DensityMatrix::pure(homtomo::testing::random_in_band_state(rng, setup.grid, setup.half_band));
    std::vector<double> mean_fidelity;
    for (std::uint64_t trials : {100u, 1000u, 10000u}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            const auto records = simulate_rates(rho, schedule, TrialPlan{trials, seed});
            total += fidelity(*reconstruct(records, schedule, true).deconvolved, rho);
        }
        mean_fidelity.push_back(total / 6.0);
    }
    EXPECT_GE(mean_fidelity[1], mean_fidelity[0] - 0.01);
    EXPECT_GE(mean_fidelity[2], mean_fidelity[1] - 0.01);
    EXPECT_GT(mean_fidelity[2], 0.9);
}

TEST(Fidelity, Examples) {
    const TimeGrid g = standard_grid(64);
    std::mt19937_64 rng(50);
    const TemporalState a = homtomo::testing::random_state(rng, g);
    Vector v = homtomo::testing::random_state(rng, g).amp();
    v -= inner(a, TemporalState(g, v)) * a.amp();
    const TemporalState b = TemporalState::normalized(g, v);
    const DensityMatrix pa = DensityMatrix::pure(a);
    const DensityMatrix pb = DensityMatrix::pure(b);
    const DensityMatrix mix = DensityMatrix::mixture({{0.5, a}, {0.5, b}});
    EXPECT_NEAR(fidelity(pa, pa), 1.0, 1e-9);
    EXPECT_NEAR(fidelity(mix, mix), 1.0, 1e-9);
    EXPECT_NEAR(fidelity(pa, pb), 0.0, 1e-9);
    EXPECT_NEAR(fidelity(pa, mix), 0.5, 1e-9);
    EXPECT_NEAR(fidelity(mix, pa), 0.5, 1e-9);
    EXPECT_THROW(fidelity(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
}

TEST(ProjectPhysical, ClipsAndReportsNegativity) {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.2;
    h(1, 1) = -0.2;
    const auto [m, neg] = project_physical(h);
    EXPECT_NEAR(m(0, 0).real(), 1.0, 1e-12);
    EXPECT_NEAR(m(1, 1).real(), 0.0, 1e-12);
    EXPECT_NEAR(neg, 0.2, 1e-12);
}
