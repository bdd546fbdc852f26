#pragma once

// Bunching observables of two-photon interference with a known reference
// photon, integrated over detection times:
//
//     M = 1/2 - 1/2 |Phi_ref><Phi_ref|
//
// Expectation values are coincidence probabilities per two-photon trial.

#include <vector>

#include "homtomo/grid.hpp"
#include "homtomo/reference.hpp"

namespace homtomo {

/// Two-time reference setting; canonical form has t1 < t2.
struct CoherenceSetting {
    double t1;
    double t2;
    double phi;

    /// Swapping the times maps phi -> -phi.
    CoherenceSetting canonical() const;
};

MeasurementOperator bunching_operator(const TemporalState& ref);

/// Reference delayed to t: 1/2 - 1/2 F|t><t|F^+.
MeasurementOperator delayed_operator(const FilterOperator& filter, double t);

/// 1/2 - 1/4 F(|t1><t1| + e^{-i phi}|t1><t2| + e^{i phi}|t2><t1| + |t2><t2|)F^+.
MeasurementOperator coherence_operator(const FilterOperator& filter, const CoherenceSetting& setting);

struct ScanPoint {
    double delay;
    double probability;
};

std::vector<ScanPoint> hom_scan(const DensityMatrix& rho, const FilterOperator& filter,
                                const std::vector<double>& delays);

/// Independent route: beam-splitter output amplitudes for a reference photon in
/// port 1 and the signal in port 2, with the cross-port joint detection density
/// summed over both detection times.
double g2_bruteforce(const TemporalState& signal, const TemporalState& ref);

}  // namespace homtomo
