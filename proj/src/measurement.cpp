#include "homtomo/measurement.hpp"

#include <cmath>

namespace homtomo {

CoherenceSetting CoherenceSetting::canonical() const {
    require(t1 != t2, ErrorKind::invalid_argument, "coherence setting needs t1 != t2");
    if (t1 < t2) {
        return *this;
    }
    return CoherenceSetting{t2, t1, -phi};
}

MeasurementOperator bunching_operator(const TemporalState& ref) {
    require(ref.is_normalized(), ErrorKind::invalid_argument, "bunching reference must be normalized");
    return MeasurementOperator::from_terms(ref.grid(), 0.5, {RankOneTerm{-0.5, ref.amp()}});
}

MeasurementOperator delayed_operator(const FilterOperator& filter, double t) {
    return bunching_operator(filter.at_time(t));
}

MeasurementOperator coherence_operator(const FilterOperator& filter, const CoherenceSetting& setting) {
    require(setting.t1 != setting.t2, ErrorKind::invalid_argument, "coherence setting needs t1 != t2");
    // The bracket is |v><v| with v = |t1> + e^{i phi}|t2>.
    Vector v = filter.at_time(setting.t1).amp() + std::polar(1.0, setting.phi) * filter.at_time(setting.t2).amp();
    return MeasurementOperator::from_terms(filter.grid(), 0.5, {RankOneTerm{-0.25, std::move(v)}});
}

std::vector<ScanPoint> hom_scan(const DensityMatrix& rho, const FilterOperator& filter,
                                const std::vector<double>& delays) {
    require_same_grid(rho.grid(), filter.grid());
    std::vector<ScanPoint> out;
    out.reserve(delays.size());
    for (double delay : delays) {
        out.push_back(ScanPoint{delay, expectation(delayed_operator(filter, delay), rho)});
    }
    return out;
}

double g2_bruteforce(const TemporalState& signal, const TemporalState& ref) {
    require_same_grid(signal.grid(), ref.grid());
    const TimeGrid& g = signal.grid();
    const std::size_t n = g.size();
    const double dt = g.dt();
    // Input a1^+(phi) a2^+(psi)|0>, with a1^+ = (b1^+ + b2^+)/sqrt2 and
    // a2^+ = (b1^+ - b2^+)/sqrt2. The b1(t1) b2(t2) amplitude collects the
    // b1^+(psi) b2^+(phi) and -b1^+(phi) b2^+(psi) terms.
    const double r = 1.0 / std::sqrt(2.0);
    const double bs[2][2] = {{r, r}, {r, -r}};  // bs[input port][output port]
    const Vector* port_amp[2] = {&ref.amp(), &signal.amp()};

    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            complex amp{0.0, 0.0};
            // Photon from input p lands in output 1 at t_j, photon from input q in output 2 at t_k.
            for (int p = 0; p < 2; ++p) {
                const int q = 1 - p;
                amp += bs[p][0] * bs[q][1] * (*port_amp[p])(static_cast<Eigen::Index>(j)) *
                       (*port_amp[q])(static_cast<Eigen::Index>(k));
            }
            total += std::norm(amp);
        }
    }
    return total * dt * dt;
}

}  // namespace homtomo
