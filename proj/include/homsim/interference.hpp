#pragma once

// Two-photon interference observables at a lossless beam splitter: joint
// coincidence densities, windowed early/late coincidences, fourfold rates,
// dip scans and phase-beat profiles.

#include <optional>

#include "homsim/histogram.hpp"
#include "homsim/signal.hpp"

namespace homsim {

struct BeamSplitter {
    double transmission = 0.5;
    double reflection = 0.5;

    void validate() const; // lossless: T + R = 1
};

struct DetectionWindow {
    std::string channel;
    double start_ns = 0.0;
    double end_ns = 0.0;

    void validate() const;
};

// Non-temporal distinguishability of the two sources. mode_overlap scales
// the interference cross term (1 = indistinguishable apart from temporal
// shape, 0 = orthogonal modes); gbar2 is the wavepacket-averaged multi-pair
// parameter entering the fourfold baseline.
struct SourceDistinguishability {
    double mode_overlap = 1.0; // lambda
    double gbar2 = 0.0;

    void validate() const;
};

// Coincidence density G(t1, t2) between the two output ports, units ns^-2,
// sampled on the shared input grid (t1 indexes rows).
struct JointDensity {
    TimeGrid grid;
    std::vector<double> values; // row-major, grid.count x grid.count

    double at(std::size_t i, std::size_t j) const {
        return values[i * grid.count + j];
    }
    // Riemann integral over the full plane, step^2 weighted.
    double total() const;
};

// Exclusion zone handed to windowed_coincidence: grid times within
// +-margin of the transition are dropped on both detection axes.
struct StepExclusion {
    double transition_ns = 0.0;
    double margin_ns = 0.0;
};

// G(t1,t2) = T^2 |w1(t1) w2(t2)|^2 + R^2 |w1(t2) w2(t1)|^2
//            - 2 T R lambda Re[w1(t1) w2(t2) conj(w1(t2) w2(t1))]
// i.e. the beam-splitter amplitude expansion with the interference term
// scaled by the mode overlap.
JointDensity coincidence_density(const TemporalWavepacket& w1,
                                 const TemporalWavepacket& w2,
                                 const BeamSplitter& bs,
                                 const SourceDistinguishability& dist);

// Integral of G over winB x winC, optionally excluding a margin around a
// step transition on both axes.
double windowed_coincidence(const JointDensity& g, const DetectionWindow& winB,
                            const DetectionWindow& winC,
                            const std::optional<StepExclusion>& exclusion = {});

// Fourfold coincidence rate at relative herald delay dt. For normalized
// inputs: T^2 + R^2 + T R gbar2 - 2 T R lambda |O(dt)|^2.
double fourfold_rate(const TemporalWavepacket& w1, const TemporalWavepacket& w2,
                     double dt_ns, const BeamSplitter& bs,
                     const SourceDistinguishability& dist);

// fourfold_rate sampled over a delay lattice.
CoincidenceHistogram hom_dip_scan(const TemporalWavepacket& w1,
                                  const TemporalWavepacket& w2,
                                  const BeamSplitter& bs,
                                  const SourceDistinguishability& dist,
                                  const std::vector<double>& delays_ns);

// Coincidence counts versus detector time difference t1 - t2, binned at
// binwidth. A linear phase ramp on w2 produces a beat with period 1/dnu.
CoincidenceHistogram beat_profile(const TemporalWavepacket& w1,
                                  const TemporalWavepacket& w2_modulated,
                                  const BeamSplitter& bs,
                                  const SourceDistinguishability& dist,
                                  double binwidth_ns);

// Probability that the photon pair leaves through one common port,
// 2 T R (1 + lambda |O|^2), evaluated by quadrature of the bunched joint
// density. Complements the coincidence probability on a lossless splitter.
double bunched_probability(const TemporalWavepacket& w1, const TemporalWavepacket& w2,
                           const BeamSplitter& bs,
                           const SourceDistinguishability& dist);

} // namespace homsim
