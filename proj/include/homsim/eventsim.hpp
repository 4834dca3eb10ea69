#pragma once

// Discrete-event Monte Carlo of two asynchronous heralded-pair sources and
// the memory-synchronization protocol. Every draw derives from a per-window
// engine seeded by (seed, window index), so runs are reproducible and
// windows could be simulated in parallel with a deterministic merge.
//
// Source model, per experimental window and source:
//   - with probability pair_probability_per_window a pair is emitted at a
//     uniform time inside the usable window span;
//   - with probability two_pair_ratio a second, co-timed pair accompanies it
//     (the accidental-coincidence channel behind the heralded g2);
//   - the herald is detected with herald_efficiency at the emission time;
//     the anti-Stokes tag follows the wavepacket intensity profile:
//     as_delay_mean_ns + N(0, as_sigma_ns), detected with
//     as_detection_efficiency.
// All timestamps are quantized to the stream resolution.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "homsim/histogram.hpp"
#include "homsim/interference.hpp"
#include "homsim/memory.hpp"
#include "homsim/tagproc.hpp"

namespace homsim {

struct SourceConfig {
    double pair_probability_per_window = 0.9;
    double window_length_us = 300.0;
    double repetition_rate_hz = 50.0;
    double herald_efficiency = 0.9;
    double as_detection_efficiency = 0.9;
    double two_pair_ratio = 0.0;
    double as_delay_mean_ns = 320.0;
    double as_sigma_ns = 135.88; // 320 ns FWHM / (2 sqrt(2 ln 2))

    void validate() const;
};

enum class ProtocolMode { Conventional, MemoryAssisted };

struct ProtocolConfig {
    ProtocolMode mode = ProtocolMode::Conventional;
    MemoryChannel memory;
    // Herald-to-anti-Stokes integration gate covering the wavepacket.
    double coincidence_window_ns = 640.0;
    // Span of |t_s1 - t_s2| over which unsynchronized wavepackets still
    // overlap; a conventional fourfold requires |delta| <= half this span.
    double passive_overlap_ns = 320.0;
    double readout_delay_step_ns = 150.0;
    std::uint64_t survival_seed = 0x9e3779b97f4a7c15ull;
};

struct SimReport {
    double fourfold_rate_hz = 0.0;
    std::uint64_t fourfold_count = 0;
    double elapsed_sim_time_s = 0.0;
    std::optional<double> improvement_factor;

    std::string to_kv() const; // flat key=value record, one per line
};

// Tags on channels {0: s1, 1: as1, 2: s2, 3: as2}. The two sources must
// share window length and repetition rate.
TimeTagStream simulate_sources(const SourceConfig& source1, const SourceConfig& source2,
                               std::uint64_t seed, double duration_s);

// One source feeding a Hanbury Brown-Twiss splitter: channels
// {0: herald, 1: split A, 2: split B}.
TimeTagStream simulate_hbt(const SourceConfig& source, std::uint64_t seed,
                           double duration_s);

// Count fourfolds under the chosen protocol. Conventional mode counts every
// (s1, as1, s2, as2) combination with |t_s2 - t_s1| inside the passive
// overlap acceptance. Memory mode stores as2 at its herald (single cell,
// most recent wins) and reads it out at the next s1 herald, surviving with
// probability eta * exp(-dt/tau).
SimReport run_protocol(const TimeTagStream& stream, const ProtocolConfig& proto);

// Runs both modes and reports the memory-assisted numbers together with the
// rate improvement over the conventional protocol.
SimReport compare_protocols(const TimeTagStream& stream, const ProtocolConfig& proto);

// Memory-mode fourfolds versus an additional controlled readout delay; each
// candidate is thinned by dip_acceptance(delay) so the interference module's
// suppression can be folded in without re-deriving it here.
CoincidenceHistogram sweep_storage_time(
    const TimeTagStream& stream, const ProtocolConfig& proto,
    const std::vector<double>& delays_ns,
    const std::function<double(double)>& dip_acceptance = {});

// Detector-plane event stream behind the interferometer: per window a
// coincidence lands on channels {0: port B, 1: port C} with detection times
// drawn from the supplied joint density (rejection sampling against the
// product of the marginal intensities), so pairwise histograms of the
// stream reproduce the density's delay structure. The density is taken as
// given; it is not re-derived here.
TimeTagStream simulate_interfered_pairs(const SourceConfig& source,
                                        const JointDensity& density,
                                        std::uint64_t seed, double duration_s);

// --- Analytic expectations (oracles for the Monte Carlo) -------------------

// Usable emission span inside a window after the guard margins.
double usable_window_span_ns(const SourceConfig& cfg);

// Probability that two independent uniform emissions fall within the
// conventional acceptance, and the memory-assisted analogue including the
// survival weight; their ratio is the expected improvement factor.
double conventional_timing_acceptance(const ProtocolConfig& proto, double span_ns);
double memory_timing_acceptance(const ProtocolConfig& proto, double span_ns);
double expected_improvement(const SourceConfig& cfg, const ProtocolConfig& proto);

// Heralded g2 of the documented source model as a function of the two-pair
// ratio; b is the probability that one as photon yields a hit on one split
// detector inside the gate (gate coverage * detection efficiency / 2).
double heralded_g2_closed_form(double two_pair_ratio, double b);
// Gaussian gate coverage for a [0, window] gate after the herald.
double as_gate_coverage(const SourceConfig& cfg, double window_ns);
// Invert the closed form for a g2 target by bisection.
double solve_two_pair_ratio(double g2_target, double b);

} // namespace homsim
