#pragma once

// Complex temporal wavepackets and control-field envelopes on uniform time
// grids. Everything here is an immutable value; operations are pure and safe
// to share across threads.

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "homsim/errors.hpp"

namespace homsim {

using cplx = std::complex<double>;

// Uniform time axis. Sample times are always recomputed from (start, step,
// count) so there is no stored array to drift.
struct TimeGrid {
    double start_ns = 0.0;
    double step_ns = 2.0;
    std::size_t count = 1000;

    TimeGrid() = default;
    TimeGrid(double start, double step, std::size_t n);

    double time(std::size_t k) const { return start_ns + double(k) * step_ns; }
    double end_ns() const { return time(count - 1); }
    double span_ns() const { return step_ns * double(count - 1); }

    bool operator==(const TimeGrid& o) const {
        return start_ns == o.start_ns && step_ns == o.step_ns && count == o.count;
    }
};

// Single-photon amplitude density sampled on a grid, units ns^(-1/2).
// Energy (squared norm) integrals use the trapezoid rule throughout.
struct TemporalWavepacket {
    TimeGrid grid;
    std::vector<cplx> amplitude;

    TemporalWavepacket() = default;
    TemporalWavepacket(TimeGrid g, std::vector<cplx> a);

    // Trapezoid integral of |a|^2 over the grid.
    double energy() const;
    bool is_normalized(double tol = 1e-9) const;
    // Rescaled copy with unit energy.
    TemporalWavepacket normalized() const;
};

// Phase of the readout control field as a function of time. Evaluation is
// total: outside its characteristic region each program extends by its
// boundary value, so any grid time is valid.
class PhaseProgram {
public:
    enum class Kind { Constant, Step, Linear, Piecewise };

    static PhaseProgram constant(double phi0_rad);
    // phi_low for t < t_transition, phi_high from the transition on.
    static PhaseProgram step(double t_transition_ns, double phi_low_rad,
                             double phi_high_rad);
    // Ramp from 0 at t_start with the given rate, clamped once the total
    // span is reached; span/rate must be a positive duration.
    static PhaseProgram linear(double t_start_ns, double rate_rad_per_ns,
                               double span_rad);
    // Convenience: span over an explicit duration, rate = span/duration.
    static PhaseProgram linear_span(double t_start_ns, double span_rad,
                                    double duration_ns);
    // Linear interpolation between strictly increasing breakpoints; clamped
    // to the first/last value outside.
    static PhaseProgram piecewise(std::vector<std::pair<double, double>> pts);

    double eval(double t_ns) const;
    Kind kind() const { return kind_; }

    double step_transition_ns() const { return p1_; }
    double linear_rate_rad_per_ns() const { return p2_; }
    double linear_start_ns() const { return p1_; }
    double linear_span_rad() const { return p3_; }

private:
    PhaseProgram(Kind k, double a, double b, double c)
        : kind_(k), p1_(a), p2_(b), p3_(c) {}
    Kind kind_;
    double p1_ = 0, p2_ = 0, p3_ = 0;
    std::vector<std::pair<double, double>> points_;
};

// Write/read control field: constant write Rabi amplitude, sampled read
// amplitude and a read-phase program.
struct ControlEnvelope {
    double write_amplitude_rad_per_ns = 1.0;
    // (time ns, Rabi amplitude rad/ns) samples, linearly interpolated and
    // clamped outside; empty means "equal to the write amplitude".
    std::vector<std::pair<double, double>> read_amplitude;
    PhaseProgram read_phase = PhaseProgram::constant(0.0);

    void validate() const;
    double read_amplitude_at(double t_ns) const;
};

// --- Operations -----------------------------------------------------------

// Normalized real Gaussian with the requested intensity FWHM. Throws
// SupportExceedsGridError if more than 1e-6 of the pulse energy falls
// outside the grid.
TemporalWavepacket make_gaussian_wavepacket(const TimeGrid& grid,
                                            double center_ns, double fwhm_ns);

// Trapezoid overlap integral  sum conj(a_k) b_k w_k step.
cplx overlap(const TemporalWavepacket& a, const TemporalWavepacket& b);

// Overlap with b delayed by delay_ns: integral of conj(a(t)) b(t + delay).
// Integer-step delays are index shifts (exact); otherwise b is linearly
// interpolated, with zero outside its grid.
cplx overlap_at_delay(const TemporalWavepacket& a, const TemporalWavepacket& b,
                      double delay_ns);

// Phase-blind waveform similarity: squared overlap of the root-intensity
// envelopes, in [0, 1] for normalized inputs.
double likeness(const TemporalWavepacket& a, const TemporalWavepacket& b);

// a_k <- a_k * exp(-i phi(t_k)). Exactly norm-preserving.
TemporalWavepacket apply_phase(const TemporalWavepacket& w,
                               const PhaseProgram& p);

// Weighted discrete phase-difference slope over [t_lo, t_hi], reported as a
// frequency offset in MHz. For amplitude * exp(-i r t) this returns
// r / (2 pi) in GHz units times 1000.
double estimate_frequency_offset_mhz(const TemporalWavepacket& w, double t_lo_ns,
                                     double t_hi_ns);

} // namespace homsim
