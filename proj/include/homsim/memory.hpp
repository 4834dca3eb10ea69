#pragma once

// EIT quantum-memory storage/readout transfer. The memory maps a temporal
// wavepacket onto a stationary spin wave and back; the readout control field
// imprints its phase program on the retrieved photon. Loss is split evenly
// between write and read so a round trip has energy efficiency eta, and the
// stored spin wave decays with energy lifetime tau_mem.

#include "homsim/signal.hpp"

namespace homsim {

struct EnsembleParams {
    double coupling_g_rad_per_ns = 1.0;
    std::size_t atom_number = 1;

    void validate() const;
};

struct MemoryChannel {
    double efficiency = 0.86;              // round-trip energy efficiency
    double storage_lifetime_us = 5.0;      // energy 1/e time; inf = no decay
    double global_phase_rad = 0.0;         // phi_s0, undetermined in hardware
    ControlEnvelope control;
    EnsembleParams ensemble;
    // Off by default: readout reproduces the stored envelope. On, the
    // envelope is additionally scaled by Omega_r(u)/Omega_w.
    bool amplitude_shaping = false;

    void validate() const;
};

// Stored collective excitation. The grid keeps the input labeling; the
// envelope's internal clock starts at stored_at.
struct SpinWave {
    TimeGrid grid;
    std::vector<cplx> amplitude;
    double stored_at_ns = 0.0;
};

// Readout product: the retrieved photon plus a flag raised when the storage
// interval exceeded the memory lifetime.
struct RetrievedPhoton {
    TemporalWavepacket photon;
    bool beyond_lifetime = false;
};

// Photon-to-spin-wave mixing angle, tan(theta) = g sqrt(N) / Omega_c.
// Omega_c = 0 gives pi/2 (control off, pure spin wave).
double mixing_angle(const EnsembleParams& ensemble, double omega_c_rad_per_ns);

// Map a wavepacket onto a spin wave at t_store. Write-side energy loss is
// sqrt(eta) so that a full round trip ends at eta.
SpinWave store(const TemporalWavepacket& input, const MemoryChannel& mem,
               double t_store_ns);

// Retrieve at t_r >= stored_at. Sample at retarded time u = t - t_r gets
// s(u) * eta_read * exp(-i [phi_r(u) + phi_s0]), time-shifted by
// (t_r - stored_at); lifetime decay damps the energy by exp(-dt/tau).
RetrievedPhoton readout(const SpinWave& s, const MemoryChannel& mem, double t_r_ns);

// store followed by readout with the given storage delay.
RetrievedPhoton roundtrip(const TemporalWavepacket& input, const MemoryChannel& mem,
                          double delay_ns);

} // namespace homsim
