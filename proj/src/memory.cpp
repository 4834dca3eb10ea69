#include "homsim/memory.hpp"

#include <cmath>

namespace homsim {

void EnsembleParams::validate() const {
    if (!(coupling_g_rad_per_ns > 0.0))
        throw std::invalid_argument("EnsembleParams: coupling must be positive");
    if (atom_number < 1)
        throw std::invalid_argument("EnsembleParams: need at least one atom");
}

void MemoryChannel::validate() const {
    if (efficiency < 0.0 || efficiency > 1.0)
        throw std::invalid_argument("MemoryChannel: efficiency must be in [0,1]");
    if (!(storage_lifetime_us > 0.0))
        throw std::invalid_argument("MemoryChannel: storage lifetime must be positive");
    control.validate();
    ensemble.validate();
}

double mixing_angle(const EnsembleParams& ensemble, double omega_c) {
    ensemble.validate();
    if (omega_c < 0.0)
        throw std::invalid_argument("mixing_angle: control Rabi frequency must be >= 0");
    const double gN = ensemble.coupling_g_rad_per_ns *
                      std::sqrt(double(ensemble.atom_number));
    return std::atan2(gN, omega_c);
}

SpinWave store(const TemporalWavepacket& input, const MemoryChannel& mem,
               double t_store_ns) {
    mem.validate();
    if (input.energy() > 1.0 + 1e-9)
        throw std::invalid_argument("store: input energy exceeds one photon");
    if (t_store_ns < input.grid.start_ns || t_store_ns > input.grid.end_ns())
        throw std::invalid_argument("store: t_store outside the input grid span");

    // sqrt(eta) energy loss at the write stage.
    const double write_amp = std::pow(mem.efficiency, 0.25);
    SpinWave s;
    s.grid = input.grid;
    s.stored_at_ns = t_store_ns;
    s.amplitude.resize(input.amplitude.size());
    for (std::size_t k = 0; k < input.amplitude.size(); ++k)
        s.amplitude[k] = input.amplitude[k] * write_amp;
    return s;
}

RetrievedPhoton readout(const SpinWave& s, const MemoryChannel& mem, double t_r_ns) {
    mem.validate();
    if (t_r_ns < s.stored_at_ns)
        throw std::invalid_argument("readout: t_r precedes the storage instant");

    const double dt = t_r_ns - s.stored_at_ns;
    const double tau_ns = mem.storage_lifetime_us * 1e3;
    // Energy decays as exp(-dt/tau); amplitude carries half the exponent.
    const double decay_amp = std::exp(-0.5 * dt / tau_ns);
    const double read_amp = std::pow(mem.efficiency, 0.25) * decay_amp;

    RetrievedPhoton out;
    out.beyond_lifetime = dt > tau_ns;
    out.photon.grid = TimeGrid(s.grid.start_ns + dt, s.grid.step_ns, s.grid.count);
    out.photon.amplitude.resize(s.amplitude.size());
    const double omega_w = mem.control.write_amplitude_rad_per_ns;
    for (std::size_t k = 0; k < s.amplitude.size(); ++k) {
        // Retarded time of this sample relative to the readout trigger; it
        // equals the sample's original time minus the storage instant.
        const double u = s.grid.time(k) - s.stored_at_ns;
        const double phi = mem.control.read_phase.eval(u) + mem.global_phase_rad;
        cplx a = s.amplitude[k] * read_amp;
        if (phi != 0.0) a *= cplx(std::cos(phi), -std::sin(phi));
        if (mem.amplitude_shaping)
            a *= mem.control.read_amplitude_at(u) / omega_w;
        out.photon.amplitude[k] = a;
    }
    return out;
}

RetrievedPhoton roundtrip(const TemporalWavepacket& input, const MemoryChannel& mem,
                          double delay_ns) {
    if (delay_ns < 0.0)
        throw std::invalid_argument("roundtrip: delay must be >= 0");
    const SpinWave s = store(input, mem, input.grid.start_ns);
    return readout(s, mem, s.stored_at_ns + delay_ns);
}

} // namespace homsim
