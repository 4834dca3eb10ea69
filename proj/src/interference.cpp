#include "homsim/interference.hpp"

#include <cmath>

namespace homsim {

void BeamSplitter::validate() const {
    if (transmission < 0.0 || reflection < 0.0)
        throw std::invalid_argument("BeamSplitter: T and R must be >= 0");
    if (std::abs(transmission + reflection - 1.0) > 1e-12)
        throw std::invalid_argument("BeamSplitter: T + R must equal 1 (lossless)");
}

void DetectionWindow::validate() const {
    if (!(start_ns < end_ns))
        throw std::invalid_argument("DetectionWindow: start must precede end");
}

void SourceDistinguishability::validate() const {
    if (mode_overlap < 0.0 || mode_overlap > 1.0)
        throw std::invalid_argument("SourceDistinguishability: mode overlap in [0,1]");
    if (gbar2 < 0.0)
        throw std::invalid_argument("SourceDistinguishability: gbar2 must be >= 0");
}

double JointDensity::total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.step_ns * grid.step_ns;
}

JointDensity coincidence_density(const TemporalWavepacket& w1,
                                 const TemporalWavepacket& w2,
                                 const BeamSplitter& bs,
                                 const SourceDistinguishability& dist) {
    if (!(w1.grid == w2.grid))
        throw GridMismatchError("coincidence_density: wavepackets on different grids");
    bs.validate();
    dist.validate();

    const std::size_t n = w1.grid.count;
    const double T = bs.transmission, R = bs.reflection;
    const double lam = dist.mode_overlap;

    JointDensity g;
    g.grid = w1.grid;
    g.values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a1 = w1.amplitude[i]; // w1(t1)
        const cplx b1 = w2.amplitude[i]; // w2(t1)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx a2 = w1.amplitude[j]; // w1(t2)
            const cplx b2 = w2.amplitude[j]; // w2(t2)
            const cplx tt = a1 * b2; // both transmitted
            const cplx rr = a2 * b1; // both reflected
            const double dist_term = T * T * std::norm(tt) + R * R * std::norm(rr);
            const double cross = 2.0 * T * R * (tt * std::conj(rr)).real();
            g.values[i * n + j] = dist_term - lam * cross;
        }
    }
    return g;
}

namespace {

// Grid indices whose sample time lies inside the window, minus the
// exclusion zone.
std::vector<std::size_t> window_indices(const TimeGrid& grid,
                                        const DetectionWindow& win,
                                        const std::optional<StepExclusion>& excl) {
    win.validate();
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < grid.count; ++k) {
        const double t = grid.time(k);
        if (t < win.start_ns || t > win.end_ns) continue;
        if (excl && std::abs(t - excl->transition_ns) <= excl->margin_ns) continue;
        idx.push_back(k);
    }
    if (idx.empty())
        throw std::invalid_argument("windowed_coincidence: window '" + win.channel +
                                    "' contains no grid samples");
    return idx;
}

} // namespace

double windowed_coincidence(const JointDensity& g, const DetectionWindow& winB,
                            const DetectionWindow& winC,
                            const std::optional<StepExclusion>& exclusion) {
    const auto rows = window_indices(g.grid, winB, exclusion);
    const auto cols = window_indices(g.grid, winC, exclusion);
    double acc = 0.0;
    for (std::size_t i : rows)
        for (std::size_t j : cols) acc += g.at(i, j);
    return acc * g.grid.step_ns * g.grid.step_ns;
}

double fourfold_rate(const TemporalWavepacket& w1, const TemporalWavepacket& w2,
                     double dt_ns, const BeamSplitter& bs,
                     const SourceDistinguishability& dist) {
    bs.validate();
    dist.validate();
    const double T = bs.transmission, R = bs.reflection;
    const double o2 = std::norm(overlap_at_delay(w1, w2, dt_ns));
    return T * T + R * R + T * R * dist.gbar2 - 2.0 * T * R * dist.mode_overlap * o2;
}

CoincidenceHistogram hom_dip_scan(const TemporalWavepacket& w1,
                                  const TemporalWavepacket& w2,
                                  const BeamSplitter& bs,
                                  const SourceDistinguishability& dist,
                                  const std::vector<double>& delays_ns) {
    if (delays_ns.empty())
        throw std::invalid_argument("hom_dip_scan: empty delay list");
    CoincidenceHistogram h = make_scan_histogram(delays_ns);
    for (std::size_t i = 0; i < delays_ns.size(); ++i)
        h.counts[i] = fourfold_rate(w1, w2, delays_ns[i], bs, dist);
    h.normalization = bs.transmission * bs.transmission +
                      bs.reflection * bs.reflection +
                      bs.transmission * bs.reflection * dist.gbar2;
    return h;
}

CoincidenceHistogram beat_profile(const TemporalWavepacket& w1,
                                  const TemporalWavepacket& w2_modulated,
                                  const BeamSplitter& bs,
                                  const SourceDistinguishability& dist,
                                  double binwidth_ns) {
    if (!(binwidth_ns > 0.0))
        throw std::invalid_argument("beat_profile: binwidth must be positive");
    const JointDensity g = coincidence_density(w1, w2_modulated, bs, dist);

    const std::size_t n = g.grid.count;
    const double step = g.grid.step_ns;
    const double max_lag = g.grid.span_ns();
    const int k_max = int(std::floor(max_lag / binwidth_ns + 0.5));
    CoincidenceHistogram h = make_centered_histogram(binwidth_ns, k_max);

    // Accumulate each diagonal t1 - t2 = m*step into its bin.
    for (std::ptrdiff_t m = -std::ptrdiff_t(n) + 1; m < std::ptrdiff_t(n); ++m) {
        double diag = 0.0;
        const std::size_t i0 = m >= 0 ? std::size_t(m) : 0;
        const std::size_t i1 = m >= 0 ? n : n + std::size_t(m);
        for (std::size_t i = i0; i < i1; ++i)
            diag += g.at(i, std::size_t(std::ptrdiff_t(i) - m));
        const int bin = int(std::floor(double(m) * step / binwidth_ns + 0.5));
        h.counts[std::size_t(bin + k_max)] += diag * step * step;
    }
    return h;
}

double bunched_probability(const TemporalWavepacket& w1, const TemporalWavepacket& w2,
                           const BeamSplitter& bs,
                           const SourceDistinguishability& dist) {
    if (!(w1.grid == w2.grid))
        throw GridMismatchError("bunched_probability: wavepackets on different grids");
    bs.validate();
    dist.validate();
    const std::size_t n = w1.grid.count;
    const double TR = bs.transmission * bs.reflection;
    const double lam = dist.mode_overlap;
    // Both-photons-one-port density, symmetrized amplitude over ordered
    // (t1,t2); the 1/2 undoes the double counting, the factor 2 restores the
    // two output ports.
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a1 = w1.amplitude[i];
        const cplx b1 = w2.amplitude[i];
        for (std::size_t j = 0; j < n; ++j) {
            const cplx tt = a1 * w2.amplitude[j];
            const cplx rr = w1.amplitude[j] * b1;
            acc += std::norm(tt) + std::norm(rr) +
                   2.0 * lam * (tt * std::conj(rr)).real();
        }
    }
    return TR * acc * w1.grid.step_ns * w1.grid.step_ns;
}

} // namespace homsim
