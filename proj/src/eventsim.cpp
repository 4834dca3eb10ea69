#include "homsim/eventsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace homsim {

namespace {

// Guard margin keeping every tag of a window inside its interior.
constexpr double kWindowMarginNs = 2000.0;
constexpr double kNormalClampSigmas = 10.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t window_seed(std::uint64_t seed, std::uint64_t window) {
    return splitmix64(seed ^ splitmix64(window + 1));
}

// Hand-rolled samplers so streams are bit-stable across standard libraries.
struct Sampler {
    std::mt19937_64 eng;
    explicit Sampler(std::uint64_t s) : eng(s) {}
    double u01() { return double(eng() >> 11) * 0x1.0p-53; }
    double normal() {
        double u1 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double u2 = u01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return std::clamp(z, -kNormalClampSigmas, kNormalClampSigmas);
    }
};

std::int64_t quantize(double t_ns, std::uint32_t resolution_ns) {
    return std::llround(t_ns / double(resolution_ns)) * std::int64_t(resolution_ns);
}

struct Emission {
    int ch;
    std::int64_t t;
};

// One source in one window; detection channels are (ch_s, ch_as), or the
// HBT triple when split is true (ch_as, ch_as + 1 are the splitter arms).
void emit_source(Sampler& rng, const SourceConfig& cfg, double window_start_ns,
                 int ch_s, int ch_as, bool split, std::uint32_t resolution,
                 std::vector<Emission>& out) {
    if (rng.u01() >= cfg.pair_probability_per_window) return;
    const double span = usable_window_span_ns(cfg);
    const double t_pair = window_start_ns + kWindowMarginNs + rng.u01() * span;
    const int n_pairs = rng.u01() < cfg.two_pair_ratio ? 2 : 1;
    for (int p = 0; p < n_pairs; ++p) {
        if (rng.u01() < cfg.herald_efficiency)
            out.push_back({ch_s, quantize(t_pair, resolution)});
        if (rng.u01() < cfg.as_detection_efficiency) {
            const double t_as =
                t_pair + cfg.as_delay_mean_ns + cfg.as_sigma_ns * rng.normal();
            int ch = ch_as;
            if (split && rng.u01() < 0.5) ch = ch_as + 1;
            out.push_back({ch, quantize(t_as, resolution)});
        }
    }
}

TimeTagStream simulate(const SourceConfig& s1, const SourceConfig* s2,
                       std::uint64_t seed, double duration_s) {
    s1.validate();
    if (s2) {
        s2->validate();
        if (s1.window_length_us != s2->window_length_us ||
            s1.repetition_rate_hz != s2->repetition_rate_hz)
            throw std::invalid_argument(
                "simulate_sources: sources must share window length and repetition rate");
    }
    if (!(duration_s > 0.0))
        throw std::invalid_argument("simulate: duration must be positive");

    TimeTagStream stream;
    stream.meta.window_length_us = s1.window_length_us;
    stream.meta.repetition_rate_hz = s1.repetition_rate_hz;
    stream.meta.duration_s = duration_s;
    if (s2) {
        stream.meta.channel_count = 4;
        stream.meta.channel_map = {{0, "s1"}, {1, "as1"}, {2, "s2"}, {3, "as2"}};
    } else {
        stream.meta.channel_count = 3;
        stream.meta.channel_map = {{0, "herald"}, {1, "hbt_a"}, {2, "hbt_b"}};
    }

    const double spacing_ns = 1e9 / s1.repetition_rate_hz;
    const auto n_windows = std::uint64_t(duration_s * s1.repetition_rate_hz);
    const std::uint32_t res = stream.meta.resolution_ns;

    std::vector<Emission> window_tags;
    for (std::uint64_t w = 0; w < n_windows; ++w) {
        Sampler rng(window_seed(seed, w));
        window_tags.clear();
        const double ws = double(w) * spacing_ns;
        if (s2) {
            emit_source(rng, s1, ws, 0, 1, false, res, window_tags);
            emit_source(rng, *s2, ws, 2, 3, false, res, window_tags);
        } else {
            emit_source(rng, s1, ws, 0, 1, true, res, window_tags);
        }
        std::sort(window_tags.begin(), window_tags.end(), [](const auto& a, const auto& b) {
            return a.t != b.t ? a.t < b.t : a.ch < b.ch;
        });
        for (const auto& e : window_tags)
            stream.records.push_back({std::uint8_t(e.ch), e.t});
    }
    return stream;
}

// Heralds together with the count of anti-Stokes tags inside their gate.
struct HeraldEvent {
    std::int64_t t;
    int n_as;
};

std::vector<HeraldEvent> gated_heralds(const TimeTagStream& s, int ch_s, int ch_as,
                                       std::int64_t gate_ns) {
    const auto ts = channel_times(s, ch_s);
    const auto tas = channel_times(s, ch_as);
    std::vector<HeraldEvent> out;
    out.reserve(ts.size());
    std::size_t lo = 0;
    for (const std::int64_t t : ts) {
        while (lo < tas.size() && tas[lo] < t) ++lo;
        int n = 0;
        for (std::size_t j = lo; j < tas.size() && tas[j] <= t + gate_ns; ++j) ++n;
        out.push_back({t, n});
    }
    return out;
}

double infer_duration_s(const TimeTagStream& s) {
    if (s.meta.duration_s > 0.0) return s.meta.duration_s;
    if (s.meta.repetition_rate_hz <= 0.0 || s.records.empty())
        throw std::invalid_argument("run_protocol: stream carries no duration");
    const double spacing_ns = 1e9 / s.meta.repetition_rate_hz;
    const auto windows =
        std::uint64_t(double(s.records.back().timestamp_ns) / spacing_ns) + 1;
    return double(windows) / s.meta.repetition_rate_hz;
}

std::uint64_t count_conventional(const std::vector<HeraldEvent>& h1,
                                 const std::vector<HeraldEvent>& h2,
                                 std::int64_t accept_ns) {
    std::uint64_t count = 0;
    std::size_t lo = 0;
    for (const auto& a : h1) {
        if (a.n_as == 0) continue;
        while (lo < h2.size() && h2[lo].t < a.t - accept_ns) ++lo;
        for (std::size_t j = lo; j < h2.size() && h2[j].t <= a.t + accept_ns; ++j)
            count += std::uint64_t(a.n_as) * std::uint64_t(h2[j].n_as);
    }
    return count;
}

} // namespace

void SourceConfig::validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(pair_probability_per_window) || !in01(herald_efficiency) ||
        !in01(as_detection_efficiency) || !in01(two_pair_ratio))
        throw std::invalid_argument("SourceConfig: probabilities must be in [0,1]");
    if (!(window_length_us > 0.0) || !(repetition_rate_hz > 0.0))
        throw std::invalid_argument("SourceConfig: window and rate must be positive");
    if (window_length_us * 1e-6 * repetition_rate_hz > 1.0)
        throw std::invalid_argument("SourceConfig: duty cycle exceeds one");
    if (usable_window_span_ns(*this) <= 0.0)
        throw std::invalid_argument("SourceConfig: window too short for the guard margins");
    if (!(as_sigma_ns > 0.0))
        throw std::invalid_argument("SourceConfig: as_sigma must be positive");
}

double usable_window_span_ns(const SourceConfig& cfg) {
    return cfg.window_length_us * 1e3 - 2.0 * kWindowMarginNs;
}

std::string SimReport::to_kv() const {
    std::ostringstream os;
    os << "fourfold_count=" << fourfold_count << '\n'
       << "elapsed_sim_time_s=" << elapsed_sim_time_s << '\n'
       << "fourfold_rate_hz=" << fourfold_rate_hz << '\n';
    if (improvement_factor)
        os << "improvement_factor=" << *improvement_factor << '\n';
    return os.str();
}

TimeTagStream simulate_sources(const SourceConfig& source1, const SourceConfig& source2,
                               std::uint64_t seed, double duration_s) {
    return simulate(source1, &source2, seed, duration_s);
}

TimeTagStream simulate_hbt(const SourceConfig& source, std::uint64_t seed,
                           double duration_s) {
    return simulate(source, nullptr, seed, duration_s);
}

SimReport run_protocol(const TimeTagStream& stream, const ProtocolConfig& proto) {
    stream.validate();
    proto.memory.validate();

    const auto gate = std::int64_t(proto.coincidence_window_ns);
    const auto h1 = gated_heralds(stream, 0, 1, gate);
    const auto h2 = gated_heralds(stream, 2, 3, gate);

    SimReport rep;
    rep.elapsed_sim_time_s = infer_duration_s(stream);

    if (proto.mode == ProtocolMode::Conventional) {
        const auto accept = std::int64_t(std::llround(proto.passive_overlap_ns / 2.0));
        rep.fourfold_count = count_conventional(h1, h2, accept);
    } else {
        const double tau_ns = proto.memory.storage_lifetime_us * 1e3;
        const double eta = proto.memory.efficiency;
        Sampler rng(proto.survival_seed);
        std::optional<HeraldEvent> cell;
        std::size_t i = 0, j = 0;
        while (i < h1.size() || j < h2.size()) {
            const bool take_store =
                j < h2.size() && (i >= h1.size() || h2[j].t <= h1[i].t);
            if (take_store) {
                cell = h2[j++]; // single memory cell, most recent store wins
            } else {
                const auto& trig = h1[i++];
                if (!cell) continue;
                const double dt = double(trig.t - cell->t);
                const double survival = eta * std::exp(-dt / tau_ns);
                if (rng.u01() < survival && cell->n_as > 0)
                    rep.fourfold_count += std::uint64_t(trig.n_as);
                cell.reset(); // the readout converts the spin wave either way
            }
        }
    }
    rep.fourfold_rate_hz = double(rep.fourfold_count) / rep.elapsed_sim_time_s;
    return rep;
}

SimReport compare_protocols(const TimeTagStream& stream, const ProtocolConfig& proto) {
    ProtocolConfig conv = proto;
    conv.mode = ProtocolMode::Conventional;
    ProtocolConfig mem = proto;
    mem.mode = ProtocolMode::MemoryAssisted;
    const SimReport rc = run_protocol(stream, conv);
    SimReport rm = run_protocol(stream, mem);
    if (rc.fourfold_count > 0)
        rm.improvement_factor = rm.fourfold_rate_hz / rc.fourfold_rate_hz;
    return rm;
}

CoincidenceHistogram sweep_storage_time(
    const TimeTagStream& stream, const ProtocolConfig& proto,
    const std::vector<double>& delays_ns,
    const std::function<double(double)>& dip_acceptance) {
    stream.validate();
    proto.memory.validate();
    if (delays_ns.empty())
        throw std::invalid_argument("sweep_storage_time: empty delay list");

    const auto gate = std::int64_t(proto.coincidence_window_ns);
    const auto h1 = gated_heralds(stream, 0, 1, gate);
    const auto h2 = gated_heralds(stream, 2, 3, gate);
    const double tau_ns = proto.memory.storage_lifetime_us * 1e3;
    const double eta = proto.memory.efficiency;

    CoincidenceHistogram hist = make_scan_histogram(delays_ns);
    for (std::size_t d = 0; d < delays_ns.size(); ++d) {
        const double delay = delays_ns[d];
        const double accept = dip_acceptance ? dip_acceptance(delay) : 1.0;
        Sampler rng(splitmix64(proto.survival_seed ^ (d + 1)));
        std::optional<HeraldEvent> cell;
        std::size_t i = 0, j = 0;
        std::uint64_t count = 0;
        while (i < h1.size() || j < h2.size()) {
            const bool take_store =
                j < h2.size() && (i >= h1.size() || h2[j].t <= h1[i].t);
            if (take_store) {
                cell = h2[j++];
            } else {
                const auto& trig = h1[i++];
                if (!cell) continue;
                const double dt = double(trig.t) + delay - double(cell->t);
                if (dt >= 0.0) {
                    const double survival = eta * std::exp(-dt / tau_ns);
                    if (rng.u01() < survival && cell->n_as > 0 &&
                        (accept >= 1.0 || rng.u01() < accept))
                        count += std::uint64_t(trig.n_as);
                    cell.reset();
                }
            }
        }
        hist.counts[d] = double(count);
    }
    return hist;
}

TimeTagStream simulate_interfered_pairs(const SourceConfig& source,
                                        const JointDensity& density,
                                        std::uint64_t seed, double duration_s) {
    source.validate();
    if (!(duration_s > 0.0))
        throw std::invalid_argument("simulate_interfered_pairs: duration must be positive");
    const std::size_t n = density.grid.count;
    const double span = density.grid.span_ns();
    if (span + 2.0 * kWindowMarginNs > source.window_length_us * 1e3)
        throw std::invalid_argument(
            "simulate_interfered_pairs: density grid does not fit the window");

    // cumulative distribution over the (t1, t2) lattice
    std::vector<double> cdf(n * n);
    double z = 0.0;
    for (std::size_t k = 0; k < cdf.size(); ++k) {
        z += density.values[k];
        cdf[k] = z;
    }
    if (!(z > 0.0))
        throw std::invalid_argument("simulate_interfered_pairs: empty density");
    const double step2 = density.grid.step_ns * density.grid.step_ns;
    const double coincidence_prob = std::min(1.0, z * step2);

    TimeTagStream stream;
    stream.meta.channel_count = 2;
    stream.meta.channel_map = {{0, "hom_b"}, {1, "hom_c"}};
    stream.meta.window_length_us = source.window_length_us;
    stream.meta.repetition_rate_hz = source.repetition_rate_hz;
    stream.meta.duration_s = duration_s;

    const double spacing_ns = 1e9 / source.repetition_rate_hz;
    const auto n_windows = std::uint64_t(duration_s * source.repetition_rate_hz);
    const std::uint32_t res = stream.meta.resolution_ns;

    for (std::uint64_t w = 0; w < n_windows; ++w) {
        Sampler rng(window_seed(seed, w));
        if (rng.u01() >= source.pair_probability_per_window) continue;
        if (rng.u01() >= coincidence_prob) continue; // pair bunched, no coincidence
        const double x = rng.u01() * z;
        const std::size_t idx = std::size_t(
            std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
        const double base =
            double(w) * spacing_ns + kWindowMarginNs - density.grid.start_ns;
        const double t1 = base + density.grid.time(idx / n);
        const double t2 = base + density.grid.time(idx % n);
        std::vector<Emission> tags;
        if (rng.u01() < source.as_detection_efficiency)
            tags.push_back({0, quantize(t1, res)});
        if (rng.u01() < source.as_detection_efficiency)
            tags.push_back({1, quantize(t2, res)});
        std::sort(tags.begin(), tags.end(), [](const auto& a, const auto& b) {
            return a.t != b.t ? a.t < b.t : a.ch < b.ch;
        });
        for (const auto& e : tags)
            stream.records.push_back({std::uint8_t(e.ch), e.t});
    }
    return stream;
}

double conventional_timing_acceptance(const ProtocolConfig& proto, double span_ns) {
    const double a = proto.passive_overlap_ns / 2.0;
    const double u = span_ns;
    return (2.0 * a * u - a * a) / (u * u);
}

double memory_timing_acceptance(const ProtocolConfig& proto, double span_ns) {
    const double tau = proto.memory.storage_lifetime_us * 1e3;
    const double u = span_ns;
    // integral of (u - d)/u^2 * exp(-d/tau) over d in [0, u]
    const double integral = tau * u - tau * tau + tau * tau * std::exp(-u / tau);
    return proto.memory.efficiency * integral / (u * u);
}

double expected_improvement(const SourceConfig& cfg, const ProtocolConfig& proto) {
    const double span = usable_window_span_ns(cfg);
    return memory_timing_acceptance(proto, span) /
           conventional_timing_acceptance(proto, span);
}

double heralded_g2_closed_form(double two_pair_ratio, double b) {
    const double r = two_pair_ratio;
    const double den = 1.0 + r * (3.0 - 2.0 * b);
    return 4.0 * r * (1.0 + r) / (den * den);
}

double as_gate_coverage(const SourceConfig& cfg, double window_ns) {
    const double s = cfg.as_sigma_ns * std::sqrt(2.0);
    return 0.5 * (std::erf((window_ns - cfg.as_delay_mean_ns) / s) +
                  std::erf(cfg.as_delay_mean_ns / s));
}

double solve_two_pair_ratio(double g2_target, double b) {
    if (!(g2_target > 0.0))
        throw std::invalid_argument("solve_two_pair_ratio: target must be positive");
    double lo = 0.0, hi = 1.0;
    if (heralded_g2_closed_form(hi, b) < g2_target)
        throw std::invalid_argument("solve_two_pair_ratio: target unreachable");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (heralded_g2_closed_form(mid, b) < g2_target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace homsim
