#include "homsim/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "homsim/eventsim.hpp"
#include "homsim/interference.hpp"
#include "homsim/memory.hpp"
#include "homsim/signal.hpp"
#include "homsim/tagproc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace homsim {

namespace {

// --- config plumbing --------------------------------------------------------

double num_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::int64_t int_or(const json& j, const char* key, std::int64_t fallback) {
    return j.contains(key) ? j.at(key).get<std::int64_t>() : fallback;
}

json section_or_empty(const json& j, const char* key) {
    return j.contains(key) ? j.at(key) : json::object();
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed,
                std::vector<std::string>& errors) {
    if (!obj.is_object()) {
        errors.push_back(path + ": expected an object");
        return;
    }
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            errors.push_back(path + "." + key + ": unknown key");
    }
}

const std::set<std::string> kGridKeys = {"start_ns", "step_ns", "count"};
const std::set<std::string> kWavepacketKeys = {"center_ns", "fwhm_ns"};
const std::set<std::string> kBeamsplitterKeys = {"transmission", "reflection"};
const std::set<std::string> kSourceKeys = {"waveform_likeness", "mode_overlap",
                                           "gbar2_conventional"};
const std::set<std::string> kMemoryKeys = {
    "efficiency",       "storage_lifetime_us", "global_phase_rad",
    "readout_likeness", "gbar2_readout",       "storage_delay_ns"};
const std::set<std::string> kScanKeys = {"delay_min_ns", "delay_max_ns",
                                         "delay_step_ns", "baseline_exclusion_ns"};
const std::set<std::string> kStepKeys = {"exclusion_margin_ns", "window_halfspan_ns",
                                         "target_same_half_ratio"};
const std::set<std::string> kModulationKeys = {"span_pi", "duration_ns"};
const std::set<std::string> kBeatKeys = {"binwidth_ns"};
const std::set<std::string> kSimSourceKeys = {
    "pair_probability_per_window", "window_length_us",
    "repetition_rate_hz",          "herald_efficiency",
    "as_detection_efficiency",     "two_pair_ratio",
    "as_delay_mean_ns",            "as_sigma_ns"};
const std::set<std::string> kProtocolKeys = {
    "coincidence_window_ns", "passive_overlap_ns", "readout_delay_step_ns"};
const std::set<std::string> kPairwiseKeys = {"channel_a", "channel_b", "binwidth_ns",
                                             "span_ns"};
const std::set<std::string> kG2Keys = {"herald_channel", "split_channel_a",
                                       "split_channel_b", "window_ns"};
const std::set<std::string> kFourfoldKeys = {
    "herald_delta_lo_ns", "herald_delta_hi_ns", "as1_gate_lo_ns", "as1_gate_hi_ns",
    "as2_gate_lo_ns",     "as2_gate_hi_ns",     "transition_rel_ns",
    "exclusion_margin_ns", "hist_binwidth_ns",  "hist_span_ns"};

void validate_beamsplitter(const json& cfg, std::vector<std::string>& errors) {
    if (!cfg.contains("beamsplitter")) return;
    const json& bs = cfg.at("beamsplitter");
    check_keys(bs, "beamsplitter", kBeamsplitterKeys, errors);
    if (!bs.is_object()) return;
    const double t = num_or(bs, "transmission", 0.5);
    const double r = num_or(bs, "reflection", 0.5);
    if (std::abs(t + r - 1.0) > 1e-12)
        errors.push_back("beamsplitter: T + R must equal 1 (lossless splitter)");
    if (t < 0.0 || r < 0.0)
        errors.push_back("beamsplitter: T and R must be non-negative");
}

void validate_common_optics(const json& cfg, std::vector<std::string>& errors) {
    if (cfg.contains("grid")) {
        check_keys(cfg.at("grid"), "grid", kGridKeys, errors);
        if (cfg.at("grid").is_object()) {
            if (num_or(cfg.at("grid"), "step_ns", 2.0) <= 0.0)
                errors.push_back("grid.step_ns: must be positive");
            if (int_or(cfg.at("grid"), "count", 1000) < 2)
                errors.push_back("grid.count: need at least two samples");
        }
    }
    if (cfg.contains("wavepacket")) {
        check_keys(cfg.at("wavepacket"), "wavepacket", kWavepacketKeys, errors);
        if (cfg.at("wavepacket").is_object() &&
            num_or(cfg.at("wavepacket"), "fwhm_ns", 320.0) <= 0.0)
            errors.push_back("wavepacket.fwhm_ns: must be positive");
    }
    validate_beamsplitter(cfg, errors);
}

void validate_memory_section(const json& cfg, bool required,
                             std::vector<std::string>& errors) {
    if (!cfg.contains("memory")) {
        if (required) errors.push_back("memory: required section is missing");
        return;
    }
    const json& m = cfg.at("memory");
    check_keys(m, "memory", kMemoryKeys, errors);
    if (!m.is_object()) return;
    const double eta = num_or(m, "efficiency", 0.86);
    if (eta < 0.0 || eta > 1.0)
        errors.push_back("memory.efficiency: must lie in [0, 1]");
    if (num_or(m, "storage_lifetime_us", 5.0) <= 0.0)
        errors.push_back("memory.storage_lifetime_us: must be positive");
    if (m.contains("readout_likeness")) {
        const double v = m.at("readout_likeness").get<double>();
        if (v <= 0.0 || v > 1.0)
            errors.push_back("memory.readout_likeness: must lie in (0, 1]");
    }
}

void validate_sim_sources(const json& cfg, std::vector<std::string>& errors) {
    if (!cfg.contains("sources")) {
        errors.push_back("sources: required section is missing");
        return;
    }
    const json& s = cfg.at("sources");
    check_keys(s, "sources", {"source1", "source2"}, errors);
    if (!s.is_object()) return;
    for (const char* name : {"source1", "source2"}) {
        if (!s.contains(name)) {
            errors.push_back(std::string("sources.") + name +
                             ": required section is missing");
            continue;
        }
        check_keys(s.at(name), std::string("sources.") + name, kSimSourceKeys, errors);
    }
}

SourceConfig source_from_json(const json& j) {
    SourceConfig cfg;
    cfg.pair_probability_per_window =
        num_or(j, "pair_probability_per_window", cfg.pair_probability_per_window);
    cfg.window_length_us = num_or(j, "window_length_us", cfg.window_length_us);
    cfg.repetition_rate_hz = num_or(j, "repetition_rate_hz", cfg.repetition_rate_hz);
    cfg.herald_efficiency = num_or(j, "herald_efficiency", cfg.herald_efficiency);
    cfg.as_detection_efficiency =
        num_or(j, "as_detection_efficiency", cfg.as_detection_efficiency);
    cfg.two_pair_ratio = num_or(j, "two_pair_ratio", cfg.two_pair_ratio);
    cfg.as_delay_mean_ns = num_or(j, "as_delay_mean_ns", cfg.as_delay_mean_ns);
    cfg.as_sigma_ns = num_or(j, "as_sigma_ns", cfg.as_sigma_ns);
    cfg.validate();
    return cfg;
}

MemoryChannel memory_from_json(const json& j) {
    MemoryChannel mem;
    mem.efficiency = num_or(j, "efficiency", 0.86);
    mem.storage_lifetime_us = num_or(j, "storage_lifetime_us", 5.0);
    mem.global_phase_rad = num_or(j, "global_phase_rad", 0.0);
    mem.validate();
    return mem;
}

TimeGrid grid_from_json(const json& j) {
    return TimeGrid(num_or(j, "start_ns", 0.0), num_or(j, "step_ns", 2.0),
                    std::size_t(int_or(j, "count", 1000)));
}

BeamSplitter beamsplitter_from_json(const json& j) {
    BeamSplitter bs{num_or(j, "transmission", 0.5), num_or(j, "reflection", 0.5)};
    bs.validate();
    return bs;
}

// --- output plumbing --------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
    }
    fs::rename(tmp, path);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string histogram_csv(const CoincidenceHistogram& h, const std::string& x_name,
                          const std::string& y_name, bool poisson_errors) {
    std::string out = x_name + "," + y_name;
    if (poisson_errors) out += ",error";
    out += "\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        out += format_number(h.bin_center(i)) + "," + format_number(h.counts[i]);
        if (poisson_errors) out += "," + format_number(std::sqrt(h.counts[i]));
        out += "\n";
    }
    return out;
}

struct Emitter {
    fs::path dir;
    std::vector<std::string> written;
    void emit(const std::string& name, const std::string& content) {
        write_file_atomic(dir / name, content);
        written.push_back((dir / name).string());
    }
};

// --- shared calibration pieces ----------------------------------------------

// Center offset whose discrete likeness on this grid equals the target.
double offset_for_discrete_likeness(const TimeGrid& grid, double center_ns,
                                    double fwhm_ns, double target) {
    const auto w = make_gaussian_wavepacket(grid, center_ns, fwhm_ns);
    double lo = 0.0, hi = fwhm_ns;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto ws = make_gaussian_wavepacket(grid, center_ns + mid, fwhm_ns);
        (likeness(w, ws) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> scan_delays(const json& scan) {
    const double lo = num_or(scan, "delay_min_ns", -1500.0);
    const double hi = num_or(scan, "delay_max_ns", 1500.0);
    const double step = num_or(scan, "delay_step_ns", 150.0);
    if (step <= 0.0 || hi <= lo)
        throw std::invalid_argument("scan: need delay_min < delay_max and step > 0");
    std::vector<double> delays;
    for (double d = lo; d <= hi + 1e-9; d += step) delays.push_back(d);
    return delays;
}

// --- scenarios ---------------------------------------------------------------

ordered_json run_hom_dip(const json& cfg, std::uint64_t seed, Emitter& out) {
    const TimeGrid grid = grid_from_json(section_or_empty(cfg, "grid"));
    const json wp = section_or_empty(cfg, "wavepacket");
    const double center = num_or(wp, "center_ns", 999.0);
    const double fwhm = num_or(wp, "fwhm_ns", 320.0);
    const BeamSplitter bs = beamsplitter_from_json(section_or_empty(cfg, "beamsplitter"));
    const json src = section_or_empty(cfg, "source");
    const double like_src = num_or(src, "waveform_likeness", 0.982);
    const double lambda = num_or(src, "mode_overlap", 1.0);
    const double gbar2_conv = num_or(src, "gbar2_conventional", 0.385);
    const json memj = cfg.at("memory");
    const MemoryChannel mem = memory_from_json(memj);
    const double like_mem = num_or(memj, "readout_likeness", 0.985);
    const double gbar2_read = num_or(memj, "gbar2_readout", 0.43);
    const double storage_delay = num_or(memj, "storage_delay_ns", 700.0);
    const json scan = section_or_empty(cfg, "scan");
    const auto delays = scan_delays(scan);
    const double excl = num_or(scan, "baseline_exclusion_ns", 3.0 * fwhm);

    // conventional: two source wavepackets with the calibrated mismatch
    const double d_src = offset_for_discrete_likeness(grid, center, fwhm, like_src);
    const auto w1 = make_gaussian_wavepacket(grid, center, fwhm);
    const auto w2 = make_gaussian_wavepacket(grid, center + d_src, fwhm);
    const SourceDistinguishability conv_dist{lambda, gbar2_conv};
    const auto conv_scan = hom_dip_scan(w1, w2, bs, conv_dist, delays);
    const double v_conv = visibility(conv_scan, excl);

    const double o2_conv = std::norm(overlap(w1, w2));
    const double tt = bs.transmission, rr = bs.reflection;
    auto analytic_v = [&](double o2, double g2) {
        return 2.0 * tt * rr * lambda * o2 / (tt * tt + rr * rr + tt * rr * g2);
    };

    // synchronized: source 2 goes through the memory; the readout-likeness
    // budget is realized as extra temporal mismatch combined in quadrature
    // with the source offset, so the aligned overlap equals the product
    // like_src * like_mem
    const double d_mem = offset_for_discrete_likeness(grid, center, fwhm, like_mem);
    const double d_tot = std::sqrt(d_src * d_src + d_mem * d_mem);
    const auto rt = roundtrip(w2, mem, storage_delay);
    const double energy_ratio = rt.photon.energy();
    const auto w2_sync = rt.photon.normalized();
    const auto w1_sync = make_gaussian_wavepacket(
        rt.photon.grid, center + storage_delay - (d_tot - d_src), fwhm);
    const SourceDistinguishability sync_dist{lambda, gbar2_read};
    const auto sync_scan = hom_dip_scan(w1_sync, w2_sync, bs, sync_dist, delays);
    const double v_sync = visibility(sync_scan, excl);
    const double o2_sync = std::norm(overlap(w1_sync, w2_sync));

    out.emit("dip_conventional.csv",
             histogram_csv(conv_scan, "delay_ns", "fourfold_rate", false));
    out.emit("dip_synchronized.csv",
             histogram_csv(sync_scan, "delay_ns", "fourfold_rate", false));

    ordered_json summary;
    summary["scenario"] = "hom-dip";
    summary["seed"] = seed;
    summary["source_offset_ns"] = d_src;
    summary["overlap0_sq_conventional"] = o2_conv;
    summary["visibility_conventional"] = v_conv;
    summary["visibility_conventional_analytic"] = analytic_v(o2_conv, gbar2_conv);
    summary["overlap0_sq_synchronized"] = o2_sync;
    summary["overlap0_sq_budget"] = like_src * like_mem;
    summary["visibility_synchronized"] = v_sync;
    summary["visibility_synchronized_analytic"] = analytic_v(o2_sync, gbar2_read);
    summary["visibility_synchronized_reference"] = 0.76;
    summary["visibility_synchronized_residual"] = v_sync - 0.76;
    summary["roundtrip_energy_ratio"] = energy_ratio;
    return summary;
}

ordered_json run_step_phase(const json& cfg, std::uint64_t seed, Emitter& out) {
    const TimeGrid grid = grid_from_json(section_or_empty(cfg, "grid"));
    const json wp = section_or_empty(cfg, "wavepacket");
    const double center = num_or(wp, "center_ns", 999.0);
    const double fwhm = num_or(wp, "fwhm_ns", 320.0);
    const BeamSplitter bs = beamsplitter_from_json(section_or_empty(cfg, "beamsplitter"));
    const json src = section_or_empty(cfg, "source");
    const double like_src = num_or(src, "waveform_likeness", 0.982);
    const json stepj = section_or_empty(cfg, "step");
    const double margin = num_or(stepj, "exclusion_margin_ns", 25.0);
    const double halfspan = num_or(stepj, "window_halfspan_ns", 800.0);
    const double target_same = num_or(stepj, "target_same_half_ratio", 0.30);

    const DetectionWindow early{"early", center - halfspan, center};
    const DetectionWindow late{"late", center, center + halfspan};
    const StepExclusion excl{center, margin};

    auto ratios = [&](const TemporalWavepacket& a, const TemporalWavepacket& b,
                      double lam) {
        const auto gi = coincidence_density(a, b, bs, {lam, 0.0});
        const auto g0 = coincidence_density(a, b, bs, {0.0, 0.0});
        const double same_i = windowed_coincidence(gi, early, early, excl) +
                              windowed_coincidence(gi, late, late, excl);
        const double same_0 = windowed_coincidence(g0, early, early, excl) +
                              windowed_coincidence(g0, late, late, excl);
        const double cross_i = windowed_coincidence(gi, early, late, excl) +
                               windowed_coincidence(gi, late, early, excl);
        const double cross_0 = windowed_coincidence(g0, early, late, excl) +
                               windowed_coincidence(g0, late, early, excl);
        return std::pair<double, double>{same_i / same_0, cross_i / cross_0};
    };

    const auto step_pi = PhaseProgram::step(center, 0.0, M_PI);
    const auto w1 = make_gaussian_wavepacket(grid, center, fwhm);
    const auto w2_ideal = apply_phase(w1, step_pi);
    const auto [same_ideal, cross_ideal] = ratios(w1, w2_ideal, 1.0);

    // calibrated: temporal mismatch from the source likeness, then the mode
    // overlap set so the same-half ratio hits its target (the windowed ratio
    // is linear in lambda)
    const double d_src = offset_for_discrete_likeness(grid, center, fwhm, like_src);
    const auto w2_env = make_gaussian_wavepacket(grid, center + d_src, fwhm);
    const auto w2_real = apply_phase(w2_env, step_pi);
    const auto [same_full, cross_full] = ratios(w1, w2_real, 1.0);
    (void)cross_full;
    const double lambda_cal = (1.0 - target_same) / (1.0 - same_full);
    const auto [same_cal, cross_cal] = ratios(w1, w2_real, lambda_cal);

    std::string csv = "window_pair,ratio_ideal,ratio_calibrated\n";
    csv += "same_half," + format_number(same_ideal) + "," + format_number(same_cal) + "\n";
    csv += "cross_half," + format_number(cross_ideal) + "," + format_number(cross_cal) + "\n";
    out.emit("step_phase_ratios.csv", csv);

    ordered_json summary;
    summary["scenario"] = "step-phase";
    summary["seed"] = seed;
    summary["exclusion_margin_ns"] = margin;
    summary["same_half_ratio_ideal"] = same_ideal;
    summary["cross_half_ratio_ideal"] = cross_ideal;
    summary["lambda_calibrated"] = lambda_cal;
    summary["same_half_ratio_calibrated"] = same_cal;
    summary["cross_half_ratio_calibrated"] = cross_cal;
    return summary;
}

ordered_json run_linear_phase(const json& cfg, std::uint64_t seed, Emitter& out) {
    const TimeGrid grid = grid_from_json(section_or_empty(cfg, "grid"));
    const json wp = section_or_empty(cfg, "wavepacket");
    const double center = num_or(wp, "center_ns", 999.0);
    const double fwhm = num_or(wp, "fwhm_ns", 320.0);
    const BeamSplitter bs = beamsplitter_from_json(section_or_empty(cfg, "beamsplitter"));
    const json modj = section_or_empty(cfg, "modulation");
    const double span_rad = num_or(modj, "span_pi", 4.0) * M_PI;
    const double duration = num_or(modj, "duration_ns", 540.0);
    const double binwidth = num_or(section_or_empty(cfg, "beat"), "binwidth_ns", 18.0);
    const json memj = section_or_empty(cfg, "memory");
    MemoryChannel mem = memory_from_json(memj);
    const double storage_delay = num_or(memj, "storage_delay_ns", 700.0);

    // ramp centered on the retarded wavepacket center
    const double u_center = center - grid.start_ns;
    mem.control.read_phase =
        PhaseProgram::linear_span(u_center - duration / 2.0, span_rad, duration);

    const auto w_src = make_gaussian_wavepacket(grid, center, fwhm);
    const auto rt = roundtrip(w_src, mem, storage_delay);
    const auto w2_mod = rt.photon.normalized();
    const auto w1_ref =
        make_gaussian_wavepacket(rt.photon.grid, center + storage_delay, fwhm);

    const auto beat = beat_profile(w1_ref, w2_mod, bs, {1.0, 0.0}, binwidth);
    const double period = first_local_minimum_after(beat, binwidth);

    const double ramp_lo = grid.start_ns + storage_delay + u_center - duration / 2.0;
    const double dnu_mhz =
        estimate_frequency_offset_mhz(w2_mod, ramp_lo, ramp_lo + duration);

    out.emit("beat_profile.csv",
             histogram_csv(beat, "detection_delay_ns", "coincidence_rate", false));

    ordered_json summary;
    summary["scenario"] = "linear-phase";
    summary["seed"] = seed;
    summary["modulation_span_rad"] = span_rad;
    summary["modulation_duration_ns"] = duration;
    summary["binwidth_ns"] = binwidth;
    summary["beat_period_ns"] = period;
    summary["delta_nu_mhz"] = dnu_mhz;
    summary["roundtrip_energy_ratio"] = rt.photon.energy();
    return summary;
}

ordered_json run_sync_rates(const json& cfg, std::uint64_t seed, Emitter& out) {
    const json sources = cfg.at("sources");
    const SourceConfig s1 = source_from_json(sources.at("source1"));
    const SourceConfig s2 = source_from_json(sources.at("source2"));
    const json protoj = section_or_empty(cfg, "protocol");
    ProtocolConfig proto;
    proto.memory = memory_from_json(cfg.at("memory"));
    proto.coincidence_window_ns = num_or(protoj, "coincidence_window_ns", 640.0);
    proto.passive_overlap_ns = num_or(protoj, "passive_overlap_ns", 320.0);
    proto.readout_delay_step_ns = num_or(protoj, "readout_delay_step_ns", 150.0);
    proto.survival_seed = seed ^ 0x517cc1b727220a95ull;
    const auto windows = std::uint64_t(int_or(cfg, "windows", 200000));
    const double duration = double(windows) / s1.repetition_rate_hz;

    const auto stream = simulate_sources(s1, s2, seed, duration);

    ProtocolConfig conv = proto;
    conv.mode = ProtocolMode::Conventional;
    const SimReport rep_conv = run_protocol(stream, conv);
    ProtocolConfig memp = proto;
    memp.mode = ProtocolMode::MemoryAssisted;
    const SimReport rep_mem = compare_protocols(stream, memp);

    std::vector<double> delays;
    for (double d = -1500.0; d <= 1500.0 + 1e-9; d += proto.readout_delay_step_ns)
        delays.push_back(d);
    const auto sweep = sweep_storage_time(stream, memp, delays);

    out.emit("sync_report.kv", rep_mem.to_kv());
    out.emit("storage_sweep.csv",
             histogram_csv(sweep, "readout_delay_ns", "fourfold_counts", true));

    ordered_json summary;
    summary["scenario"] = "sync-rates";
    summary["seed"] = seed;
    summary["windows"] = windows;
    summary["count_conventional"] = rep_conv.fourfold_count;
    summary["count_memory"] = rep_mem.fourfold_count;
    summary["rate_conventional_hz"] = rep_conv.fourfold_rate_hz;
    summary["rate_memory_hz"] = rep_mem.fourfold_rate_hz;
    if (rep_mem.improvement_factor)
        summary["improvement_factor"] = *rep_mem.improvement_factor;
    summary["expected_improvement"] = expected_improvement(s1, memp);
    return summary;
}

ordered_json run_analyze_tags(const json& cfg, std::uint64_t seed, Emitter& out) {
    const std::string path = cfg.at("input_path").get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("analyze-tags: cannot open " + path);
    TimeTagStream stream;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        stream = parse_tags_csv(in);
    else
        stream = parse_tags(in);

    ordered_json summary;
    summary["scenario"] = "analyze-tags";
    summary["seed"] = seed;
    summary["input_path"] = path;
    summary["records"] = stream.records.size();
    ordered_json per_channel = ordered_json::object();
    for (const auto& [ch, label] : stream.meta.channel_map)
        per_channel[label] = channel_times(stream, ch).size();
    summary["channel_counts"] = per_channel;

    if (cfg.contains("pairwise")) {
        for (const auto& p : cfg.at("pairwise")) {
            const int a = int(int_or(p, "channel_a", 0));
            const int b = int(int_or(p, "channel_b", 1));
            const auto h = coincidences(stream, a, b, int_or(p, "binwidth_ns", 32),
                                        int_or(p, "span_ns", 2000));
            out.emit("coincidences_" + std::to_string(a) + "_" + std::to_string(b) +
                         ".csv",
                     histogram_csv(h, "delay_ns", "counts", true));
        }
    }
    if (cfg.contains("g2")) {
        const json& g = cfg.at("g2");
        const auto est = conditional_g2(stream, int(int_or(g, "herald_channel", 0)),
                                        int(int_or(g, "split_channel_a", 1)),
                                        int(int_or(g, "split_channel_b", 2)),
                                        int_or(g, "window_ns", 640));
        ordered_json gj;
        gj["value"] = est.value;
        gj["heralds"] = est.heralds;
        gj["herald_a"] = est.herald_a;
        gj["herald_b"] = est.herald_b;
        gj["herald_ab"] = est.herald_ab;
        gj["insufficient_statistics"] = est.insufficient_statistics;
        summary["g2"] = gj;
    }
    if (cfg.contains("fourfold")) {
        const json& f = cfg.at("fourfold");
        FourfoldSpec spec;
        spec.herald_delta_lo_ns = int_or(f, "herald_delta_lo_ns", -160);
        spec.herald_delta_hi_ns = int_or(f, "herald_delta_hi_ns", 160);
        spec.as1_gate_lo_ns = int_or(f, "as1_gate_lo_ns", 0);
        spec.as1_gate_hi_ns = int_or(f, "as1_gate_hi_ns", 640);
        spec.as2_gate_lo_ns = int_or(f, "as2_gate_lo_ns", 0);
        spec.as2_gate_hi_ns = int_or(f, "as2_gate_hi_ns", 640);
        if (f.contains("transition_rel_ns"))
            spec.transition_rel_ns = f.at("transition_rel_ns").get<std::int64_t>();
        spec.exclusion_margin_ns = int_or(f, "exclusion_margin_ns", 0);
        spec.hist_binwidth_ns = int_or(f, "hist_binwidth_ns", 32);
        spec.hist_span_ns = int_or(f, "hist_span_ns", 2000);
        const auto res = fourfold_count(stream, spec);
        summary["fourfold_count"] = res.count;
        out.emit("fourfold_delta_as.csv",
                 histogram_csv(res.delta_as, "delta_as_ns", "counts", true));
    }
    return summary;
}

} // namespace

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
}

std::vector<std::string> validate_config(const json& cfg) {
    std::vector<std::string> errors;
    if (!cfg.is_object()) {
        errors.push_back("config: expected a JSON object");
        return errors;
    }
    if (!cfg.contains("scenario") || !cfg.at("scenario").is_string()) {
        errors.push_back("scenario: required string key is missing");
        return errors;
    }
    const std::string scenario = cfg.at("scenario").get<std::string>();
    const std::set<std::string> known = {"hom-dip", "step-phase", "linear-phase",
                                         "sync-rates", "analyze-tags"};
    if (!known.count(scenario)) {
        errors.push_back("scenario: unknown scenario '" + scenario + "'");
        return errors;
    }
    if (cfg.contains("seed") &&
        (!cfg.at("seed").is_number_integer() || cfg.at("seed").get<std::int64_t>() < 0))
        errors.push_back("seed: expected a non-negative integer");

    const std::set<std::string> common = {"scenario", "seed", "output_dir"};
    auto allow = [&](std::set<std::string> extra) {
        extra.insert(common.begin(), common.end());
        return extra;
    };

    if (scenario == "hom-dip") {
        check_keys(cfg, "config",
                   allow({"grid", "wavepacket", "beamsplitter", "source", "memory",
                          "scan"}),
                   errors);
        validate_common_optics(cfg, errors);
        if (cfg.contains("source"))
            check_keys(cfg.at("source"), "source", kSourceKeys, errors);
        if (cfg.contains("scan"))
            check_keys(cfg.at("scan"), "scan", kScanKeys, errors);
        validate_memory_section(cfg, /*required=*/true, errors);
    } else if (scenario == "step-phase") {
        check_keys(cfg, "config",
                   allow({"grid", "wavepacket", "beamsplitter", "source", "step"}),
                   errors);
        validate_common_optics(cfg, errors);
        if (cfg.contains("source"))
            check_keys(cfg.at("source"), "source",
                       {"waveform_likeness", "mode_overlap"}, errors);
        if (cfg.contains("step"))
            check_keys(cfg.at("step"), "step", kStepKeys, errors);
    } else if (scenario == "linear-phase") {
        check_keys(cfg, "config",
                   allow({"grid", "wavepacket", "beamsplitter", "memory", "modulation",
                          "beat"}),
                   errors);
        validate_common_optics(cfg, errors);
        validate_memory_section(cfg, /*required=*/false, errors);
        if (cfg.contains("modulation"))
            check_keys(cfg.at("modulation"), "modulation", kModulationKeys, errors);
        if (cfg.contains("beat")) {
            check_keys(cfg.at("beat"), "beat", kBeatKeys, errors);
            if (num_or(cfg.at("beat"), "binwidth_ns", 18.0) <= 0.0)
                errors.push_back("beat.binwidth_ns: must be positive");
        }
    } else if (scenario == "sync-rates") {
        check_keys(cfg, "config", allow({"sources", "protocol", "memory", "windows"}),
                   errors);
        validate_sim_sources(cfg, errors);
        validate_memory_section(cfg, /*required=*/true, errors);
        if (cfg.contains("protocol"))
            check_keys(cfg.at("protocol"), "protocol", kProtocolKeys, errors);
        if (cfg.contains("windows") && int_or(cfg, "windows", 1) < 1)
            errors.push_back("windows: must be a positive integer");
    } else if (scenario == "analyze-tags") {
        check_keys(cfg, "config", allow({"input_path", "pairwise", "g2", "fourfold"}),
                   errors);
        if (!cfg.contains("input_path") || !cfg.at("input_path").is_string())
            errors.push_back("input_path: required string key is missing");
        if (cfg.contains("pairwise")) {
            if (!cfg.at("pairwise").is_array()) {
                errors.push_back("pairwise: expected an array");
            } else {
                std::size_t i = 0;
                for (const auto& p : cfg.at("pairwise"))
                    check_keys(p, "pairwise[" + std::to_string(i++) + "]",
                               kPairwiseKeys, errors);
            }
        }
        if (cfg.contains("g2")) check_keys(cfg.at("g2"), "g2", kG2Keys, errors);
        if (cfg.contains("fourfold"))
            check_keys(cfg.at("fourfold"), "fourfold", kFourfoldKeys, errors);
    }
    return errors;
}

ScenarioResult run_scenario(const json& config, const std::string& out_dir,
                            const RunOverrides& overrides) {
    json cfg = config;
    if (overrides.scenario) cfg["scenario"] = *overrides.scenario;
    if (overrides.seed) cfg["seed"] = std::int64_t(*overrides.seed);

    const auto errors = validate_config(cfg);
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }

    const std::string scenario = cfg.at("scenario").get<std::string>();
    const auto seed = std::uint64_t(int_or(cfg, "seed", 1));

    Emitter out;
    out.dir = out_dir;
    fs::create_directories(out.dir);

    ordered_json summary;
    if (scenario == "hom-dip")
        summary = run_hom_dip(cfg, seed, out);
    else if (scenario == "step-phase")
        summary = run_step_phase(cfg, seed, out);
    else if (scenario == "linear-phase")
        summary = run_linear_phase(cfg, seed, out);
    else if (scenario == "sync-rates")
        summary = run_sync_rates(cfg, seed, out);
    else
        summary = run_analyze_tags(cfg, seed, out);

    write_file_atomic(out.dir / "summary.json", summary.dump(2) + "\n");
    out.written.push_back((out.dir / "summary.json").string());

    if (!overrides.quiet) {
        for (const auto& f : out.written) std::cerr << "wrote " << f << "\n";
    }
    return {std::move(summary), std::move(out.written)};
}

} // namespace homsim
