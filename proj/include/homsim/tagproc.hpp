#pragma once

// Multi-channel time-tag streams: ingestion, validation, serialization and
// counting statistics (pairwise coincidences, heralded g2, fourfolds).
//
// Binary format "QTT1", little-endian:
//   bytes 0..3   magic "QTT1"
//   u32          channel count
//   u64          record count
//   u32          resolution in ns
//   then one u64 per record: bits 0..7 channel, bits 8..63 timestamp in ns
//     (a u8/u56 pair packed without padding; timestamps < 2^56).
// Text variant: CSV with header "channel,timestamp_ns", LF line endings,
// no trailing whitespace.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/histogram.hpp"

namespace homsim {

struct TimeTagRecord {
    std::uint8_t channel = 0;
    std::int64_t timestamp_ns = 0;

    bool operator==(const TimeTagRecord&) const = default;
};

struct StreamMetadata {
    std::uint32_t channel_count = 4;
    std::uint32_t resolution_ns = 2;
    std::map<int, std::string> channel_map = {
        {0, "s1"}, {1, "as1"}, {2, "s2"}, {3, "as2"}};
    // Filled by the simulator; zero when read from a file.
    double window_length_us = 0.0;
    double repetition_rate_hz = 0.0;
    double duration_s = 0.0;
};

struct TimeTagStream {
    std::vector<TimeTagRecord> records;
    StreamMetadata meta;

    void validate() const; // ordering, resolution, channel range
};

// --- Serialization ---------------------------------------------------------

TimeTagStream parse_tags(std::istream& in);
TimeTagStream parse_tags(const std::string& bytes);
void write_tags(std::ostream& out, const TimeTagStream& s);
std::string write_tags(const TimeTagStream& s);

TimeTagStream parse_tags_csv(std::istream& in);
void write_tags_csv(std::ostream& out, const TimeTagStream& s);

// Incremental binary parser; feed() accepts arbitrary chunk boundaries and
// finish() returns the completed stream. Chunked parsing is byte-for-byte
// equivalent to whole-buffer parsing.
class ChunkedTagParser {
public:
    void feed(const char* data, std::size_t size);
    TimeTagStream finish();

private:
    void consume();
    std::string buffer_;
    std::size_t absolute_offset_ = 0;
    bool header_done_ = false;
    std::uint64_t records_expected_ = 0;
    TimeTagStream stream_;
};

// --- Counting --------------------------------------------------------------

// Histogram of t_B - t_A over all pairs with |delta| <= span, binned into
// bins centered on multiples of binwidth. Single pass, sliding window.
CoincidenceHistogram coincidences(const TimeTagStream& s, int ch_a, int ch_b,
                                  std::int64_t binwidth_ns, std::int64_t span_ns);

struct G2Estimate {
    double value = 0.0;
    std::uint64_t heralds = 0;
    std::uint64_t herald_a = 0;
    std::uint64_t herald_b = 0;
    std::uint64_t herald_ab = 0;
    bool insufficient_statistics = false;
};

// Heralded second-order autocorrelation over gates [t_h, t_h + window]:
// g2 = N_hAB * N_h / (N_hA * N_hB). The insufficient flag is raised when a
// denominator count is below 100.
G2Estimate conditional_g2(const TimeTagStream& s, int herald_ch, int split_ch_a,
                          int split_ch_b, std::int64_t window_ns);

// Fourfold extraction: one tag per channel, herald pair within the delta
// acceptance, each anti-Stokes tag gated relative to its own herald. The
// optional transition/margin pair drops anti-Stokes tags within +-margin of
// the transition (measured relative to the herald).
struct FourfoldSpec {
    int ch_s1 = 0, ch_as1 = 1, ch_s2 = 2, ch_as2 = 3;
    // acceptance for t_s2 - t_s1
    std::int64_t herald_delta_lo_ns = -160;
    std::int64_t herald_delta_hi_ns = 160;
    // gates for t_as - t_s, per source
    std::int64_t as1_gate_lo_ns = 0, as1_gate_hi_ns = 640;
    std::int64_t as2_gate_lo_ns = 0, as2_gate_hi_ns = 640;
    std::optional<std::int64_t> transition_rel_ns; // relative to the herald
    std::int64_t exclusion_margin_ns = 0;
    // histogram of delta t_as = t_as2 - t_as1
    std::int64_t hist_binwidth_ns = 32;
    std::int64_t hist_span_ns = 2000;
};

struct FourfoldResult {
    std::uint64_t count = 0;
    CoincidenceHistogram delta_as;
};

FourfoldResult fourfold_count(const TimeTagStream& s, const FourfoldSpec& spec);

// Timestamps of one channel, in stream order.
std::vector<std::int64_t> channel_times(const TimeTagStream& s, int channel);

} // namespace homsim
