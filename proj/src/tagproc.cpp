#include "homsim/tagproc.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace homsim {

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'T', '1'};
constexpr std::uint64_t kMaxTimestamp = (std::uint64_t(1) << 56) - 1;

std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
           std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint64_t read_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | p[i];
    return v;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char(v >> (8 * i) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char(v >> (8 * i) & 0xff));
}

// floor division for possibly negative numerators
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

void check_record(const TimeTagStream& s, const TimeTagRecord& rec,
                  std::size_t position) {
    if (rec.channel >= s.meta.channel_count)
        throw TagParseError("unknown channel " + std::to_string(int(rec.channel)),
                            position);
    if (rec.timestamp_ns < 0 ||
        rec.timestamp_ns % std::int64_t(s.meta.resolution_ns) != 0)
        throw TagParseError("timestamp " + std::to_string(rec.timestamp_ns) +
                                " violates the " +
                                std::to_string(s.meta.resolution_ns) +
                                " ns resolution",
                            position);
    if (!s.records.empty() && rec.timestamp_ns < s.records.back().timestamp_ns)
        throw TagParseError("non-monotonic timestamp " +
                                std::to_string(rec.timestamp_ns),
                            position);
}

} // namespace

void TimeTagStream::validate() const {
    std::int64_t prev = -1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.channel >= meta.channel_count)
            throw TagParseError("unknown channel " + std::to_string(int(r.channel)), i);
        if (r.timestamp_ns < prev)
            throw TagParseError("non-monotonic timestamp", i);
        if (r.timestamp_ns % std::int64_t(meta.resolution_ns) != 0)
            throw TagParseError("timestamp violates resolution", i);
        prev = r.timestamp_ns;
    }
}

void ChunkedTagParser::feed(const char* data, std::size_t size) {
    buffer_.append(data, size);
    consume();
}

void ChunkedTagParser::consume() {
    std::size_t pos = 0;
    if (!header_done_) {
        if (buffer_.size() < 20) return;
        const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data());
        if (std::memcmp(p, kMagic, 4) != 0)
            throw TagParseError("bad magic, expected QTT1", 0);
        stream_.meta.channel_count = read_u32(p + 4);
        records_expected_ = read_u64(p + 8);
        stream_.meta.resolution_ns = read_u32(p + 16);
        if (stream_.meta.channel_count == 0)
            throw TagParseError("channel count must be positive", 4);
        if (stream_.meta.resolution_ns == 0)
            throw TagParseError("resolution must be positive", 16);
        stream_.meta.channel_map.clear();
        for (std::uint32_t c = 0; c < stream_.meta.channel_count; ++c)
            stream_.meta.channel_map[int(c)] = "ch" + std::to_string(c);
        stream_.records.reserve(records_expected_);
        header_done_ = true;
        pos = 20;
    }
    while (buffer_.size() - pos >= 8) {
        if (stream_.records.size() == records_expected_)
            throw TagParseError("trailing bytes after the declared record count",
                                absolute_offset_ + pos);
        const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + pos);
        const std::uint64_t word = read_u64(p);
        TimeTagRecord rec;
        rec.channel = std::uint8_t(word & 0xff);
        rec.timestamp_ns = std::int64_t(word >> 8);
        check_record(stream_, rec, absolute_offset_ + pos);
        stream_.records.push_back(rec);
        pos += 8;
    }
    buffer_.erase(0, pos);
    absolute_offset_ += pos;
}

TimeTagStream ChunkedTagParser::finish() {
    if (!header_done_)
        throw TagParseError("truncated header (need 20 bytes)", absolute_offset_ + buffer_.size());
    if (!buffer_.empty())
        throw TagParseError("truncated record (partial trailing bytes)",
                            absolute_offset_ + buffer_.size());
    if (stream_.records.size() != records_expected_)
        throw TagParseError("record count mismatch: header declares " +
                                std::to_string(records_expected_) + ", found " +
                                std::to_string(stream_.records.size()),
                            absolute_offset_);
    return std::move(stream_);
}

TimeTagStream parse_tags(const std::string& bytes) {
    ChunkedTagParser p;
    p.feed(bytes.data(), bytes.size());
    return p.finish();
}

TimeTagStream parse_tags(std::istream& in) {
    ChunkedTagParser p;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        p.feed(buf, std::size_t(in.gcount()));
    return p.finish();
}

std::string write_tags(const TimeTagStream& s) {
    std::string out;
    out.reserve(20 + 8 * s.records.size());
    out.append(kMagic, 4);
    put_u32(out, s.meta.channel_count);
    put_u64(out, s.records.size());
    put_u32(out, s.meta.resolution_ns);
    for (const auto& r : s.records) {
        const std::uint64_t ts = std::uint64_t(r.timestamp_ns);
        if (ts > kMaxTimestamp)
            throw std::invalid_argument("write_tags: timestamp exceeds 56 bits");
        put_u64(out, ts << 8 | r.channel);
    }
    return out;
}

void write_tags(std::ostream& out, const TimeTagStream& s) {
    const std::string bytes = write_tags(s);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

TimeTagStream parse_tags_csv(std::istream& in) {
    TimeTagStream s;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) return s; // empty file: valid, empty stream
    ++line_no;
    if (line == "channel,timestamp_ns\r")
        throw TagParseError("CRLF line ending; the format requires LF", line_no);
    if (line != "channel,timestamp_ns")
        throw TagParseError("bad CSV header, expected 'channel,timestamp_ns'", line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            throw TagParseError("empty line", line_no);
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw TagParseError("malformed record '" + line + "'", line_no);
        TimeTagRecord rec;
        try {
            std::size_t used = 0;
            const int ch = std::stoi(line.substr(0, comma), &used);
            if (used != comma || ch < 0 || ch > 255) throw std::invalid_argument("");
            rec.channel = std::uint8_t(ch);
            const std::string ts = line.substr(comma + 1);
            rec.timestamp_ns = std::stoll(ts, &used);
            if (used != ts.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw TagParseError("malformed record '" + line + "'", line_no);
        }
        check_record(s, rec, line_no);
        s.records.push_back(rec);
    }
    return s;
}

void write_tags_csv(std::ostream& out, const TimeTagStream& s) {
    out << "channel,timestamp_ns\n";
    for (const auto& r : s.records)
        out << int(r.channel) << ',' << r.timestamp_ns << '\n';
}

std::vector<std::int64_t> channel_times(const TimeTagStream& s, int channel) {
    std::vector<std::int64_t> t;
    for (const auto& r : s.records)
        if (int(r.channel) == channel) t.push_back(r.timestamp_ns);
    return t;
}

CoincidenceHistogram coincidences(const TimeTagStream& s, int ch_a, int ch_b,
                                  std::int64_t binwidth_ns, std::int64_t span_ns) {
    if (ch_a == ch_b)
        throw std::invalid_argument("coincidences: channels must be distinct");
    if (binwidth_ns <= 0 || binwidth_ns % std::int64_t(s.meta.resolution_ns) != 0)
        throw std::invalid_argument(
            "coincidences: binwidth must be a positive multiple of the resolution");
    if (span_ns <= binwidth_ns)
        throw std::invalid_argument("coincidences: span must exceed the binwidth");

    const auto ta = channel_times(s, ch_a);
    const auto tb = channel_times(s, ch_b);
    const int k_max = int(floor_div(span_ns + binwidth_ns / 2, binwidth_ns));
    CoincidenceHistogram h = make_centered_histogram(double(binwidth_ns), k_max);

    std::size_t lo = 0;
    for (const std::int64_t a : ta) {
        while (lo < tb.size() && tb[lo] < a - span_ns) ++lo;
        for (std::size_t j = lo; j < tb.size() && tb[j] <= a + span_ns; ++j) {
            const std::int64_t delta = tb[j] - a;
            const int bin = int(floor_div(delta + binwidth_ns / 2, binwidth_ns));
            h.counts[std::size_t(bin + k_max)] += 1.0;
        }
    }
    return h;
}

namespace {

// Indices of sorted `times` within [lo, hi].
std::pair<std::size_t, std::size_t> range_in(const std::vector<std::int64_t>& times,
                                             std::int64_t lo, std::int64_t hi) {
    const auto b = std::lower_bound(times.begin(), times.end(), lo);
    const auto e = std::upper_bound(times.begin(), times.end(), hi);
    return {std::size_t(b - times.begin()), std::size_t(e - times.begin())};
}

} // namespace

G2Estimate conditional_g2(const TimeTagStream& s, int herald_ch, int split_ch_a,
                          int split_ch_b, std::int64_t window_ns) {
    if (herald_ch == split_ch_a || herald_ch == split_ch_b ||
        split_ch_a == split_ch_b)
        throw std::invalid_argument("conditional_g2: channels must be distinct");
    if (window_ns <= 0)
        throw std::invalid_argument("conditional_g2: window must be positive");

    const auto th = channel_times(s, herald_ch);
    const auto ta = channel_times(s, split_ch_a);
    const auto tb = channel_times(s, split_ch_b);

    G2Estimate e;
    for (const std::int64_t h : th) {
        ++e.heralds;
        const auto [a0, a1] = range_in(ta, h, h + window_ns);
        const auto [b0, b1] = range_in(tb, h, h + window_ns);
        const bool hit_a = a1 > a0, hit_b = b1 > b0;
        e.herald_a += hit_a;
        e.herald_b += hit_b;
        e.herald_ab += hit_a && hit_b;
    }
    e.insufficient_statistics = e.herald_a < 100 || e.herald_b < 100;
    if (e.herald_ab == 0 || e.herald_a == 0 || e.herald_b == 0) {
        e.value = 0.0;
        return e;
    }
    e.value = double(e.herald_ab) * double(e.heralds) /
              (double(e.herald_a) * double(e.herald_b));
    return e;
}

FourfoldResult fourfold_count(const TimeTagStream& s, const FourfoldSpec& spec) {
    if (spec.herald_delta_lo_ns > spec.herald_delta_hi_ns ||
        spec.as1_gate_lo_ns > spec.as1_gate_hi_ns ||
        spec.as2_gate_lo_ns > spec.as2_gate_hi_ns)
        throw std::invalid_argument("fourfold_count: malformed windows");

    const auto ts1 = channel_times(s, spec.ch_s1);
    const auto tas1 = channel_times(s, spec.ch_as1);
    const auto ts2 = channel_times(s, spec.ch_s2);
    const auto tas2 = channel_times(s, spec.ch_as2);

    FourfoldResult res;
    const int k_max =
        int(floor_div(spec.hist_span_ns + spec.hist_binwidth_ns / 2, spec.hist_binwidth_ns));
    res.delta_as = make_centered_histogram(double(spec.hist_binwidth_ns), k_max);

    // As-tags qualifying for a herald at t, honoring the exclusion margin.
    auto gated = [&](const std::vector<std::int64_t>& tas, std::int64_t t,
                     std::int64_t lo, std::int64_t hi) {
        auto [i0, i1] = range_in(tas, t + lo, t + hi);
        std::vector<std::int64_t> out;
        for (std::size_t i = i0; i < i1; ++i) {
            if (spec.transition_rel_ns &&
                std::llabs((tas[i] - t) - *spec.transition_rel_ns) <=
                    spec.exclusion_margin_ns)
                continue;
            out.push_back(tas[i]);
        }
        return out;
    };

    for (const std::int64_t t1 : ts1) {
        const auto [j0, j1] =
            range_in(ts2, t1 + spec.herald_delta_lo_ns, t1 + spec.herald_delta_hi_ns);
        if (j0 == j1) continue;
        const auto a1 = gated(tas1, t1, spec.as1_gate_lo_ns, spec.as1_gate_hi_ns);
        if (a1.empty()) continue;
        for (std::size_t j = j0; j < j1; ++j) {
            const auto a2 = gated(tas2, ts2[j], spec.as2_gate_lo_ns, spec.as2_gate_hi_ns);
            for (const std::int64_t x1 : a1)
                for (const std::int64_t x2 : a2) {
                    ++res.count;
                    const std::int64_t d = x2 - x1;
                    if (std::llabs(d) <= spec.hist_span_ns) {
                        const int bin = int(floor_div(d + spec.hist_binwidth_ns / 2,
                                                      spec.hist_binwidth_ns));
                        res.delta_as.counts[std::size_t(bin + k_max)] += 1.0;
                    }
                }
        }
    }
    return res;
}

} // namespace homsim
