#include "homsim/signal.hpp"

#include <algorithm>
#include <cmath>

namespace homsim {

namespace {

constexpr double kTwoLn2 = 2.0 * 0.6931471805599453;

double trapezoid_weight(std::size_t k, std::size_t n) {
    return (k == 0 || k + 1 == n) ? 0.5 : 1.0;
}

} // namespace

TimeGrid::TimeGrid(double start, double step, std::size_t n)
    : start_ns(start), step_ns(step), count(n) {
    if (!(step_ns > 0.0))
        throw std::invalid_argument("TimeGrid: step must be positive");
    if (count < 2)
        throw std::invalid_argument("TimeGrid: need at least two samples");
}

TemporalWavepacket::TemporalWavepacket(TimeGrid g, std::vector<cplx> a)
    : grid(g), amplitude(std::move(a)) {
    if (amplitude.size() != grid.count)
        throw std::invalid_argument(
            "TemporalWavepacket: amplitude length does not match grid count");
}

double TemporalWavepacket::energy() const {
    double e = 0.0;
    const std::size_t n = amplitude.size();
    for (std::size_t k = 0; k < n; ++k)
        e += trapezoid_weight(k, n) * std::norm(amplitude[k]);
    return e * grid.step_ns;
}

bool TemporalWavepacket::is_normalized(double tol) const {
    return std::abs(energy() - 1.0) <= tol;
}

TemporalWavepacket TemporalWavepacket::normalized() const {
    const double e = energy();
    if (e <= 0.0)
        throw std::invalid_argument("normalized: wavepacket has zero energy");
    TemporalWavepacket out = *this;
    const double s = 1.0 / std::sqrt(e);
    for (auto& a : out.amplitude) a *= s;
    return out;
}

PhaseProgram PhaseProgram::constant(double phi0) {
    return PhaseProgram(Kind::Constant, phi0, 0, 0);
}

PhaseProgram PhaseProgram::step(double t_s, double lo, double hi) {
    PhaseProgram p(Kind::Step, t_s, lo, hi);
    return p;
}

PhaseProgram PhaseProgram::linear(double t0, double rate, double span) {
    if (rate == 0.0 && span != 0.0)
        throw std::invalid_argument("PhaseProgram::linear: zero rate with nonzero span");
    if (rate != 0.0 && span / rate < 0.0)
        throw std::invalid_argument("PhaseProgram::linear: span and rate disagree in sign");
    return PhaseProgram(Kind::Linear, t0, rate, span);
}

PhaseProgram PhaseProgram::linear_span(double t0, double span, double duration) {
    if (!(duration > 0.0))
        throw std::invalid_argument("PhaseProgram::linear_span: duration must be positive");
    return linear(t0, span / duration, span);
}

PhaseProgram PhaseProgram::piecewise(std::vector<std::pair<double, double>> pts) {
    if (pts.empty())
        throw std::invalid_argument("PhaseProgram::piecewise: empty breakpoint list");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i - 1].first < pts[i].first))
            throw std::invalid_argument(
                "PhaseProgram::piecewise: breakpoints must be strictly increasing");
    PhaseProgram p(Kind::Piecewise, 0, 0, 0);
    p.points_ = std::move(pts);
    return p;
}

double PhaseProgram::eval(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return p1_;
    case Kind::Step:
        return t < p1_ ? p2_ : p3_;
    case Kind::Linear: {
        const double u = t - p1_;
        if (u <= 0.0 || p2_ == 0.0) return 0.0;
        const double duration = p3_ / p2_;
        return u >= duration ? p3_ : p2_ * u;
    }
    case Kind::Piecewise: {
        if (t <= points_.front().first) return points_.front().second;
        if (t >= points_.back().first) return points_.back().second;
        auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double v, const auto& pt) { return v < pt.first; });
        auto lo = hi - 1;
        const double f = (t - lo->first) / (hi->first - lo->first);
        return lo->second + f * (hi->second - lo->second);
    }
    }
    return 0.0;
}

void ControlEnvelope::validate() const {
    if (!(write_amplitude_rad_per_ns > 0.0))
        throw std::invalid_argument("ControlEnvelope: write amplitude must be positive");
    for (std::size_t i = 0; i < read_amplitude.size(); ++i) {
        if (read_amplitude[i].second < 0.0)
            throw std::invalid_argument("ControlEnvelope: read amplitude must be >= 0");
        if (i > 0 && !(read_amplitude[i - 1].first < read_amplitude[i].first))
            throw std::invalid_argument(
                "ControlEnvelope: read amplitude samples must be strictly increasing in time");
    }
}

double ControlEnvelope::read_amplitude_at(double t) const {
    if (read_amplitude.empty()) return write_amplitude_rad_per_ns;
    if (t <= read_amplitude.front().first) return read_amplitude.front().second;
    if (t >= read_amplitude.back().first) return read_amplitude.back().second;
    auto hi = std::upper_bound(read_amplitude.begin(), read_amplitude.end(), t,
                               [](double v, const auto& pt) { return v < pt.first; });
    auto lo = hi - 1;
    const double f = (t - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
}

TemporalWavepacket make_gaussian_wavepacket(const TimeGrid& grid, double center_ns,
                                            double fwhm_ns) {
    if (!(fwhm_ns > 0.0))
        throw std::invalid_argument("make_gaussian_wavepacket: fwhm must be positive");

    // Intensity FWHM f means intensity sigma = f / (2 sqrt(2 ln 2)).
    const double sigma_i = fwhm_ns / (2.0 * std::sqrt(kTwoLn2));

    // Energy fraction clipped by the grid edges, from the Gaussian tail.
    const double lo = (center_ns - grid.start_ns) / (sigma_i * std::sqrt(2.0));
    const double hi = (grid.end_ns() - center_ns) / (sigma_i * std::sqrt(2.0));
    const double clipped = 0.5 * std::erfc(lo) + 0.5 * std::erfc(hi);
    if (clipped > 1e-6)
        throw SupportExceedsGridError(
            "make_gaussian_wavepacket: pulse support exceeds grid (clipped fraction " +
            std::to_string(clipped) + ")");

    std::vector<cplx> amp(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) {
        const double u = grid.time(k) - center_ns;
        amp[k] = std::exp(-u * u / (4.0 * sigma_i * sigma_i));
    }
    return TemporalWavepacket(grid, std::move(amp)).normalized();
}

cplx overlap(const TemporalWavepacket& a, const TemporalWavepacket& b) {
    if (!(a.grid == b.grid))
        throw GridMismatchError("overlap: wavepackets live on different grids");
    cplx acc = 0.0;
    const std::size_t n = a.amplitude.size();
    for (std::size_t k = 0; k < n; ++k)
        acc += trapezoid_weight(k, n) * std::conj(a.amplitude[k]) * b.amplitude[k];
    return acc * a.grid.step_ns;
}

cplx overlap_at_delay(const TemporalWavepacket& a, const TemporalWavepacket& b,
                      double delay_ns) {
    if (!(a.grid == b.grid))
        throw GridMismatchError("overlap_at_delay: wavepackets live on different grids");
    const std::size_t n = a.amplitude.size();
    const double step = a.grid.step_ns;
    const double shift = delay_ns / step;
    const double rounded = std::round(shift);
    // Rectangle rule: the truncation window moves with the delay, and equal
    // weights keep overlap_at_delay(a,b,d) == conj(overlap_at_delay(b,a,-d))
    // exactly on lattice delays.
    cplx acc = 0.0;
    if (std::abs(shift - rounded) < 1e-9) {
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(rounded);
        for (std::size_t k = 0; k < n; ++k) {
            const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(k) + m;
            if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
            acc += std::conj(a.amplitude[k]) * b.amplitude[static_cast<std::size_t>(j)];
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            const double x = double(k) + shift;
            const double fl = std::floor(x);
            const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(fl);
            if (j < -1 || j >= static_cast<std::ptrdiff_t>(n)) continue;
            const double f = x - fl;
            cplx bv = 0.0;
            if (j >= 0) bv += (1.0 - f) * b.amplitude[static_cast<std::size_t>(j)];
            if (j + 1 >= 0 && j + 1 < static_cast<std::ptrdiff_t>(n))
                bv += f * b.amplitude[static_cast<std::size_t>(j + 1)];
            acc += std::conj(a.amplitude[k]) * bv;
        }
    }
    return acc * step;
}

double likeness(const TemporalWavepacket& a, const TemporalWavepacket& b) {
    if (!(a.grid == b.grid))
        throw GridMismatchError("likeness: wavepackets live on different grids");
    if (!a.is_normalized() || !b.is_normalized())
        throw std::invalid_argument("likeness: inputs must be normalized");
    double acc = 0.0;
    const std::size_t n = a.amplitude.size();
    for (std::size_t k = 0; k < n; ++k)
        acc += trapezoid_weight(k, n) * std::abs(a.amplitude[k]) * std::abs(b.amplitude[k]);
    acc *= a.grid.step_ns;
    return acc * acc;
}

TemporalWavepacket apply_phase(const TemporalWavepacket& w, const PhaseProgram& p) {
    TemporalWavepacket out = w;
    for (std::size_t k = 0; k < out.amplitude.size(); ++k) {
        const double phi = p.eval(w.grid.time(k));
        if (phi == 0.0) continue;
        out.amplitude[k] *= cplx(std::cos(phi), -std::sin(phi));
    }
    return out;
}

double estimate_frequency_offset_mhz(const TemporalWavepacket& w, double t_lo_ns,
                                     double t_hi_ns) {
    double num = 0.0, den = 0.0;
    const std::size_t n = w.amplitude.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double t = w.grid.time(k);
        if (t < t_lo_ns || w.grid.time(k + 1) > t_hi_ns) continue;
        const cplx prod = w.amplitude[k + 1] * std::conj(w.amplitude[k]);
        const double weight = std::abs(prod);
        if (weight == 0.0) continue;
        num += weight * std::arg(prod);
        den += weight;
    }
    if (den == 0.0)
        throw std::invalid_argument(
            "estimate_frequency_offset_mhz: no amplitude inside the window");
    const double slope_rad_per_ns = num / den / w.grid.step_ns;
    // rad/ns -> GHz is /(2 pi); report MHz. Sign: exp(-i r t) advances by -r.
    return -slope_rad_per_ns / (2.0 * M_PI) * 1e3;
}

} // namespace homsim
