#include "homsim/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace homsim {

double CoincidenceHistogram::total() const {
    double t = 0.0;
    for (double c : counts) t += c;
    return t;
}

void CoincidenceHistogram::merge(const CoincidenceHistogram& other) {
    if (bin_edges_ns != other.bin_edges_ns)
        throw std::invalid_argument("CoincidenceHistogram::merge: bin edges differ");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

void CoincidenceHistogram::validate() const {
    if (bin_edges_ns.size() != counts.size() + 1)
        throw std::invalid_argument("CoincidenceHistogram: edges must be counts+1");
    for (std::size_t i = 1; i < bin_edges_ns.size(); ++i)
        if (!(bin_edges_ns[i - 1] < bin_edges_ns[i]))
            throw std::invalid_argument("CoincidenceHistogram: edges must increase");
    for (double c : counts)
        if (c < 0.0)
            throw std::invalid_argument("CoincidenceHistogram: negative count");
}

CoincidenceHistogram make_centered_histogram(double binwidth_ns, int k_max) {
    if (!(binwidth_ns > 0.0) || k_max < 0)
        throw std::invalid_argument("make_centered_histogram: bad parameters");
    CoincidenceHistogram h;
    const int nbins = 2 * k_max + 1;
    h.counts.assign(nbins, 0.0);
    h.bin_edges_ns.resize(nbins + 1);
    for (int i = 0; i <= nbins; ++i)
        h.bin_edges_ns[i] = (double(i - k_max) - 0.5) * binwidth_ns;
    return h;
}

CoincidenceHistogram make_scan_histogram(const std::vector<double>& centers) {
    if (centers.empty())
        throw std::invalid_argument("make_scan_histogram: empty axis");
    for (std::size_t i = 1; i < centers.size(); ++i)
        if (!(centers[i - 1] < centers[i]))
            throw std::invalid_argument("make_scan_histogram: axis must increase");
    CoincidenceHistogram h;
    h.counts.assign(centers.size(), 0.0);
    h.bin_edges_ns.resize(centers.size() + 1);
    if (centers.size() == 1) {
        h.bin_edges_ns = {centers[0] - 0.5, centers[0] + 0.5};
        return h;
    }
    for (std::size_t i = 1; i < centers.size(); ++i)
        h.bin_edges_ns[i] = 0.5 * (centers[i - 1] + centers[i]);
    h.bin_edges_ns.front() = centers.front() - (h.bin_edges_ns[1] - centers.front());
    h.bin_edges_ns.back() =
        centers.back() + (centers.back() - h.bin_edges_ns[centers.size() - 1]);
    return h;
}

double visibility(const CoincidenceHistogram& h, double baseline_exclusion_ns) {
    double baseline = 0.0;
    std::size_t n_base = 0;
    double minimum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.size(); ++i) {
        minimum = std::min(minimum, h.counts[i]);
        if (std::abs(h.bin_center(i)) > baseline_exclusion_ns) {
            baseline += h.counts[i];
            ++n_base;
        }
    }
    if (n_base == 0)
        throw std::invalid_argument("visibility: no bins beyond the baseline exclusion");
    baseline /= double(n_base);
    if (baseline <= 0.0) return 0.0;
    return 1.0 - minimum / baseline;
}

double first_local_minimum_after(const CoincidenceHistogram& h, double min_center_ns) {
    for (std::size_t i = 1; i + 1 < h.size(); ++i) {
        if (h.bin_center(i) <= min_center_ns) continue;
        if (h.counts[i] <= h.counts[i - 1] && h.counts[i] < h.counts[i + 1])
            return h.bin_center(i);
    }
    throw std::runtime_error("first_local_minimum_after: no local minimum found");
}

} // namespace homsim
