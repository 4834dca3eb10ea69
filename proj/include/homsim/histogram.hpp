#pragma once

#include <optional>
#include <vector>

namespace homsim {

// Binned values over a delay axis. Counting paths store exact integers in
// the double slots; analytic scans store rates. Histograms with identical
// edges merge by addition.
struct CoincidenceHistogram {
    std::vector<double> bin_edges_ns; // size counts.size() + 1
    std::vector<double> counts;
    std::optional<double> normalization;

    std::size_t size() const { return counts.size(); }
    double bin_center(std::size_t i) const {
        return 0.5 * (bin_edges_ns[i] + bin_edges_ns[i + 1]);
    }
    double total() const;
    void merge(const CoincidenceHistogram& other);

    void validate() const;
};

// Uniform bins centered on multiples of binwidth: bin k covers
// [(k - 1/2) binwidth, (k + 1/2) binwidth), k in [-k_max, k_max].
CoincidenceHistogram make_centered_histogram(double binwidth_ns, int k_max);

// Histogram whose bins are centered on an explicit sorted axis (e.g. a scan
// lattice); edges are midpoints between neighbours.
CoincidenceHistogram make_scan_histogram(const std::vector<double>& centers_ns);

// Dip visibility 1 - min/baseline, with the baseline estimated as the mean
// of bins whose center lies beyond +-baseline_exclusion_ns.
double visibility(const CoincidenceHistogram& h, double baseline_exclusion_ns);

// Delay of the first local minimum at center > min_center_ns; used to read
// an oscillation period off a binned beat profile.
double first_local_minimum_after(const CoincidenceHistogram& h, double min_center_ns);

} // namespace homsim
