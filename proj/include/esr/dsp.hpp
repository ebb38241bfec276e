#pragma once

#include <string>
#include <vector>

#include "esr/recording.hpp"

namespace esr {

enum class FilterKind { Lowpass, Bandpass, Highpass, Bandreject, Identity };

std::string filter_kind_name(FilterKind k);

// Named frequency band with cutoffs. low_hz/high_hz are 0 where inapplicable
// (lowpass has only high_hz, highpass only low_hz, identity neither).
struct BandSpec {
    std::string name;
    FilterKind kind = FilterKind::Identity;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

// Two published edge conventions exist for these bands; "standard" is the one
// the filtering pipeline uses, "alternate" (alpha 8-15, beta 16-31, gamma >32)
// is selectable as a preset.
enum class BandEdges { Standard, Alternate };

BandEdges band_edges_from_name(const std::string& name);
const std::vector<BandSpec>& band_table(BandEdges edges = BandEdges::Standard);
BandSpec band_by_name(const std::string& name, BandEdges edges = BandEdges::Standard);

// One biquad, denominator normalized to a leading 1.
struct Sos {
    double b0 = 0, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

struct FilterDesign {
    BandSpec band;
    int order = 0;  // prototype order; band/reject realizations have 2x poles
    double rate_hz = kSampleRateHz;
    std::vector<Sos> sections;

    int realized_order() const { return int(sections.size()) * 2; }
};

// Butterworth design via analog prototype poles, band transform and bilinear
// mapping with prewarped cutoffs. order must be even and >= 2; identity bands
// are not designable. Throws on cutoffs at or above Nyquist.
FilterDesign design_filter(const BandSpec& band, int order = 4,
                           double rate_hz = kSampleRateHz);

// |H(e^{j 2 pi f / fs})| of the section cascade.
double magnitude_response(const FilterDesign& design, double freq_hz);

// Largest pole magnitude over all sections; < 1 means stable.
double max_pole_magnitude(const FilterDesign& design);

// Single forward pass through the cascade (direct form II transposed),
// zero initial state. Building block for filtering and for impulse tests.
std::vector<double> sos_filter(const FilterDesign& design, const std::vector<double>& x);

// Forward-backward (zero phase) application per channel. Signal is extended by
// odd reflection of 3x the realized filter order on each side and the filter
// state is seeded with its step steady state, so edge transients stay inside
// the discarded extension. Throws if the signal is too short to extend.
std::vector<double> filtfilt(const FilterDesign& design, const std::vector<double>& x);

// filtfilt over every channel of a recording; metadata unchanged. Channels are
// independent and run in parallel.
Recording apply_zero_phase(const FilterDesign& design, const Recording& rec);

// JSON round trip for golden-file regression tests.
std::string filter_design_to_json(const FilterDesign& design);
FilterDesign filter_design_from_json(const std::string& text);

}  // namespace esr
