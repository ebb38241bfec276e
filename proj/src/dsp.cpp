#include "esr/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace esr {

namespace {

constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

struct Zpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

Zpk butterworth_prototype(int order) {
    Zpk zpk;
    for (int k = 1; k <= order; ++k) {
        double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
        zpk.poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    zpk.gain = 1.0;
    return zpk;
}

cplx prod_neg(const std::vector<cplx>& v) {
    cplx p(1.0, 0.0);
    for (const auto& x : v) p *= -x;
    return p;
}

Zpk lp_to_lp(const Zpk& in, double wc) {
    Zpk out;
    for (auto z : in.zeros) out.zeros.push_back(z * wc);
    for (auto p : in.poles) out.poles.push_back(p * wc);
    int degree = int(in.poles.size() - in.zeros.size());
    out.gain = in.gain * std::pow(wc, degree);
    return out;
}

Zpk lp_to_hp(const Zpk& in, double wc) {
    Zpk out;
    for (auto z : in.zeros) out.zeros.push_back(wc / z);
    for (auto p : in.poles) out.poles.push_back(wc / p);
    int degree = int(in.poles.size() - in.zeros.size());
    for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
    out.gain = in.gain * (prod_neg(in.zeros) / prod_neg(in.poles)).real();
    return out;
}

Zpk lp_to_bp(const Zpk& in, double w0, double bw) {
    Zpk out;
    auto transform = [&](cplx s) {
        cplx q = s * bw / 2.0;
        cplx r = std::sqrt(q * q - w0 * w0);
        return std::pair<cplx, cplx>(q + r, q - r);
    };
    for (auto z : in.zeros) {
        auto [a, b] = transform(z);
        out.zeros.push_back(a);
        out.zeros.push_back(b);
    }
    for (auto p : in.poles) {
        auto [a, b] = transform(p);
        out.poles.push_back(a);
        out.poles.push_back(b);
    }
    int degree = int(in.poles.size() - in.zeros.size());
    for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
    out.gain = in.gain * std::pow(bw, degree);
    return out;
}

Zpk lp_to_bs(const Zpk& in, double w0, double bw) {
    Zpk out;
    auto transform = [&](cplx s) {
        cplx q = bw / (2.0 * s);
        cplx r = std::sqrt(q * q - w0 * w0);
        return std::pair<cplx, cplx>(q + r, q - r);
    };
    for (auto z : in.zeros) {
        auto [a, b] = transform(z);
        out.zeros.push_back(a);
        out.zeros.push_back(b);
    }
    for (auto p : in.poles) {
        auto [a, b] = transform(p);
        out.poles.push_back(a);
        out.poles.push_back(b);
    }
    int degree = int(in.poles.size() - in.zeros.size());
    for (int i = 0; i < degree; ++i) {
        out.zeros.emplace_back(0.0, w0);
        out.zeros.emplace_back(0.0, -w0);
    }
    out.gain = in.gain * (prod_neg(in.zeros) / prod_neg(in.poles)).real();
    return out;
}

Zpk bilinear(const Zpk& in, double rate_hz) {
    double fs2 = 2.0 * rate_hz;
    Zpk out;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (auto z : in.zeros) {
        out.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= (fs2 - z);
    }
    for (auto p : in.poles) {
        out.poles.push_back((fs2 + p) / (fs2 - p));
        den *= (fs2 - p);
    }
    int degree = int(in.poles.size() - in.zeros.size());
    for (int i = 0; i < degree; ++i) out.zeros.emplace_back(-1.0, 0.0);
    out.gain = in.gain * (num / den).real();
    return out;
}

// Group a conjugate-closed root set into real-coefficient quadratic pairs:
// (pair_sum, pair_product) per section.
std::vector<std::pair<double, double>> quad_pairs(std::vector<cplx> roots) {
    constexpr double tol = 1e-9;
    std::vector<cplx> upper;
    std::vector<double> reals;
    for (auto r : roots) {
        if (std::abs(r.imag()) < tol)
            reals.push_back(r.real());
        else if (r.imag() > 0.0)
            upper.push_back(r);
    }
    std::sort(reals.begin(), reals.end());
    std::sort(upper.begin(), upper.end(),
              [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
    std::vector<std::pair<double, double>> pairs;
    for (auto r : upper) pairs.emplace_back(2.0 * r.real(), std::norm(r));
    if (reals.size() % 2 != 0)
        throw std::runtime_error("internal: odd number of real roots in pairing");
    for (size_t i = 0; i + 1 < reals.size(); i += 2)
        pairs.emplace_back(reals[i] + reals[i + 1], reals[i] * reals[i + 1]);
    return pairs;
}

std::vector<Sos> zpk_to_sos(const Zpk& zpk) {
    if (zpk.zeros.size() != zpk.poles.size() || zpk.poles.size() % 2 != 0)
        throw std::runtime_error("internal: zpk_to_sos expects an even, matched root count");

    auto pole_pairs = quad_pairs(zpk.poles);
    auto zero_pairs = quad_pairs(zpk.zeros);

    // order pole pairs by radius, closest to the unit circle first, and give
    // each the angularly nearest remaining zero pair
    std::sort(pole_pairs.begin(), pole_pairs.end(),
              [](auto a, auto b) { return a.second > b.second; });
    auto pair_angle = [](std::pair<double, double> pr) {
        double cos_t = pr.first / (2.0 * std::sqrt(std::max(pr.second, 1e-300)));
        return std::acos(std::clamp(cos_t, -1.0, 1.0));
    };
    std::vector<Sos> sections;
    std::vector<bool> used(zero_pairs.size(), false);
    for (auto pp : pole_pairs) {
        double pa = pair_angle(pp);
        size_t best = zero_pairs.size();
        double best_d = 0.0;
        for (size_t i = 0; i < zero_pairs.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(pair_angle(zero_pairs[i]) - pa);
            if (best == zero_pairs.size() || d < best_d) {
                best = i;
                best_d = d;
            }
        }
        used[best] = true;
        Sos s;
        s.b0 = 1.0;
        s.b1 = -zero_pairs[best].first;
        s.b2 = zero_pairs[best].second;
        s.a1 = -pp.first;
        s.a2 = pp.second;
        sections.push_back(s);
    }
    // fold the overall gain into the last section (the one furthest from the
    // unit circle, least sensitive to scaling)
    auto& last = sections.back();
    last.b0 *= zpk.gain;
    last.b1 *= zpk.gain;
    last.b2 *= zpk.gain;
    return sections;
}

double prewarp(double freq_hz, double rate_hz) {
    return 2.0 * rate_hz * std::tan(kPi * freq_hz / rate_hz);
}

struct CascadeState {
    std::vector<double> s1, s2;
};

// steady-state (unit step) internal state of the cascade, direct form IIt
CascadeState steady_state(const std::vector<Sos>& sections) {
    CascadeState st;
    st.s1.resize(sections.size());
    st.s2.resize(sections.size());
    double x = 1.0;
    for (size_t i = 0; i < sections.size(); ++i) {
        const Sos& s = sections[i];
        double y = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2) * x;
        st.s1[i] = y - s.b0 * x;
        st.s2[i] = s.b2 * x - s.a2 * y;
        x = y;
    }
    return st;
}

void sos_filter_inplace(const std::vector<Sos>& sections, std::vector<double>& x,
                        CascadeState st) {
    for (size_t i = 0; i < sections.size(); ++i) {
        const Sos& s = sections[i];
        double s1 = st.s1[i], s2 = st.s2[i];
        for (double& v : x) {
            double y = s.b0 * v + s1;
            s1 = s.b1 * v - s.a1 * y + s2;
            s2 = s.b2 * v - s.a2 * y;
            v = y;
        }
    }
}

}  // namespace

std::string filter_kind_name(FilterKind k) {
    switch (k) {
        case FilterKind::Lowpass: return "lowpass";
        case FilterKind::Bandpass: return "bandpass";
        case FilterKind::Highpass: return "highpass";
        case FilterKind::Bandreject: return "bandreject";
        case FilterKind::Identity: return "identity";
    }
    return "identity";
}

static FilterKind filter_kind_from_name(const std::string& s) {
    if (s == "lowpass") return FilterKind::Lowpass;
    if (s == "bandpass") return FilterKind::Bandpass;
    if (s == "highpass") return FilterKind::Highpass;
    if (s == "bandreject") return FilterKind::Bandreject;
    if (s == "identity") return FilterKind::Identity;
    throw std::invalid_argument("unknown filter kind: " + s);
}

BandEdges band_edges_from_name(const std::string& name) {
    if (name == "standard") return BandEdges::Standard;
    if (name == "alternate") return BandEdges::Alternate;
    throw std::invalid_argument("unknown band edge preset: " + name +
                                " (expected standard|alternate)");
}

const std::vector<BandSpec>& band_table(BandEdges edges) {
    static const std::vector<BandSpec> standard = {
        {"delta", FilterKind::Lowpass, 0.0, 4.0},
        {"theta", FilterKind::Bandpass, 4.0, 7.0},
        {"alpha", FilterKind::Bandpass, 7.0, 15.0},
        {"beta", FilterKind::Bandpass, 15.0, 31.0},
        {"gamma", FilterKind::Highpass, 31.0, 0.0},
        {"dbg", FilterKind::Bandreject, 4.0, 15.0},
        {"all", FilterKind::Identity, 0.0, 0.0},
    };
    static const std::vector<BandSpec> alternate = {
        {"delta", FilterKind::Lowpass, 0.0, 4.0},
        {"theta", FilterKind::Bandpass, 4.0, 7.0},
        {"alpha", FilterKind::Bandpass, 8.0, 15.0},
        {"beta", FilterKind::Bandpass, 16.0, 31.0},
        {"gamma", FilterKind::Highpass, 32.0, 0.0},
        {"dbg", FilterKind::Bandreject, 4.0, 15.0},
        {"all", FilterKind::Identity, 0.0, 0.0},
    };
    return edges == BandEdges::Standard ? standard : alternate;
}

BandSpec band_by_name(const std::string& name, BandEdges edges) {
    for (const auto& b : band_table(edges))
        if (b.name == name) return b;
    throw std::invalid_argument("unknown band: " + name +
                                " (expected delta|theta|alpha|beta|gamma|dbg|all)");
}

FilterDesign design_filter(const BandSpec& band, int order, double rate_hz) {
    if (band.kind == FilterKind::Identity)
        throw std::invalid_argument("identity band has no filter design");
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("filter order must be even and >= 2, got " +
                                    std::to_string(order));
    double nyquist = rate_hz / 2.0;
    auto check_cutoff = [&](double f) {
        if (!(f > 0.0 && f < nyquist))
            throw std::invalid_argument("cutoff " + std::to_string(f) +
                                        " Hz outside (0, " + std::to_string(nyquist) +
                                        ") for band " + band.name);
    };

    Zpk proto = butterworth_prototype(order);
    Zpk analog;
    switch (band.kind) {
        case FilterKind::Lowpass:
            check_cutoff(band.high_hz);
            analog = lp_to_lp(proto, prewarp(band.high_hz, rate_hz));
            break;
        case FilterKind::Highpass:
            check_cutoff(band.low_hz);
            analog = lp_to_hp(proto, prewarp(band.low_hz, rate_hz));
            break;
        case FilterKind::Bandpass:
        case FilterKind::Bandreject: {
            check_cutoff(band.low_hz);
            check_cutoff(band.high_hz);
            if (band.low_hz >= band.high_hz)
                throw std::invalid_argument("band " + band.name +
                                            ": low cutoff must be below high cutoff");
            double w1 = prewarp(band.low_hz, rate_hz);
            double w2 = prewarp(band.high_hz, rate_hz);
            double w0 = std::sqrt(w1 * w2), bw = w2 - w1;
            analog = band.kind == FilterKind::Bandpass ? lp_to_bp(proto, w0, bw)
                                                       : lp_to_bs(proto, w0, bw);
            break;
        }
        case FilterKind::Identity: break;  // unreachable
    }

    FilterDesign d;
    d.band = band;
    d.order = order;
    d.rate_hz = rate_hz;
    d.sections = zpk_to_sos(bilinear(analog, rate_hz));
    if (max_pole_magnitude(d) >= 1.0)
        throw std::runtime_error("unstable design for band " + band.name);
    return d;
}

double magnitude_response(const FilterDesign& design, double freq_hz) {
    double w = 2.0 * kPi * freq_hz / design.rate_hz;
    cplx zinv = std::exp(cplx(0.0, -w));
    cplx h(1.0, 0.0);
    for (const Sos& s : design.sections) {
        cplx num = s.b0 + s.b1 * zinv + s.b2 * zinv * zinv;
        cplx den = 1.0 + s.a1 * zinv + s.a2 * zinv * zinv;
        h *= num / den;
    }
    return std::abs(h);
}

double max_pole_magnitude(const FilterDesign& design) {
    double m = 0.0;
    for (const Sos& s : design.sections) {
        cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        m = std::max(m, std::abs((-s.a1 + disc) / 2.0));
        m = std::max(m, std::abs((-s.a1 - disc) / 2.0));
    }
    return m;
}

std::vector<double> sos_filter(const FilterDesign& design, const std::vector<double>& x) {
    std::vector<double> y = x;
    CascadeState zeros;
    zeros.s1.assign(design.sections.size(), 0.0);
    zeros.s2.assign(design.sections.size(), 0.0);
    sos_filter_inplace(design.sections, y, zeros);
    return y;
}

std::vector<double> filtfilt(const FilterDesign& design, const std::vector<double>& x) {
    const size_t pad = size_t(3 * design.realized_order());
    if (x.size() <= pad)
        throw std::runtime_error("signal too short for zero-phase filtering: " +
                                 std::to_string(x.size()) + " samples, need more than " +
                                 std::to_string(pad));

    std::vector<double> ext;
    ext.reserve(x.size() + 2 * pad);
    for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.front() - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 2 - i]);

    CascadeState ss = steady_state(design.sections);
    auto scaled = [&](double v) {
        CascadeState st = ss;
        for (double& s : st.s1) s *= v;
        for (double& s : st.s2) s *= v;
        return st;
    };

    sos_filter_inplace(design.sections, ext, scaled(ext.front()));
    std::reverse(ext.begin(), ext.end());
    sos_filter_inplace(design.sections, ext, scaled(ext.front()));
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + long(pad), ext.begin() + long(pad + x.size()));
}

Recording apply_zero_phase(const FilterDesign& design, const Recording& rec) {
    Recording out = rec;
    int n = int(rec.samples.size());
#pragma omp parallel for schedule(static)
    for (int c = 0; c < n; ++c) out.samples[size_t(c)] = filtfilt(design, rec.samples[size_t(c)]);
    return out;
}

std::string filter_design_to_json(const FilterDesign& design) {
    json j;
    j["band"] = {{"name", design.band.name},
                 {"kind", filter_kind_name(design.band.kind)},
                 {"low_hz", design.band.low_hz},
                 {"high_hz", design.band.high_hz}};
    j["order"] = design.order;
    j["rate_hz"] = design.rate_hz;
    j["sections"] = json::array();
    for (const Sos& s : design.sections)
        j["sections"].push_back({s.b0, s.b1, s.b2, s.a1, s.a2});
    return j.dump(2);
}

FilterDesign filter_design_from_json(const std::string& text) {
    json j = json::parse(text);
    FilterDesign d;
    d.band.name = j.at("band").at("name").get<std::string>();
    d.band.kind = filter_kind_from_name(j.at("band").at("kind").get<std::string>());
    d.band.low_hz = j.at("band").at("low_hz").get<double>();
    d.band.high_hz = j.at("band").at("high_hz").get<double>();
    d.order = j.at("order").get<int>();
    d.rate_hz = j.at("rate_hz").get<double>();
    for (const auto& row : j.at("sections")) {
        Sos s;
        s.b0 = row.at(0).get<double>();
        s.b1 = row.at(1).get<double>();
        s.b2 = row.at(2).get<double>();
        s.a1 = row.at(3).get<double>();
        s.a2 = row.at(4).get<double>();
        d.sections.push_back(s);
    }
    return d;
}

}  // namespace esr
