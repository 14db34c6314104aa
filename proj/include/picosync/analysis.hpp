// Delay-estimation accuracy bounds: mean-squared bandwidth (closed form
// and numeric), energy-to-noise-density ratio, and the resulting lower
// bound on delay-estimate standard deviation.
#pragma once

#include <cmath>

#include "picosync/detail/fft.hpp"
#include "picosync/types.hpp"
#include "picosync/waveform.hpp"

namespace picosync {

// One evaluated bound point.
struct CrlbPoint {
    double zeta_sq = 0.0;       // mean-squared bandwidth, rad^2/s^2
    double es_n0 = 0.0;         // dimensionless
    double var_bound_s2 = 0.0;  // 1 / (2 * zeta_sq * es_n0)
    double std_bound_s = 0.0;
};

// Shape-only mean-squared bandwidth. Two tones at the band edges put all
// spectral mass at +/- BW/2, i.e. (pi*BW)^2; a filled band (LFM) averages
// (2*pi*f)^2 over the band, one third of that.
inline double msb_closed_form(WaveformKind kind, double bw_hz) {
    if (!(bw_hz >= 0.0) || !std::isfinite(bw_hz))
        throw parameter_error("msb_closed_form: bw_hz must be >= 0");
    constexpr double pi = 3.1415926535897932384626433832795;
    const double x = pi * bw_hz * pi * bw_hz;
    return kind == WaveformKind::TwoTone ? x : x / 3.0;
}

// Second moment of the unit-energy PSD, integrated over the sampled band
// with an exact-length DFT (no padding leakage). Normalizing by the
// total spectral energy makes the result a pure waveform-shape property.
inline double msb_numeric(const SampledSignal& signal) {
    signal.validate();
    if (!(signal_energy(signal) > 0.0))
        throw parameter_error("msb_numeric: signal energy must be > 0");
    const auto spectrum = detail::dft_exact(signal.samples);
    const std::size_t len = spectrum.size();
    constexpr double two_pi = 6.283185307179586476925286766559;
    double weighted = 0.0, total = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double p = std::norm(spectrum[k]);
        const double w = two_pi * detail::bin_frequency_hz(k, len, signal.sample_rate_hz);
        weighted += w * w * p;
        total += p;
    }
    return weighted / total;
}

// E_s/N_0 = tau_p * SNR * NBW with SNR given in dB. NBW is taken as the
// complex receiver sample rate throughout this toolkit.
inline double es_n0(double tau_p_s, double snr_db, double nbw_hz) {
    if (!(tau_p_s > 0.0) || !(nbw_hz > 0.0) || !std::isfinite(snr_db))
        throw parameter_error("es_n0: tau_p, nbw must be > 0 and snr finite");
    return tau_p_s * std::pow(10.0, snr_db / 10.0) * nbw_hz;
}

// Lower bound on the standard deviation of a single-pulse delay
// estimate: sqrt(1 / (2 * zeta_sq * es_n0)).
inline double crlb_std(double zeta_sq, double es_n0) {
    if (!(zeta_sq > 0.0) || !(es_n0 > 0.0))
        throw parameter_error("crlb_std: zeta_sq and es_n0 must be > 0");
    return std::sqrt(1.0 / (2.0 * zeta_sq * es_n0));
}

inline CrlbPoint make_crlb_point(double zeta_sq, double es_n0_value) {
    CrlbPoint p;
    p.zeta_sq = zeta_sq;
    p.es_n0 = es_n0_value;
    p.var_bound_s2 = 1.0 / (2.0 * zeta_sq * es_n0_value);
    p.std_bound_s = std::sqrt(p.var_bound_s2);
    return p;
}

// Bound on the two-way offset estimate, which averages two independent
// one-way delay estimates with +/- 1/2 weights: single-pulse bound / sqrt(2).
inline double two_way_offset_crlb_std(double zeta_sq, double es_n0_value) {
    return crlb_std(zeta_sq, es_n0_value) / std::sqrt(2.0);
}

} // namespace picosync
