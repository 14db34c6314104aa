// Sub-sample time-delay estimation: matched filter, coarse peak pick,
// three-point quadratic (QLS) refinement, and a precomputed fractional-
// delay bias table that removes the waveform-dependent residual the
// parabola fit leaves behind.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "picosync/channel.hpp"
#include "picosync/detail/fft.hpp"
#include "picosync/types.hpp"
#include "picosync/waveform.hpp"

namespace picosync {

// Magnitude of the complex cross-correlation at each valid lag. The
// metric is phase-invariant, which matters because the carrier phase is
// arbitrary after the wireless channel. metric[k] aligns the reference
// with rx sample (k + lag_zero_index).
struct MatchedFilterOutput {
    std::vector<double> metric;
    std::int64_t lag_zero_index = 0;
    double sample_rate_hz = 0.0;
};

struct DelayEstimate {
    std::int64_t coarse_index = 0;   // argmax lag
    double refined_delay_s = 0.0;    // QLS vertex, referenced to lag 0
    double corrected_delay_s = 0.0;  // after bias-table subtraction
    double peak_metric = 0.0;
};

// metric[k] = |sum_m rx[k+m] * conj(ref[m])|, evaluated via the spectral
// product over a power-of-two transform that keeps all valid lags free
// of circular wrap.
inline MatchedFilterOutput matched_filter(const SampledSignal& rx,
                                          const SampledSignal& tx_ref) {
    rx.validate();
    tx_ref.validate();
    if (rx.sample_rate_hz != tx_ref.sample_rate_hz)
        throw parameter_error("matched_filter: sample-rate mismatch");
    if (rx.samples.size() < tx_ref.samples.size())
        throw parameter_error("matched_filter: rx shorter than reference");

    const std::size_t w = rx.samples.size();
    const std::size_t m = tx_ref.samples.size();
    const std::size_t len = detail::next_pow2(w);

    std::vector<cdouble> fr(len, cdouble{0.0, 0.0});
    std::vector<cdouble> fs(len, cdouble{0.0, 0.0});
    std::copy(rx.samples.begin(), rx.samples.end(), fr.begin());
    std::copy(tx_ref.samples.begin(), tx_ref.samples.end(), fs.begin());
    detail::fft_pow2(fr, false);
    detail::fft_pow2(fs, false);
    for (std::size_t k = 0; k < len; ++k) fr[k] *= std::conj(fs[k]);
    detail::fft_pow2(fr, true);

    MatchedFilterOutput out;
    out.sample_rate_hz = rx.sample_rate_hz;
    out.lag_zero_index = 0;
    out.metric.resize(w - m + 1);
    for (std::size_t k = 0; k < out.metric.size(); ++k)
        out.metric[k] = std::abs(fr[k]);
    return out;
}

// Index of the metric's global maximum, ties broken toward the lowest
// index. A peak on the first or last sample means the capture was
// mis-gated and the three-point refinement is undefined.
inline std::int64_t coarse_peak(const MatchedFilterOutput& mf) {
    if (mf.metric.empty()) throw parameter_error("coarse_peak: empty metric");
    const auto it = std::max_element(mf.metric.begin(), mf.metric.end());
    const auto idx = static_cast<std::int64_t>(it - mf.metric.begin());
    if (idx == 0 || idx == static_cast<std::int64_t>(mf.metric.size()) - 1)
        throw boundary_error("coarse_peak: maximum at metric boundary (index " +
                             std::to_string(idx) + ")");
    return idx;
}

// Parabola through (n-1, n, n+1); returns the vertex abscissa in seconds
// referenced to lag 0. The fractional term is bounded by half a sample
// whenever metric[n_max] is the local maximum.
inline double qls_refine(const MatchedFilterOutput& mf, std::int64_t n_max) {
    const auto size = static_cast<std::int64_t>(mf.metric.size());
    if (n_max <= 0 || n_max >= size - 1)
        throw parameter_error("qls_refine: n_max must have two neighbours");
    const double a = mf.metric[static_cast<std::size_t>(n_max - 1)];
    const double b = mf.metric[static_cast<std::size_t>(n_max)];
    const double c = mf.metric[static_cast<std::size_t>(n_max + 1)];
    const double denom = a - 2.0 * b + c;
    if (denom == 0.0 || !std::isfinite(denom))
        throw flat_peak_error("qls_refine: zero curvature at metric peak");
    const double ts = 1.0 / mf.sample_rate_hz;
    const double frac = 0.5 * (a - c) / denom;
    return (static_cast<double>(n_max - mf.lag_zero_index) + frac) * ts;
}

namespace detail {

// The estimation chain fits the parabola to the log-magnitude of the
// correlation (log-parabola peak interpolation). The resulting
// fractional-delay bias curve is what the table correction is built
// against; on the linear magnitude the residual bias has a different,
// smaller shape that does not match the calibrated tables.
inline double qls_refine_log(const MatchedFilterOutput& mf, std::int64_t n_max) {
    const auto size = static_cast<std::int64_t>(mf.metric.size());
    if (n_max <= 0 || n_max >= size - 1)
        throw parameter_error("qls_refine_log: n_max must have two neighbours");
    const double ma = mf.metric[static_cast<std::size_t>(n_max - 1)];
    const double mb = mf.metric[static_cast<std::size_t>(n_max)];
    const double mc = mf.metric[static_cast<std::size_t>(n_max + 1)];
    if (!(ma > 0.0) || !(mb > 0.0) || !(mc > 0.0))
        throw flat_peak_error("qls_refine_log: non-positive metric around peak");
    MatchedFilterOutput logview;
    logview.sample_rate_hz = mf.sample_rate_hz;
    logview.lag_zero_index = -(n_max - 1 - mf.lag_zero_index);
    logview.metric = {std::log(ma), std::log(mb), std::log(mc)};
    return qls_refine(logview, 1);
}

} // namespace detail

// Residual QLS bias versus fractional delay, one entry per uniform bin
// f = i / bin_count over [0, 1). Built for one waveform + sample rate;
// immutable and shareable across concurrent trials.
struct BiasLut {
    WaveformSpec waveform;
    std::vector<double> bias_s;

    std::size_t bin_count() const { return bias_s.size(); }

    // Linear interpolation of the stored bias at fractional delay f,
    // wrapping modulo 1 (the bias is periodic in one sample interval).
    double bias_at(double f) const {
        if (bias_s.empty()) throw parameter_error("BiasLut: empty table");
        const double b = static_cast<double>(bias_s.size());
        double x = (f - std::floor(f)) * b;
        const std::size_t i0 = static_cast<std::size_t>(x) % bias_s.size();
        const std::size_t i1 = (i0 + 1) % bias_s.size();
        const double t = x - std::floor(x);
        return bias_s[i0] * (1.0 - t) + bias_s[i1] * t;
    }
};

namespace detail {

// Noiseless single-shot delay estimate of a pulse placed guard+frac
// samples into a receive window, reusing a precomputed base-window
// spectrum so dense fractional-delay sweeps stay cheap. Returns the raw
// QLS estimate in seconds from the window start.
class FractionalSweeper {
public:
    explicit FractionalSweeper(const WaveformSpec& spec)
        : pulse_(synthesize(spec)), fs_(spec.sample_rate_hz) {
        const std::size_t n = pulse_.samples.size();
        window_len_ = n + 2 * kReceiveGuardSamples;
        pad_len_ = next_pow2(4 * window_len_);
        base_spectrum_.assign(pad_len_, cdouble{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i)
            base_spectrum_[kReceiveGuardSamples + i] = pulse_.samples[i];
        fft_pow2(base_spectrum_, false);

        const std::size_t corr_len = next_pow2(window_len_);
        ref_spectrum_.assign(corr_len, cdouble{0.0, 0.0});
        std::copy(pulse_.samples.begin(), pulse_.samples.end(), ref_spectrum_.begin());
        fft_pow2(ref_spectrum_, false);
    }

    // True delay applied is (guard + frac) samples; frac in [0, 1).
    // The shift uses the channel's phase ramp so the calibration sees
    // exactly the runtime delay operator.
    double estimate_at(double frac) const {
        std::vector<cdouble> buf = base_spectrum_;
        if (frac != 0.0) {
            constexpr double two_pi = 6.283185307179586476925286766559;
            const double delay_s = frac / fs_;
            for (std::size_t k = 0; k < pad_len_; ++k) {
                const double g =
                    shift_phase_frequency(bin_frequency_hz(k, pad_len_, fs_), fs_);
                const double a = -two_pi * g * delay_s;
                buf[k] *= cdouble{std::cos(a), std::sin(a)};
            }
        }
        fft_pow2(buf, true);

        const std::size_t corr_len = ref_spectrum_.size();
        std::vector<cdouble> corr(corr_len, cdouble{0.0, 0.0});
        for (std::size_t i = 0; i < window_len_; ++i) corr[i] = buf[i];
        fft_pow2(corr, false);
        for (std::size_t k = 0; k < corr_len; ++k)
            corr[k] *= std::conj(ref_spectrum_[k]);
        fft_pow2(corr, true);

        MatchedFilterOutput mf;
        mf.sample_rate_hz = fs_;
        mf.lag_zero_index = 0;
        mf.metric.resize(window_len_ - pulse_.samples.size() + 1);
        for (std::size_t k = 0; k < mf.metric.size(); ++k)
            mf.metric[k] = std::abs(corr[k]);
        return qls_refine_log(mf, coarse_peak(mf));
    }

    double true_delay_at(double frac) const {
        return (static_cast<double>(kReceiveGuardSamples) + frac) / fs_;
    }

private:
    SampledSignal pulse_;
    double fs_;
    std::size_t window_len_ = 0;
    std::size_t pad_len_ = 0;
    std::vector<cdouble> base_spectrum_;
    std::vector<cdouble> ref_spectrum_;
};

} // namespace detail

// Sweeps the noiseless estimator across one sample interval and records
// tau_hat - tau_true per fractional-delay bin. Deterministic.
inline BiasLut build_bias_lut(const WaveformSpec& spec, std::size_t bin_count = 1024) {
    spec.validate();
    if (bin_count < 64)
        throw parameter_error("build_bias_lut: bin_count must be >= 64");
    detail::FractionalSweeper sweeper(spec);
    BiasLut lut;
    lut.waveform = spec;
    lut.bias_s.resize(bin_count);
    for (std::size_t i = 0; i < bin_count; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(bin_count);
        lut.bias_s[i] = sweeper.estimate_at(f) - sweeper.true_delay_at(f);
    }
    return lut;
}

// Subtracts the table bias from a raw QLS estimate. The table is keyed
// by the true fractional delay, but at runtime only the biased estimate
// is available, so the query solves f + bias(f)/T_s = frac(tau_hat/T_s)
// by fixed-point iteration (the bias slope is well below 1 sample/sample,
// so a handful of passes converge far past the table's own resolution).
inline double correct_bias(double tau_hat, const BiasLut& lut,
                           double sample_period_s) {
    if (!(sample_period_s > 0.0))
        throw parameter_error("correct_bias: sample_period_s must be > 0");
    const double f_est = tau_hat / sample_period_s;
    double f = f_est;
    for (int pass = 0; pass < 4; ++pass)
        f = f_est - lut.bias_at(f) / sample_period_s;
    return tau_hat - lut.bias_at(f);
}

// Full single-pulse chain: matched filter, coarse peak, log-domain QLS,
// bias correction. Delays are referenced to the start of rx. When
// search_radius > 0 the coarse search is restricted to
// [search_center - radius, search_center + radius] lags: the protocol's
// coarse alignment bounds where the pulse can arrive, and for a two-tone
// waveform the correlation repeats every 1/BW, so searching beyond one
// ambiguity period would only admit comb sidelobes.
inline DelayEstimate estimate_delay(const SampledSignal& rx,
                                    const SampledSignal& tx_ref,
                                    const BiasLut& lut,
                                    std::int64_t search_center = -1,
                                    std::int64_t search_radius = 0) {
    const MatchedFilterOutput mf = matched_filter(rx, tx_ref);
    MatchedFilterOutput view;
    const MatchedFilterOutput* active = &mf;
    if (search_radius > 0) {
        const std::int64_t lo = search_center - search_radius;
        const std::int64_t hi = search_center + search_radius;  // inclusive
        if (lo < 0 || hi >= static_cast<std::int64_t>(mf.metric.size()))
            throw parameter_error("estimate_delay: search region outside metric");
        view.sample_rate_hz = mf.sample_rate_hz;
        view.lag_zero_index = mf.lag_zero_index - lo;
        view.metric.assign(mf.metric.begin() + lo, mf.metric.begin() + hi + 1);
        active = &view;
    }
    DelayEstimate est;
    const std::int64_t peak = coarse_peak(*active);
    est.coarse_index = peak - active->lag_zero_index + mf.lag_zero_index;
    est.peak_metric = active->metric[static_cast<std::size_t>(peak)];
    est.refined_delay_s = detail::qls_refine_log(*active, peak);
    est.corrected_delay_s =
        correct_bias(est.refined_delay_s, lut, 1.0 / rx.sample_rate_hz);
    return est;
}

// Pre-processed SNR from equal-length pulse and noise-only captures:
// 10*log10[(P_s/P_n)^2] with P_s, P_n the RMS of each window (the
// measurement-system impedance cancels in the ratio).
inline double estimate_snr(const SampledSignal& pulse,
                           const SampledSignal& noise_only) {
    pulse.validate();
    noise_only.validate();
    if (pulse.samples.size() != noise_only.samples.size())
        throw parameter_error("estimate_snr: windows must have equal sample counts");
    double ps = 0.0, pn = 0.0;
    for (const auto& x : pulse.samples) ps += std::norm(x);
    for (const auto& x : noise_only.samples) pn += std::norm(x);
    if (!(pn > 0.0))
        throw parameter_error("estimate_snr: zero noise power");
    return 10.0 * std::log10(ps / pn);
}

// --- bias-table persistence -------------------------------------------
//
// Versioned text format so harness runs can cache tables:
//   picosync-bias-lut 1
//   <kind> <bandwidth> <pulse_duration> <rise_fall> <sample_rate> <amplitude> <bins>
//   <fractional_delay> <bias_s>          (one pair per line, %.17e)

inline void save_bias_lut(const BiasLut& lut, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_bias_lut: cannot open '" + path + "' for writing");
    char line[256];
    out << "picosync-bias-lut 1\n";
    std::snprintf(line, sizeof line, "%s %.17e %.17e %.17e %.17e %.17e %zu\n",
                  to_string(lut.waveform.kind), lut.waveform.bandwidth_hz,
                  lut.waveform.pulse_duration_s, lut.waveform.rise_fall_s,
                  lut.waveform.sample_rate_hz, lut.waveform.amplitude,
                  lut.bin_count());
    out << line;
    for (std::size_t i = 0; i < lut.bin_count(); ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(lut.bin_count());
        std::snprintf(line, sizeof line, "%.17e %.17e\n", f, lut.bias_s[i]);
        out << line;
    }
    if (!out) throw io_error("save_bias_lut: write to '" + path + "' failed");
}

inline BiasLut load_bias_lut(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_bias_lut: cannot open '" + path + "'");
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "picosync-bias-lut" || version != 1)
        throw io_error("load_bias_lut: '" + path + "' is not a v1 bias table");
    std::string kind;
    std::size_t bins = 0;
    BiasLut lut;
    in >> kind >> lut.waveform.bandwidth_hz >> lut.waveform.pulse_duration_s >>
        lut.waveform.rise_fall_s >> lut.waveform.sample_rate_hz >>
        lut.waveform.amplitude >> bins;
    if (!in || (kind != "two-tone" && kind != "lfm"))
        throw io_error("load_bias_lut: malformed header in '" + path + "'");
    lut.waveform.kind = (kind == "two-tone") ? WaveformKind::TwoTone : WaveformKind::Lfm;
    lut.bias_s.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        double f = 0.0;
        in >> f >> lut.bias_s[i];
        if (!in) throw io_error("load_bias_lut: truncated table in '" + path + "'");
        if (!std::isfinite(lut.bias_s[i]))
            throw io_error("load_bias_lut: non-finite bias entry in '" + path + "'");
    }
    return lut;
}

} // namespace picosync
