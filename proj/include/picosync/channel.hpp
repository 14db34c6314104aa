// Quasi-static propagation channel: true delay (integer placement plus a
// spectral phase ramp for the sub-sample part) and additive circular
// white Gaussian noise calibrated against the pulse interior power.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "picosync/detail/fft.hpp"
#include "picosync/detail/rng.hpp"
#include "picosync/types.hpp"

namespace picosync {

// Receive-gate pad, in samples, on each side of the pulse. Shared by the
// protocol layer and the bias-table builder so the estimator sees the
// same truncation geometry in calibration and at runtime.
inline constexpr std::size_t kReceiveGuardSamples = 256;

struct ChannelModel {
    double propagation_delay_s = 3e-9;  // ~90 cm line of sight
    double snr_db = std::numeric_limits<double>::infinity();  // inf = noise off
    bool symmetric = true;  // both directions share propagation_delay_s
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(propagation_delay_s >= 0.0) || !std::isfinite(propagation_delay_s))
            throw parameter_error("ChannelModel: propagation_delay_s must be >= 0");
        if (std::isnan(snr_db))
            throw parameter_error("ChannelModel: snr_db must not be NaN");
    }

    bool noise_enabled() const { return std::isfinite(snr_db); }
};

namespace detail {

// Phase-lag frequency for the fractional-delay ramp: equal to f over the
// inner 95% of the band, then bent (cubic Hermite, C1) to zero at
// +/- fs/2 so the phase is continuous on the frequency circle. A plain
// linear ramp jumps by 2*pi*fs*tau across Nyquist and that discontinuity
// rings against the signal's spectral tails. Because the bend is fixed
// and the phase scales linearly with tau, shifts compose exactly:
// H_a * H_b = H_{a+b}. In-band behavior is exact linear phase at unit
// magnitude; signals must be band-limited below the bend, which the
// synthesized waveforms are by a wide margin.
inline double shift_phase_frequency(double f, double fs) {
    const double edge = fs / 2.0;
    const double pass = 0.95 * edge;
    const double af = std::fabs(f);
    if (af <= pass) return f;
    const double t = (af - pass) / (edge - pass);
    const double g = (2 * t * t * t - 3 * t * t + 1) * pass +
                     (t * t * t - 2 * t * t + t) * (edge - pass);
    return f < 0 ? -g : g;
}

// Circular sub-sample shift by delay_s (|delay| < one sample period) via
// the spectral phase ramp over a >=4x zero-padded transform. The padding
// absorbs the wrap-around edge ringing; the caller drops it.
inline void fractional_shift_in_place(std::vector<cdouble>& buf, double fs,
                                      double delay_s) {
    if (delay_s == 0.0) return;
    const std::size_t n = buf.size();
    const std::size_t len = next_pow2(4 * n);
    std::vector<cdouble> padded(len, cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) padded[i] = buf[i];
    fft_pow2(padded, false);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t k = 0; k < len; ++k) {
        const double g = shift_phase_frequency(bin_frequency_hz(k, len, fs), fs);
        const double a = -two_pi * g * delay_s;
        padded[k] *= cdouble{std::cos(a), std::sin(a)};
    }
    fft_pow2(padded, true);
    for (std::size_t i = 0; i < n; ++i) buf[i] = padded[i];
}

inline void add_complex_noise(std::vector<cdouble>& buf, double sigma_sq,
                              std::uint64_t seed) {
    picosync::detail::Rng rng(seed);
    const double scale = std::sqrt(sigma_sq);
    for (auto& x : buf) x += scale * rng.next_complex_gauss();
}

} // namespace detail

// Adds i.i.d. circular complex Gaussian noise at snr_db relative to the
// measured interior power of the given signal. Bit-identical per seed.
inline SampledSignal add_awgn(const SampledSignal& signal, double snr_db,
                              std::uint64_t seed) {
    signal.validate();
    if (!std::isfinite(snr_db)) {
        if (std::isnan(snr_db)) throw parameter_error("add_awgn: snr_db is NaN");
        return signal;
    }
    const double power = interior_mean_power(signal);
    if (!(power > 0.0))
        throw parameter_error("add_awgn: signal has zero interior power");
    SampledSignal out = signal;
    detail::add_complex_noise(out.samples, power / std::pow(10.0, snr_db / 10.0),
                              seed);
    return out;
}

// Delays the signal into a receive window of window_len samples starting
// at window_start_s (same time scale as signal.start_time_s), then adds
// noise so the pulse interior sits at ch.snr_db. The delayed pulse must
// fit inside the window with a one-sample margin for the fractional
// shift, otherwise the receive gate was mis-scheduled.
inline SampledSignal propagate(const SampledSignal& signal, const ChannelModel& ch,
                               double window_start_s, std::size_t window_len) {
    signal.validate();
    ch.validate();
    if (window_len == 0) throw parameter_error("propagate: window_len must be > 0");

    const double fs = signal.sample_rate_hz;
    const double arrival_s = signal.start_time_s + ch.propagation_delay_s;
    const double offset_samples = (arrival_s - window_start_s) * fs;
    const double k0_f = std::floor(offset_samples);
    double frac = offset_samples - k0_f;
    std::int64_t k0 = static_cast<std::int64_t>(k0_f);
    if (frac >= 1.0) {  // guard against floor() edge rounding
        frac -= 1.0;
        k0 += 1;
    }
    const std::int64_t margin = (frac != 0.0) ? 1 : 0;
    const std::int64_t n = static_cast<std::int64_t>(signal.samples.size());
    if (k0 < margin ||
        k0 + n + margin > static_cast<std::int64_t>(window_len)) {
        throw window_overrun_error(
            "propagate: pulse not fully inside receive window (arrival offset " +
            std::to_string(offset_samples) + " samples, window " +
            std::to_string(window_len) + ")");
    }

    SampledSignal out;
    out.sample_rate_hz = fs;
    out.start_time_s = window_start_s;
    out.samples.assign(window_len, cdouble{0.0, 0.0});
    for (std::int64_t i = 0; i < n; ++i)
        out.samples[static_cast<std::size_t>(k0 + i)] = signal.samples[static_cast<std::size_t>(i)];
    if (frac != 0.0)
        detail::fractional_shift_in_place(out.samples, fs, frac / fs);

    if (ch.noise_enabled()) {
        const double power = interior_mean_power(signal);
        if (!(power > 0.0))
            throw parameter_error("propagate: signal has zero interior power");
        detail::add_complex_noise(out.samples,
                                  power / std::pow(10.0, ch.snr_db / 10.0),
                                  ch.rng_seed);
    }
    return out;
}

} // namespace picosync
