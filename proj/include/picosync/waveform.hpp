// Pulsed two-tone and LFM baseband waveform synthesis.
//
// Both waveforms are generated at complex baseband with equal interior
// RMS amplitude so that equal-bandwidth comparisons run at identical
// energy and SNR:
//   two-tone: sqrt(2)*A*cos(pi*BW*t)   (tones at +/- BW/2, zero phase at t=0)
//   LFM:      A*exp(j*pi*BW*(t^2/tau_p - t))   (sweeps -BW/2 .. +BW/2)
// A raised-cosine (Tukey-style) ramp shapes the first and last
// rise_fall_s of the pulse.
#pragma once

#include <cfenv>
#include <cmath>
#include <string>

#include "picosync/types.hpp"

namespace picosync {

enum class WaveformKind { TwoTone, Lfm };

inline const char* to_string(WaveformKind k) {
    return k == WaveformKind::TwoTone ? "two-tone" : "lfm";
}

struct WaveformSpec {
    WaveformKind kind = WaveformKind::TwoTone;
    double bandwidth_hz = 40e6;      // tone separation (two-tone) / sweep extent (LFM)
    double pulse_duration_s = 10e-6;
    double rise_fall_s = 50e-9;
    double sample_rate_hz = 200e6;
    double amplitude = 1.0;          // interior RMS amplitude

    void validate() const {
        if (!(std::isfinite(bandwidth_hz)) || bandwidth_hz < 0.0)
            throw parameter_error("WaveformSpec: bandwidth_hz must be >= 0");
        if (!(pulse_duration_s > 0.0) || !std::isfinite(pulse_duration_s))
            throw parameter_error("WaveformSpec: pulse_duration_s must be > 0");
        if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
            throw parameter_error("WaveformSpec: sample_rate_hz must be > 0");
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw parameter_error("WaveformSpec: amplitude must be > 0");
        if (!(bandwidth_hz < sample_rate_hz))
            throw parameter_error(
                "WaveformSpec: bandwidth_hz must be < sample_rate_hz "
                "(complex Nyquist: both tones representable at baseband)");
        if (rise_fall_s < 0.0 || !std::isfinite(rise_fall_s))
            throw parameter_error("WaveformSpec: rise_fall_s must be >= 0");
        if (rise_fall_s > pulse_duration_s / 2.0)
            throw parameter_error(
                "WaveformSpec: rise_fall_s must be <= pulse_duration_s / 2");
    }

    // Round-half-to-even so the count is deterministic across platforms.
    std::size_t sample_count() const {
        return static_cast<std::size_t>(
            std::llrint(pulse_duration_s * sample_rate_hz));
    }

    bool operator==(const WaveformSpec&) const = default;
};

// Raised-cosine edge ramps over the first and last rise_fall_s; interior
// untouched. The envelope is sample-symmetric: sample k and sample
// (N-1-k) get the same weight, with the first sample at exactly zero.
inline SampledSignal apply_envelope(const SampledSignal& signal, double rise_fall_s) {
    signal.validate();
    if (rise_fall_s < 0.0 || !std::isfinite(rise_fall_s))
        throw parameter_error("apply_envelope: rise_fall_s must be >= 0");
    if (rise_fall_s == 0.0) return signal;
    const double span_s = signal.duration_s();
    if (rise_fall_s > span_s / 2.0)
        throw parameter_error("apply_envelope: ramp longer than half the pulse");

    SampledSignal out = signal;
    const double ts = signal.sample_period_s();
    const std::size_t n = out.samples.size();
    auto ramp = [&](double t) {
        return 0.5 * (1.0 - std::cos(3.1415926535897932384626433832795 * t / rise_fall_s));
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double t_front = static_cast<double>(k) * ts;
        const double t_back = static_cast<double>(n - 1 - k) * ts;
        double w = 1.0;
        if (t_front < rise_fall_s) w *= ramp(t_front);
        if (t_back < rise_fall_s) w *= ramp(t_back);
        if (w != 1.0) out.samples[k] *= w;
    }
    return out;
}

// Synthesizes the pulse described by spec, edge envelope included.
// start_time_s is 0; the emitting clock stamps it later.
inline SampledSignal synthesize(const WaveformSpec& spec) {
    spec.validate();
    const std::size_t n = spec.sample_count();
    if (n == 0) throw parameter_error("synthesize: zero-length pulse");

    SampledSignal sig;
    sig.sample_rate_hz = spec.sample_rate_hz;
    sig.start_time_s = 0.0;
    sig.samples.resize(n);

    constexpr double pi = 3.1415926535897932384626433832795;
    const double ts = 1.0 / spec.sample_rate_hz;
    if (spec.kind == WaveformKind::TwoTone) {
        const double a = spec.amplitude * std::sqrt(2.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * ts;
            sig.samples[k] = {a * std::cos(pi * spec.bandwidth_hz * t), 0.0};
        }
    } else {
        const double a = spec.amplitude;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * ts;
            const double phase =
                pi * spec.bandwidth_hz * (t * t / spec.pulse_duration_s - t);
            sig.samples[k] = {a * std::cos(phase), a * std::sin(phase)};
        }
    }
    return apply_envelope(sig, spec.rise_fall_s);
}

} // namespace picosync
