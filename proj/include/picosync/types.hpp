// Core value types passed through the whole processing chain.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "picosync/errors.hpp"

namespace picosync {

using cdouble = std::complex<double>;

// A complex baseband sample sequence. start_time_s stamps sample 0 in the
// timebase of whatever clock emitted or gated the signal (the protocol
// layer keeps track of whose timebase that is).
struct SampledSignal {
    std::vector<cdouble> samples;
    double sample_rate_hz = 0.0;
    double start_time_s = 0.0;

    std::size_t size() const { return samples.size(); }
    double sample_period_s() const { return 1.0 / sample_rate_hz; }
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }

    void validate() const {
        if (samples.empty()) throw parameter_error("SampledSignal: samples empty");
        if (!(sample_rate_hz > 0.0))
            throw parameter_error("SampledSignal: sample_rate_hz must be > 0");
    }
};

// Signal energy, sum(|x|^2) / fs.
inline double signal_energy(const SampledSignal& s) {
    s.validate();
    double acc = 0.0;
    for (const auto& x : s.samples) acc += std::norm(x);
    return acc / s.sample_rate_hz;
}

// Mean |x|^2 over the central half of the signal. For a pulse whose
// rise/fall ramps are shorter than a quarter of its duration this is the
// constant-modulus interior power used by the SNR definition.
inline double interior_mean_power(const SampledSignal& s) {
    s.validate();
    const std::size_t n = s.samples.size();
    const std::size_t lo = n / 4;
    const std::size_t hi = n - n / 4;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += std::norm(s.samples[i]);
    return acc / static_cast<double>(hi - lo);
}

} // namespace picosync
