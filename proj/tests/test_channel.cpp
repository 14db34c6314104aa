// Channel model: placement, fractional delay, noise calibration.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "picosync/channel.hpp"
#include "picosync/detail/fft.hpp"
#include "picosync/estimator.hpp"
#include "picosync/waveform.hpp"

using namespace picosync;

namespace {

const WaveformSpec kSpec;  // two-tone 40 MHz, 10 us, 50 ns, 200 MSa/s

SampledSignal default_pulse() { return synthesize(kSpec); }

constexpr double kTs = 5e-9;
constexpr double kGuardS = static_cast<double>(kReceiveGuardSamples) * kTs;

} // namespace

TEST_CASE("identity channel reproduces the pulse exactly") {
    const auto pulse = default_pulse();
    ChannelModel ch;
    ch.propagation_delay_s = 0.0;  // snr stays +inf
    const std::size_t w = pulse.size() + 16;
    const auto out = propagate(pulse, ch, -8.0 * kTs, w);
    REQUIRE(out.size() == w);
    REQUIRE(out.start_time_s == -8.0 * kTs);
    double worst = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        worst = std::max(worst, std::abs(out.samples[i + 8] - pulse.samples[i]));
        peak = std::max(peak, std::abs(pulse.samples[i]));
    }
    REQUIRE(worst / peak < 1e-12);
}

TEST_CASE("17.3 ns delay lands at lag 3 past the gate and is recovered") {
    const auto pulse = default_pulse();
    ChannelModel ch;
    ch.propagation_delay_s = 17.3e-9;  // 3.46 samples
    const auto rx = propagate(pulse, ch, -kGuardS,
                              pulse.size() + 2 * kReceiveGuardSamples);
    const BiasLut lut = build_bias_lut(kSpec, 256);
    const DelayEstimate est = estimate_delay(rx, pulse, lut);
    REQUIRE(est.coarse_index ==
            static_cast<std::int64_t>(kReceiveGuardSamples) + 3);
    const double measured = est.corrected_delay_s - kGuardS;
    REQUIRE(measured == Catch::Approx(17.3e-9).margin(1e-12));
}

TEST_CASE("window overrun raises the gate-scheduling error") {
    const auto pulse = default_pulse();
    ChannelModel ch;
    ch.propagation_delay_s = 40e-6;  // way past the window
    REQUIRE_THROWS_AS(propagate(pulse, ch, 0.0, pulse.size() + 64),
                      window_overrun_error);
    ch.propagation_delay_s = 0.0;
    // arrival before the window opens
    REQUIRE_THROWS_AS(propagate(pulse, ch, 1e-6, pulse.size() + 64),
                      window_overrun_error);
}

TEST_CASE("fractional delay preserves the in-band magnitude spectrum") {
    // generous gate so window truncation sits far below the tolerance
    const std::size_t guard = 4096;
    const double guard_s = static_cast<double>(guard) * kTs;
    const auto pulse = default_pulse();
    ChannelModel ch;
    const std::size_t w = pulse.size() + 2 * guard;
    ch.propagation_delay_s = 0.0;
    const auto base = propagate(pulse, ch, -guard_s, w);
    ch.propagation_delay_s = 0.37 * kTs;
    const auto shifted = propagate(pulse, ch, -guard_s, w);

    auto spectrum = [&](const SampledSignal& s) {
        std::vector<cdouble> buf(detail::next_pow2(s.size()), cdouble{0, 0});
        std::copy(s.samples.begin(), s.samples.end(), buf.begin());
        detail::fft_pow2(buf, false);
        return buf;
    };
    const auto sa = spectrum(base);
    const auto sb = spectrum(shifted);
    double peak = 0.0;
    for (const auto& v : sa) peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) {
        if (std::abs(sa[k]) < 1e-3 * peak) continue;  // in-band bins only
        worst = std::max(worst,
                         std::fabs(std::abs(sb[k]) - std::abs(sa[k])) / std::abs(sa[k]));
    }
    REQUIRE(worst < 1e-9);
}

TEST_CASE("two fractional hops equal one combined hop on the interior") {
    const std::size_t guard = 4096;
    const double guard_s = static_cast<double>(guard) * kTs;
    const auto pulse = default_pulse();
    const std::size_t w = pulse.size() + 2 * guard;
    const std::size_t w2 = w + 4;
    ChannelModel ch;

    ch.propagation_delay_s = 0.3 * kTs;
    const auto first = propagate(pulse, ch, -guard_s, w);
    ch.propagation_delay_s = 0.45 * kTs;
    const auto composed = propagate(first, ch, -guard_s - kTs, w2);

    ch.propagation_delay_s = 0.75 * kTs;
    const auto direct = propagate(pulse, ch, -guard_s - kTs, w2);

    double peak = 0.0;
    for (const auto& v : direct.samples) peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    const std::size_t begin = guard + 1 + 40;
    const std::size_t end = guard + 1 + pulse.size() - 40;
    for (std::size_t i = begin; i < end; ++i)
        worst = std::max(worst, std::abs(composed.samples[i] - direct.samples[i]));
    REQUIRE(worst / peak < 1e-10);
}

TEST_CASE("propagate honors the requested snr") {
    const auto pulse = default_pulse();
    ChannelModel ch;
    ch.propagation_delay_s = 3e-9;
    ch.snr_db = 36.0;
    ch.rng_seed = 99;
    // generous gate so both measurement windows get 1000 samples
    const std::size_t lead = 1100;
    const auto rx = propagate(pulse, ch, -static_cast<double>(lead) * kTs,
                              pulse.size() + 2 * lead);
    SampledSignal noise{{}, rx.sample_rate_hz, 0.0};
    noise.samples.assign(rx.samples.begin(), rx.samples.begin() + 1000);
    SampledSignal mid{{}, rx.sample_rate_hz, 0.0};
    mid.samples.assign(rx.samples.begin() + lead + 500,
                       rx.samples.begin() + lead + 1500);
    REQUIRE(estimate_snr(mid, noise) == Catch::Approx(36.0).margin(0.5));
}

TEST_CASE("add_awgn calibration and determinism") {
    WaveformSpec long_spec = kSpec;
    long_spec.pulse_duration_s = 50e-6;  // 10^4 samples
    const auto sig = synthesize(long_spec);

    const auto same = add_awgn(sig, std::numeric_limits<double>::infinity(), 1);
    REQUIRE(same.samples == sig.samples);

    const auto noisy = add_awgn(sig, 0.0, 7);
    const auto noisy2 = add_awgn(sig, 0.0, 7);
    REQUIRE(noisy.samples == noisy2.samples);  // bit-identical per seed

    // clean-signal-referenced power ratio ~ 1 at 0 dB
    const double ps = interior_mean_power(sig);
    double pn = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i)
        pn += std::norm(noisy.samples[i] - sig.samples[i]);
    pn /= static_cast<double>(sig.size());
    REQUIRE(ps / pn == Catch::Approx(1.0).epsilon(0.05));

    SampledSignal zero{{cdouble{0, 0}, cdouble{0, 0}, cdouble{0, 0}, cdouble{0, 0}},
                       1.0, 0.0};
    REQUIRE_THROWS_AS(add_awgn(zero, 10.0, 1), parameter_error);
}

TEST_CASE("realized snr converges to the request (law of large numbers)") {
    WaveformSpec long_spec = kSpec;
    long_spec.pulse_duration_s = 500e-6;  // 10^5 samples
    const auto sig = synthesize(long_spec);
    const auto noisy = add_awgn(sig, 10.0, 21);
    const double ps = interior_mean_power(sig);
    double pn = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i)
        pn += std::norm(noisy.samples[i] - sig.samples[i]);
    pn /= static_cast<double>(sig.size());
    REQUIRE(10.0 * std::log10(ps / pn) == Catch::Approx(10.0).margin(0.2));
}

TEST_CASE("channel validation") {
    ChannelModel ch;
    ch.propagation_delay_s = -1.0;
    REQUIRE_THROWS_AS(ch.validate(), parameter_error);
    ch = ChannelModel{};
    ch.snr_db = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(ch.validate(), parameter_error);
}
