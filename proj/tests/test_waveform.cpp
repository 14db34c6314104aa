// Waveform synthesis: sample counts, spectra, envelopes, energy laws.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "picosync/detail/fft.hpp"
#include "picosync/waveform.hpp"

using namespace picosync;

namespace {

WaveformSpec table_defaults(WaveformKind kind = WaveformKind::TwoTone) {
    WaveformSpec s;
    s.kind = kind;
    return s;  // 40 MHz, 10 us, 50 ns, 200 MSa/s, amplitude 1
}

// Instantaneous frequency by central phase difference, the independent
// oracle for the LFM sweep law.
double inst_freq_hz(const SampledSignal& s, std::size_t k) {
    const cdouble rot = s.samples[k + 1] * std::conj(s.samples[k - 1]);
    return std::arg(rot) / (2.0 * 2.0 * M_PI) * s.sample_rate_hz;
}

} // namespace

TEST_CASE("table parameters give 2000 samples") {
    REQUIRE(synthesize(table_defaults()).size() == 2000);
    REQUIRE(synthesize(table_defaults(WaveformKind::Lfm)).size() == 2000);
}

TEST_CASE("spec validation names the violated invariant") {
    WaveformSpec s = table_defaults();
    s.bandwidth_hz = 250e6;  // above complex Nyquist
    REQUIRE_THROWS_WITH(s.validate(), Catch::Matchers::ContainsSubstring("Nyquist"));
    s = table_defaults();
    s.rise_fall_s = 6e-6;
    REQUIRE_THROWS_WITH(s.validate(),
                        Catch::Matchers::ContainsSubstring("rise_fall_s"));
    s = table_defaults();
    s.pulse_duration_s = -1.0;
    REQUIRE_THROWS_AS(s.validate(), parameter_error);
    s = table_defaults();
    s.amplitude = 0.0;
    REQUIRE_THROWS_AS(s.validate(), parameter_error);
}

TEST_CASE("two-tone spectrum has exactly two dominant lines at +/- BW/2") {
    WaveformSpec s = table_defaults();
    s.rise_fall_s = 0.0;
    const auto sig = synthesize(s);
    const auto spec = detail::dft_exact(sig.samples);
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    const double floor = peak * 1e-2;  // -40 dB of peak
    std::vector<std::size_t> dominant;
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (std::abs(spec[k]) > floor) dominant.push_back(k);
    REQUIRE(dominant.size() == 2);
    // +/- 20 MHz at df = 100 kHz -> bins 200 and N-200
    REQUIRE(dominant[0] == 200);
    REQUIRE(dominant[1] == spec.size() - 200);
}

TEST_CASE("degenerate zero-separation two-tone is a single line at 0 Hz") {
    WaveformSpec s = table_defaults();
    s.bandwidth_hz = 0.0;
    s.rise_fall_s = 0.0;
    const auto sig = synthesize(s);
    const auto spec = detail::dft_exact(sig.samples);
    double peak = 0.0;
    std::size_t peak_bin = 0;
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (std::abs(spec[k]) > peak) {
            peak = std::abs(spec[k]);
            peak_bin = k;
        }
    REQUIRE(peak_bin == 0);
    std::size_t above = 0;
    for (const auto& v : spec)
        if (std::abs(v) > peak * 1e-2) ++above;
    REQUIRE(above == 1);
}

TEST_CASE("lfm instantaneous frequency sweeps through zero at midpulse") {
    WaveformSpec s = table_defaults(WaveformKind::Lfm);
    s.rise_fall_s = 0.0;
    const auto sig = synthesize(s);
    const std::size_t mid = sig.size() / 2;
    REQUIRE(std::fabs(inst_freq_hz(sig, mid)) < 1e-6 * s.bandwidth_hz);
    // linear sweep law away from the midpoint
    auto want = [&](std::size_t k) {
        const double t = static_cast<double>(k) / s.sample_rate_hz;
        return -s.bandwidth_hz / 2 + s.bandwidth_hz * t / s.pulse_duration_s;
    };
    REQUIRE(inst_freq_hz(sig, 4) == Catch::Approx(want(4)).epsilon(1e-9));
    REQUIRE(inst_freq_hz(sig, sig.size() - 5) ==
            Catch::Approx(want(sig.size() - 5)).epsilon(1e-9));
}

TEST_CASE("envelope identity at zero rise and error past half-span") {
    const auto sig = synthesize([] {
        WaveformSpec s = table_defaults();
        s.rise_fall_s = 0.0;
        return s;
    }());
    const auto same = apply_envelope(sig, 0.0);
    REQUIRE(same.samples == sig.samples);
    REQUIRE_THROWS_AS(apply_envelope(sig, 6e-6), parameter_error);
}

TEST_CASE("50 ns ramp at 200 MSa/s shapes the first 10 samples") {
    // constant-modulus input isolates the envelope
    SampledSignal flat;
    flat.sample_rate_hz = 200e6;
    flat.samples.assign(2000, cdouble{1.0, 0.0});
    const auto shaped = apply_envelope(flat, 50e-9);
    for (std::size_t k = 0; k + 1 < 10; ++k)
        REQUIRE(std::abs(shaped.samples[k]) < std::abs(shaped.samples[k + 1]));

    // on the synthesized pulse the interior is untouched
    WaveformSpec hard = table_defaults();
    hard.rise_fall_s = 0.0;
    const auto bare = synthesize(hard);
    const auto sig = synthesize(table_defaults());
    for (std::size_t k = 20; k < 40; ++k)
        REQUIRE(std::abs(sig.samples[k] - bare.samples[k]) < 1e-15);
}

TEST_CASE("envelope midpoint sits at exactly half magnitude") {
    // constant signal isolates the envelope shape
    SampledSignal flat;
    flat.sample_rate_hz = 200e6;
    flat.samples.assign(2000, cdouble{1.0, 0.0});
    const auto shaped = apply_envelope(flat, 50e-9);
    REQUIRE(std::abs(shaped.samples[5]) == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(std::abs(shaped.samples[0]) == 0.0);
    REQUIRE(std::abs(shaped.samples[10]) == Catch::Approx(1.0).margin(1e-12));
    // sample-symmetric front/back
    for (std::size_t k = 0; k < 12; ++k)
        REQUIRE(std::abs(shaped.samples[k]) ==
                Catch::Approx(std::abs(shaped.samples[1999 - k])).margin(1e-12));
}

TEST_CASE("energy scales linearly with pulse duration") {
    WaveformSpec a = table_defaults();
    WaveformSpec b = table_defaults();
    b.pulse_duration_s = 2 * a.pulse_duration_s;
    const double ea = signal_energy(synthesize(a));
    const double eb = signal_energy(synthesize(b));
    REQUIRE(eb / ea == Catch::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("two-tone and lfm of equal parameters carry equal energy") {
    const double e_tt = signal_energy(synthesize(table_defaults()));
    const double e_lfm = signal_energy(synthesize(table_defaults(WaveformKind::Lfm)));
    REQUIRE(e_tt / e_lfm == Catch::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("synthesized pulses have finite positive energy") {
    for (auto kind : {WaveformKind::TwoTone, WaveformKind::Lfm}) {
        const double e = signal_energy(synthesize(table_defaults(kind)));
        REQUIRE(std::isfinite(e));
        REQUIRE(e > 0.0);
    }
}
