// Two-way time-transfer protocol: one exchange schedules a pulse from
// node n to node 0 and back, timestamps both receptions with the
// bias-corrected delay estimator, and combines the four timestamps into
// clock-offset and propagation-delay estimates. A campaign repeats the
// exchange across resynchronization epochs and applies corrections.
//
// Timestamp algebra (local = (1+ffe)*true + offset):
//   offset = [(t_rx0 - t_txn) + (t_tx0 - t_rxn)] / 2   (delay cancels)
//   delay  = [(t_rx0 - t_txn) - (t_tx0 - t_rxn)] / 2   (offset cancels)
// The offset recovered is epsilon_0 - epsilon_n evaluated mid-exchange,
// i.e. the amount to add to node n's clock.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "picosync/channel.hpp"
#include "picosync/clock.hpp"
#include "picosync/estimator.hpp"
#include "picosync/waveform.hpp"

namespace picosync {

struct TimestampQuadruple {
    double t_txn_s = 0.0;  // node n local transmit time
    double t_rx0_s = 0.0;  // node 0 local receive time
    double t_tx0_s = 0.0;  // node 0 local transmit time
    double t_rxn_s = 0.0;  // node n local receive time
};

inline double compute_offset(const TimestampQuadruple& q) {
    return ((q.t_rx0_s - q.t_txn_s) + (q.t_tx0_s - q.t_rxn_s)) / 2.0;
}

// Positive on a symmetric link; a negative value beyond the estimator
// noise floor indicates link asymmetry.
inline double compute_delay(const TimestampQuadruple& q) {
    return ((q.t_rx0_s - q.t_txn_s) - (q.t_tx0_s - q.t_rxn_s)) / 2.0;
}

struct EpochSchedule {
    double sync_epoch_s = 0.05001;     // duration of one exchange epoch
    double resync_interval_s = 0.1;    // period between corrections
    double proc_delay_s = 0.05;        // node 0 turnaround before the reply
    std::int64_t pulse_count = 1;      // exchanges averaged per epoch

    void validate() const {
        if (!(sync_epoch_s > 0.0) || !std::isfinite(sync_epoch_s))
            throw parameter_error("EpochSchedule: sync_epoch_s must be > 0");
        if (!(resync_interval_s >= sync_epoch_s))
            throw parameter_error(
                "EpochSchedule: resync_interval_s must be >= sync_epoch_s");
        if (!(proc_delay_s >= 0.0) || !std::isfinite(proc_delay_s))
            throw parameter_error("EpochSchedule: proc_delay_s must be >= 0");
        if (pulse_count < 1)
            throw parameter_error("EpochSchedule: pulse_count must be >= 1");
    }
};

struct ExchangeResult {
    TimestampQuadruple quad;
    double offset_estimate_s = 0.0;  // amount to add to node n's clock
    double delay_estimate_s = 0.0;
    double snr_forward_db = std::numeric_limits<double>::infinity();
    double snr_reverse_db = std::numeric_limits<double>::infinity();
};

// Fine-search half-width around the schedule-nominal arrival lag. The
// coarse alignment that precedes a campaign bounds |delay - offset| to a
// few samples, and the two-tone correlation repeats every 1/BW, so a
// wider search would admit ambiguity sidelobes instead of information.
// Exchanges whose pulse lands outside this budget fail with a
// retry-signaling error.
inline constexpr std::int64_t kCoarseSearchRadiusSamples = 4;

namespace detail {

// True time at which `state`'s clock triggers an event scheduled for
// local time `local_s`, with one fresh jitter draw keyed by `stream`.
inline double event_true_time(const ClockState& state, double local_s,
                              std::uint64_t stream) {
    return true_from_local(state, local_s - clock_jitter(state, stream));
}

// Measured pre-processed SNR of a gated capture: pulse interior versus
// the noise-only samples ahead of the arrival. NaN when the gate leaves
// too little noise-only headroom to measure.
inline double gated_snr_db(const SampledSignal& rx, std::int64_t arrival_index,
                           std::size_t pulse_len, std::size_t rise_samples) {
    const std::int64_t noise_end = arrival_index - 4;
    const std::int64_t interior_begin =
        arrival_index + static_cast<std::int64_t>(rise_samples) + 2;
    const std::int64_t interior_end = arrival_index +
                                      static_cast<std::int64_t>(pulse_len) -
                                      static_cast<std::int64_t>(rise_samples) - 2;
    const std::int64_t n = std::min<std::int64_t>(noise_end,
                                                  interior_end - interior_begin);
    if (n < 16) return std::numeric_limits<double>::quiet_NaN();

    SampledSignal pulse{{}, rx.sample_rate_hz, 0.0};
    SampledSignal noise{{}, rx.sample_rate_hz, 0.0};
    pulse.samples.assign(rx.samples.begin() + interior_begin,
                         rx.samples.begin() + interior_begin + n);
    noise.samples.assign(rx.samples.begin() + (noise_end - n),
                         rx.samples.begin() + noise_end);
    return estimate_snr(pulse, noise);
}

} // namespace detail

// Runs one two-way exchange. epoch_start_local_s is the shared schedule
// slot: node n transmits at that local time, node 0 gates around it, and
// the reply comes proc_delay_s later. Deterministic per seed. Throws
// window_overrun/boundary/flat_peak errors when the exchange should be
// retried, parameter/validation errors on misuse.
inline ExchangeResult run_exchange(const ClockState& node_n, const ClockState& node_0,
                                   const ChannelModel& ch, const WaveformSpec& spec,
                                   const BiasLut& lut, const EpochSchedule& sched,
                                   std::uint64_t seed,
                                   double epoch_start_local_s = 0.0) {
    node_n.validate();
    node_0.validate();
    ch.validate();
    spec.validate();
    sched.validate();
    if (!node_0.is_reference())
        throw parameter_error("run_exchange: node 0 must be the reference clock "
                              "(zero offset, zero frac_freq_error)");
    if (!ch.symmetric)
        throw parameter_error("run_exchange: channel must be symmetric");
    if (!(lut.waveform == spec))
        throw parameter_error("run_exchange: bias LUT built for a different waveform");

    const SampledSignal pulse = synthesize(spec);
    const double ts = pulse.sample_period_s();
    const double guard_s = static_cast<double>(kReceiveGuardSamples) * ts;
    const std::size_t window_len = pulse.samples.size() + 2 * kReceiveGuardSamples;
    const std::size_t rise_samples = static_cast<std::size_t>(
        std::ceil(spec.rise_fall_s * spec.sample_rate_hz));

    ChannelModel fwd = ch;
    fwd.rng_seed = detail::mix(seed, 0xF0);
    ChannelModel rev = ch;
    rev.rng_seed = detail::mix(seed, 0xF1);

    ExchangeResult res;

    // Node n -> node 0.
    res.quad.t_txn_s = epoch_start_local_s;
    SampledSignal tx = pulse;
    tx.start_time_s =
        detail::event_true_time(node_n, res.quad.t_txn_s, detail::mix(seed, 1));

    const double gate0_local = epoch_start_local_s - guard_s;
    const double gate0_true =
        detail::event_true_time(node_0, gate0_local, detail::mix(seed, 2));
    const SampledSignal rx0 = propagate(tx, fwd, gate0_true, window_len);
    const DelayEstimate est0 =
        estimate_delay(rx0, pulse, lut,
                       static_cast<std::int64_t>(kReceiveGuardSamples),
                       kCoarseSearchRadiusSamples);
    res.quad.t_rx0_s = gate0_local + est0.corrected_delay_s *
                                         (1.0 + node_0.frac_freq_error);
    res.snr_forward_db =
        fwd.noise_enabled()
            ? detail::gated_snr_db(rx0, est0.coarse_index, pulse.samples.size(),
                                   rise_samples)
            : std::numeric_limits<double>::infinity();

    // Node 0 -> node n, after the processing turnaround.
    res.quad.t_tx0_s = res.quad.t_rx0_s + sched.proc_delay_s;
    SampledSignal reply = pulse;
    reply.start_time_s =
        detail::event_true_time(node_0, res.quad.t_tx0_s, detail::mix(seed, 3));

    const double gate_n_local = epoch_start_local_s + sched.proc_delay_s - guard_s;
    const double gate_n_true =
        detail::event_true_time(node_n, gate_n_local, detail::mix(seed, 4));
    const SampledSignal rxn = propagate(reply, rev, gate_n_true, window_len);
    const DelayEstimate estn =
        estimate_delay(rxn, pulse, lut,
                       static_cast<std::int64_t>(kReceiveGuardSamples),
                       kCoarseSearchRadiusSamples);
    res.quad.t_rxn_s = gate_n_local + estn.corrected_delay_s *
                                          (1.0 + node_n.frac_freq_error);
    res.snr_reverse_db =
        rev.noise_enabled()
            ? detail::gated_snr_db(rxn, estn.coarse_index, pulse.samples.size(),
                                   rise_samples)
            : std::numeric_limits<double>::infinity();

    res.offset_estimate_s = compute_offset(res.quad);
    res.delay_estimate_s = compute_delay(res.quad);
    return res;
}

// Ground-truth offset the exchange should recover: the relative clock
// error at the nominal mid-exchange true time.
inline double expected_offset(const ClockState& node_n, const ClockState& node_0,
                              const EpochSchedule& sched,
                              double epoch_start_local_s = 0.0) {
    const double t_mid = epoch_start_local_s + sched.proc_delay_s / 2.0;
    return relative_offset_at(node_0, node_n, t_mid);
}

enum class ExchangeStatus { Ok, WindowOverrun, PeakAtBoundary, FlatPeak };

inline const char* to_string(ExchangeStatus s) {
    switch (s) {
        case ExchangeStatus::Ok: return "ok";
        case ExchangeStatus::WindowOverrun: return "window-overrun";
        case ExchangeStatus::PeakAtBoundary: return "peak-at-boundary";
        default: return "flat-peak";
    }
}

// One epoch of a campaign as exported for analysis: the exchange output
// plus simulation-only ground truth.
struct EpochTrace {
    std::int64_t epoch_index = 0;
    ExchangeStatus status = ExchangeStatus::Ok;
    ExchangeResult exchange;
    double true_offset_s = 0.0;      // ground-truth offset mid-exchange
    double true_delay_s = 0.0;       // ground-truth propagation delay
    double applied_offset_s = 0.0;   // correction added to node n's clock
    double residual_true_offset_s = 0.0;  // node n error after correction
};

struct CampaignResult {
    std::vector<CorrectionRecord> corrections;
    std::vector<EpochTrace> traces;
};

// Repeats the exchange every resync interval, applying each epoch's
// offset estimate to node n. Failed exchanges (retryable estimator or
// gating errors) are recorded and skipped without a correction.
inline CampaignResult run_campaign(const ClockState& node_n_initial,
                                   const ClockState& node_0,
                                   const ChannelModel& ch, const WaveformSpec& spec,
                                   const BiasLut& lut, const EpochSchedule& sched,
                                   std::int64_t epochs, std::uint64_t seed) {
    sched.validate();
    if (epochs < 1) throw parameter_error("run_campaign: epochs must be >= 1");
    if (sched.pulse_count > 1 &&
        !(static_cast<double>(sched.pulse_count) * sched.proc_delay_s * 1.5 <=
          sched.sync_epoch_s))
        throw parameter_error(
            "run_campaign: pulse_count exchanges do not fit in sync_epoch_s");

    CampaignResult out;
    out.corrections.reserve(static_cast<std::size_t>(epochs));
    ClockState node_n = node_n_initial;

    for (std::int64_t k = 0; k < epochs; ++k) {
        const double epoch_start =
            static_cast<double>(k) * sched.resync_interval_s;
        const double pulse_spacing =
            sched.sync_epoch_s / static_cast<double>(sched.pulse_count);

        EpochTrace trace;
        trace.epoch_index = k;
        trace.true_delay_s = ch.propagation_delay_s;
        trace.true_offset_s = expected_offset(node_n, node_0, sched, epoch_start);

        double offset_sum = 0.0;
        std::int64_t ok_pulses = 0;
        for (std::int64_t p = 0; p < sched.pulse_count; ++p) {
            const double slot = epoch_start + static_cast<double>(p) * pulse_spacing;
            try {
                const ExchangeResult ex = run_exchange(
                    node_n, node_0, ch, spec, lut, sched,
                    detail::mix(seed, static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(p)),
                    slot);
                offset_sum += ex.offset_estimate_s;
                ++ok_pulses;
                trace.exchange = ex;
            } catch (const window_overrun_error&) {
                trace.status = ExchangeStatus::WindowOverrun;
            } catch (const boundary_error&) {
                trace.status = ExchangeStatus::PeakAtBoundary;
            } catch (const flat_peak_error&) {
                trace.status = ExchangeStatus::FlatPeak;
            }
        }

        const double t_after = epoch_start + sched.sync_epoch_s;
        CorrectionRecord rec;
        rec.epoch_index = k;
        if (ok_pulses > 0) {
            const double delta = offset_sum / static_cast<double>(ok_pulses);
            node_n = apply_correction(node_n, -delta);  // add delta to the clock
            rec.applied_offset_s = delta;
        } else {
            rec.applied_offset_s = 0.0;
        }
        rec.residual_true_offset_s = true_offset_at(node_n, t_after);
        trace.applied_offset_s = rec.applied_offset_s;
        trace.residual_true_offset_s = rec.residual_true_offset_s;

        out.corrections.push_back(rec);
        out.traces.push_back(trace);
    }
    return out;
}

} // namespace picosync
