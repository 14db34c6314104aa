// Experiment harness: JSON configuration ingestion, sweep runners with
// deterministic per-trial seeding, bias-curve generation, campaign
// execution, and CSV/JSON report emission.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "picosync/analysis.hpp"
#include "picosync/detail/stats.hpp"
#include "picosync/twtt.hpp"

namespace picosync {

enum class ExperimentKind { SnrSweep, ToneSepSweep, BiasCurve, Campaign };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SnrSweep: return "snr-sweep";
        case ExperimentKind::ToneSepSweep: return "tone-sep-sweep";
        case ExperimentKind::BiasCurve: return "bias-curve";
        default: return "campaign";
    }
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::SnrSweep;
    WaveformSpec waveform;                       // defaults mirror Table-style values
    std::vector<double> snr_points_db = {6, 9, 12, 15, 18, 21, 24, 27, 30, 33, 36};
    std::vector<double> tone_sep_points_hz = {10e6, 20e6, 30e6, 40e6, 50e6};
    std::int64_t trials_per_point = 1000;
    ChannelModel channel{3e-9, 36.0, true, 0};
    bool noise_enabled = true;
    ClockState node0{0.0, 0.0, 0.0, 1};
    ClockState node_n{0.0, 0.0, 0.0, 2};
    EpochSchedule schedule;
    std::int64_t epochs = 100;
    std::size_t lut_bins = 1024;
    std::string lut_cache_path;  // optional campaign-time cache
    std::uint64_t seed = 1;
    std::string output_path;
    int threads = 1;

    void validate() const;
};

struct SweepRecord {
    double independent_var = 0.0;      // SNR in dB or tone separation in Hz
    double measured_std_s = 0.0;
    double measured_mean_bias_s = 0.0;
    double crlb_std_s = 0.0;           // bound on the offset estimate
    std::int64_t trials = 0;
    std::int64_t failures = 0;
};

struct BiasCurvePoint {
    double fractional_delay = 0.0;
    double bias_s = 0.0;            // raw QLS bias, configured waveform
    double corrected_bias_s = 0.0;  // residual after table correction
    double lfm_bias_s = 0.0;        // equal-bandwidth LFM reference
};

inline void ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const char* field) {
        if (!ok) bad.emplace_back(field);
    };
    try {
        waveform.validate();
    } catch (const parameter_error& e) {
        bad.emplace_back(std::string("waveform: ") + e.what());
    }
    try {
        channel.validate();
    } catch (const parameter_error& e) {
        bad.emplace_back(std::string("channel: ") + e.what());
    }
    try {
        node0.validate();
        node_n.validate();
    } catch (const parameter_error& e) {
        bad.emplace_back(std::string("clocks: ") + e.what());
    }
    try {
        schedule.validate();
    } catch (const parameter_error& e) {
        bad.emplace_back(std::string("schedule: ") + e.what());
    }
    check(node0.is_reference(), "clocks.node0: must be the reference (zero offset, zero ffe)");

    const bool statistics =
        experiment == ExperimentKind::SnrSweep || experiment == ExperimentKind::ToneSepSweep;
    if (statistics) check(trials_per_point >= 30, "trials_per_point: must be >= 30");
    if (experiment == ExperimentKind::SnrSweep) {
        check(!snr_points_db.empty(), "snr_points_db: must be non-empty");
        for (double s : snr_points_db)
            check(std::isfinite(s), "snr_points_db: points must be finite");
    }
    if (experiment == ExperimentKind::ToneSepSweep) {
        check(!tone_sep_points_hz.empty(), "tone_sep_points_hz: must be non-empty");
        for (double b : tone_sep_points_hz)
            check(b > 0.0 && b < waveform.sample_rate_hz,
                  "tone_sep_points_hz: points must be in (0, sample_rate_hz)");
        check(!noise_enabled || std::isfinite(channel.snr_db),
              "channel.snr_db: must be finite for a tone-separation sweep");
    }
    if (experiment == ExperimentKind::Campaign) check(epochs >= 1, "epochs: must be >= 1");
    check(lut_bins >= 64, "lut_bins: must be >= 64");
    check(threads >= 1, "threads: must be >= 1");
    if (!bad.empty()) {
        std::string msg = "invalid experiment config: ";
        for (std::size_t i = 0; i < bad.size(); ++i)
            msg += (i ? "; " : "") + bad[i];
        throw validation_error(msg, bad);
    }
}

namespace detail {

struct TrialSlot {
    double offset_error_s = 0.0;
    bool ok = false;
};

// Runs trials_per_point independent exchanges at one operating point.
// Trials are indexed, seeded from (seed, point, trial) and aggregated in
// index order, so the record is identical for any thread count.
inline SweepRecord run_sweep_point(const ExperimentConfig& cfg,
                                   const WaveformSpec& spec, const BiasLut& lut,
                                   double independent_var, double snr_db,
                                   std::size_t point_index) {
    ChannelModel ch = cfg.channel;
    ch.snr_db = cfg.noise_enabled ? snr_db
                                  : std::numeric_limits<double>::infinity();
    const double truth = expected_offset(cfg.node_n, cfg.node0, cfg.schedule, 0.0);
    const std::int64_t trials = cfg.trials_per_point;
    std::vector<TrialSlot> slots(static_cast<std::size_t>(trials));

    std::exception_ptr worker_error;
    std::mutex error_mu;
    auto work = [&](std::int64_t lo, std::int64_t hi) {
        try {
            for (std::int64_t t = lo; t < hi; ++t) {
                const std::uint64_t trial_seed =
                    mix(cfg.seed, static_cast<std::uint64_t>(point_index),
                        static_cast<std::uint64_t>(t));
                auto& slot = slots[static_cast<std::size_t>(t)];
                try {
                    const ExchangeResult ex =
                        run_exchange(cfg.node_n, cfg.node0, ch, spec, lut,
                                     cfg.schedule, trial_seed, 0.0);
                    slot.offset_error_s = ex.offset_estimate_s - truth;
                    slot.ok = true;
                } catch (const error& e) {
                    if (!is_retryable(e)) throw;
                    slot.ok = false;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!worker_error) worker_error = std::current_exception();
        }
    };

    const int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1 || trials < 2 * nthreads) {
        work(0, trials);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (trials + nthreads - 1) / nthreads;
        for (int w = 0; w < nthreads; ++w) {
            const std::int64_t lo = w * chunk;
            const std::int64_t hi = std::min<std::int64_t>(trials, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);

    std::vector<double> errors;
    errors.reserve(slots.size());
    std::int64_t failures = 0;
    for (const auto& s : slots) {
        if (s.ok)
            errors.push_back(s.offset_error_s);
        else
            ++failures;
    }

    SweepRecord rec;
    rec.independent_var = independent_var;
    rec.trials = trials;
    rec.failures = failures;
    if (errors.size() >= 2) {
        rec.measured_std_s = sample_std(errors);
        rec.measured_mean_bias_s = mean(errors);
    } else {
        rec.measured_std_s = std::numeric_limits<double>::quiet_NaN();
        rec.measured_mean_bias_s = std::numeric_limits<double>::quiet_NaN();
    }
    rec.crlb_std_s = two_way_offset_crlb_std(
        msb_closed_form(spec.kind, spec.bandwidth_hz),
        es_n0(spec.pulse_duration_s, snr_db, spec.sample_rate_hz));
    return rec;
}

} // namespace detail

// Monte Carlo sweep over pre-processed SNR at the configured waveform.
inline std::vector<SweepRecord> run_snr_sweep(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::SnrSweep)
        throw validation_error("run_snr_sweep: config experiment is not snr-sweep",
                               {"experiment"});
    cfg.validate();
    const BiasLut lut = build_bias_lut(cfg.waveform, cfg.lut_bins);
    std::vector<SweepRecord> records;
    records.reserve(cfg.snr_points_db.size());
    for (std::size_t i = 0; i < cfg.snr_points_db.size(); ++i)
        records.push_back(detail::run_sweep_point(cfg, cfg.waveform, lut,
                                                  cfg.snr_points_db[i],
                                                  cfg.snr_points_db[i], i));
    return records;
}

// Monte Carlo sweep over tone separation at fixed SNR. The bias table is
// rebuilt per point because the bias curve is waveform-dependent.
inline std::vector<SweepRecord> run_tone_sep_sweep(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::ToneSepSweep)
        throw validation_error(
            "run_tone_sep_sweep: config experiment is not tone-sep-sweep",
            {"experiment"});
    cfg.validate();
    std::vector<SweepRecord> records;
    records.reserve(cfg.tone_sep_points_hz.size());
    for (std::size_t i = 0; i < cfg.tone_sep_points_hz.size(); ++i) {
        WaveformSpec spec = cfg.waveform;
        spec.bandwidth_hz = cfg.tone_sep_points_hz[i];
        const BiasLut lut = build_bias_lut(spec, cfg.lut_bins);
        records.push_back(detail::run_sweep_point(cfg, spec, lut,
                                                  spec.bandwidth_hz,
                                                  cfg.channel.snr_db, i));
    }
    return records;
}

// Noiseless QLS bias across one sample interval, before and after table
// correction, plus an equal-bandwidth LFM reference column. Evaluated at
// bin midpoints so the corrected column reflects honest interpolation
// and query error rather than table nodes.
inline std::vector<BiasCurvePoint> run_bias_curve(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::BiasCurve)
        throw validation_error("run_bias_curve: config experiment is not bias-curve",
                               {"experiment"});
    cfg.validate();
    const BiasLut lut = build_bias_lut(cfg.waveform, cfg.lut_bins);
    detail::FractionalSweeper primary(cfg.waveform);
    WaveformSpec lfm_spec = cfg.waveform;
    lfm_spec.kind = WaveformKind::Lfm;
    detail::FractionalSweeper lfm(lfm_spec);

    const double ts = 1.0 / cfg.waveform.sample_rate_hz;
    const std::size_t points = cfg.lut_bins;
    std::vector<BiasCurvePoint> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double f = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
        BiasCurvePoint p;
        p.fractional_delay = f;
        const double tau_true = primary.true_delay_at(f);
        const double tau_hat = primary.estimate_at(f);
        p.bias_s = tau_hat - tau_true;
        p.corrected_bias_s = correct_bias(tau_hat, lut, ts) - tau_true;
        p.lfm_bias_s = lfm.estimate_at(f) - lfm.true_delay_at(f);
        out.push_back(p);
    }
    return out;
}

// Campaign with per-epoch corrections; returns the exportable traces.
inline CampaignResult run_campaign_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::Campaign)
        throw validation_error(
            "run_campaign_experiment: config experiment is not campaign",
            {"experiment"});
    cfg.validate();
    ChannelModel ch = cfg.channel;
    if (!cfg.noise_enabled) ch.snr_db = std::numeric_limits<double>::infinity();

    BiasLut lut;
    bool loaded = false;
    if (!cfg.lut_cache_path.empty()) {
        try {
            lut = load_bias_lut(cfg.lut_cache_path);
            loaded = lut.waveform == cfg.waveform && lut.bin_count() == cfg.lut_bins;
        } catch (const io_error&) {
            loaded = false;  // absent or stale cache; rebuild below
        }
    }
    if (!loaded) {
        lut = build_bias_lut(cfg.waveform, cfg.lut_bins);
        if (!cfg.lut_cache_path.empty()) save_bias_lut(lut, cfg.lut_cache_path);
    }
    return run_campaign(cfg.node_n, cfg.node0, ch, cfg.waveform, lut,
                        cfg.schedule, cfg.epochs, cfg.seed);
}

// --- report emission ----------------------------------------------------

enum class ReportFormat { Csv, Json };

namespace detail {

inline std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("emit_report: cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw io_error("emit_report: write to '" + path + "' failed");
}

} // namespace detail

inline void emit_report(const std::vector<SweepRecord>& records,
                        const std::string& path, ReportFormat format) {
    if (records.empty()) throw parameter_error("emit_report: no records");
    if (format == ReportFormat::Csv) {
        std::string body =
            "independent_var,measured_std_s,measured_mean_bias_s,crlb_std_s,trials,failures\n";
        for (const auto& r : records) {
            body += detail::fmt_full(r.independent_var) + "," +
                    detail::fmt_full(r.measured_std_s) + "," +
                    detail::fmt_full(r.measured_mean_bias_s) + "," +
                    detail::fmt_full(r.crlb_std_s) + "," +
                    std::to_string(r.trials) + "," + std::to_string(r.failures) + "\n";
        }
        detail::write_text_file(path, body);
        return;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        arr.push_back({{"independent_var", r.independent_var},
                       {"measured_std_s", r.measured_std_s},
                       {"measured_mean_bias_s", r.measured_mean_bias_s},
                       {"crlb_std_s", r.crlb_std_s},
                       {"trials", r.trials},
                       {"failures", r.failures}});
    }
    detail::write_text_file(path, arr.dump(1) + "\n");
}

inline void emit_report(const std::vector<BiasCurvePoint>& records,
                        const std::string& path, ReportFormat format) {
    if (records.empty()) throw parameter_error("emit_report: no records");
    if (format == ReportFormat::Csv) {
        std::string body = "fractional_delay,bias_s,corrected_bias_s,lfm_bias_s\n";
        for (const auto& r : records) {
            body += detail::fmt_full(r.fractional_delay) + "," +
                    detail::fmt_full(r.bias_s) + "," +
                    detail::fmt_full(r.corrected_bias_s) + "," +
                    detail::fmt_full(r.lfm_bias_s) + "\n";
        }
        detail::write_text_file(path, body);
        return;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        arr.push_back({{"fractional_delay", r.fractional_delay},
                       {"bias_s", r.bias_s},
                       {"corrected_bias_s", r.corrected_bias_s},
                       {"lfm_bias_s", r.lfm_bias_s}});
    }
    detail::write_text_file(path, arr.dump(1) + "\n");
}

inline void emit_report(const std::vector<EpochTrace>& records,
                        const std::string& path, ReportFormat format) {
    if (records.empty()) throw parameter_error("emit_report: no records");
    if (format == ReportFormat::Csv) {
        std::string body =
            "epoch,status,t_txn_s,t_rx0_s,t_tx0_s,t_rxn_s,offset_estimate_s,"
            "delay_estimate_s,snr_forward_db,snr_reverse_db,applied_offset_s,"
            "residual_true_offset_s,true_offset_s,true_delay_s\n";
        for (const auto& r : records) {
            body += std::to_string(r.epoch_index);
            body += ",";
            body += to_string(r.status);
            for (double v :
                 {r.exchange.quad.t_txn_s, r.exchange.quad.t_rx0_s,
                  r.exchange.quad.t_tx0_s, r.exchange.quad.t_rxn_s,
                  r.exchange.offset_estimate_s, r.exchange.delay_estimate_s,
                  r.exchange.snr_forward_db, r.exchange.snr_reverse_db,
                  r.applied_offset_s, r.residual_true_offset_s, r.true_offset_s,
                  r.true_delay_s})
                body += "," + detail::fmt_full(v);
            body += "\n";
        }
        detail::write_text_file(path, body);
        return;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        arr.push_back({{"epoch", r.epoch_index},
                       {"status", to_string(r.status)},
                       {"t_txn_s", r.exchange.quad.t_txn_s},
                       {"t_rx0_s", r.exchange.quad.t_rx0_s},
                       {"t_tx0_s", r.exchange.quad.t_tx0_s},
                       {"t_rxn_s", r.exchange.quad.t_rxn_s},
                       {"offset_estimate_s", r.exchange.offset_estimate_s},
                       {"delay_estimate_s", r.exchange.delay_estimate_s},
                       {"snr_forward_db", r.exchange.snr_forward_db},
                       {"snr_reverse_db", r.exchange.snr_reverse_db},
                       {"applied_offset_s", r.applied_offset_s},
                       {"residual_true_offset_s", r.residual_true_offset_s},
                       {"true_offset_s", r.true_offset_s},
                       {"true_delay_s", r.true_delay_s}});
    }
    detail::write_text_file(path, arr.dump(1) + "\n");
}

// --- configuration ingestion --------------------------------------------

namespace detail {

inline double json_snr(const nlohmann::json& v, std::vector<std::string>& bad,
                       const char* field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
    }
    bad.emplace_back(std::string(field) + ": expected number or \"inf\"");
    return 0.0;
}

template <typename T>
inline T json_get(const nlohmann::json& obj, const char* key, T fallback,
                  std::vector<std::string>& bad, const char* context) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad.emplace_back(std::string(context) + "." + key + ": wrong type");
        return fallback;
    }
}

inline void check_known_keys(const nlohmann::json& obj,
                             std::initializer_list<const char*> known,
                             std::vector<std::string>& bad, const char* context) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) ok = true;
        if (!ok) bad.emplace_back(std::string(context) + ": unknown field '" +
                                  item.key() + "'");
    }
}

} // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    std::vector<std::string> bad;
    ExperimentConfig cfg;

    detail::check_known_keys(j,
                             {"experiment", "waveform", "snr_points_db",
                              "tone_sep_points_hz", "trials_per_point", "channel",
                              "clocks", "schedule", "epochs", "lut_bins",
                              "lut_cache_path", "seed", "output_path", "threads"},
                             bad, "config");

    const std::string kind =
        detail::json_get<std::string>(j, "experiment", "", bad, "config");
    if (kind == "snr-sweep")
        cfg.experiment = ExperimentKind::SnrSweep;
    else if (kind == "tone-sep-sweep")
        cfg.experiment = ExperimentKind::ToneSepSweep;
    else if (kind == "bias-curve")
        cfg.experiment = ExperimentKind::BiasCurve;
    else if (kind == "campaign")
        cfg.experiment = ExperimentKind::Campaign;
    else
        bad.emplace_back("experiment: must be one of snr-sweep, tone-sep-sweep, "
                         "bias-curve, campaign");

    if (j.contains("waveform")) {
        const auto& w = j.at("waveform");
        detail::check_known_keys(w,
                                 {"kind", "bandwidth_hz", "pulse_duration_s",
                                  "rise_fall_s", "sample_rate_hz", "amplitude"},
                                 bad, "waveform");
        const std::string wk =
            detail::json_get<std::string>(w, "kind", "two-tone", bad, "waveform");
        if (wk == "two-tone")
            cfg.waveform.kind = WaveformKind::TwoTone;
        else if (wk == "lfm")
            cfg.waveform.kind = WaveformKind::Lfm;
        else
            bad.emplace_back("waveform.kind: must be 'two-tone' or 'lfm'");
        cfg.waveform.bandwidth_hz = detail::json_get<double>(
            w, "bandwidth_hz", cfg.waveform.bandwidth_hz, bad, "waveform");
        cfg.waveform.pulse_duration_s = detail::json_get<double>(
            w, "pulse_duration_s", cfg.waveform.pulse_duration_s, bad, "waveform");
        cfg.waveform.rise_fall_s = detail::json_get<double>(
            w, "rise_fall_s", cfg.waveform.rise_fall_s, bad, "waveform");
        cfg.waveform.sample_rate_hz = detail::json_get<double>(
            w, "sample_rate_hz", cfg.waveform.sample_rate_hz, bad, "waveform");
        cfg.waveform.amplitude = detail::json_get<double>(
            w, "amplitude", cfg.waveform.amplitude, bad, "waveform");
    }

    if (j.contains("snr_points_db"))
        cfg.snr_points_db = detail::json_get<std::vector<double>>(
            j, "snr_points_db", cfg.snr_points_db, bad, "config");
    if (j.contains("tone_sep_points_hz"))
        cfg.tone_sep_points_hz = detail::json_get<std::vector<double>>(
            j, "tone_sep_points_hz", cfg.tone_sep_points_hz, bad, "config");
    cfg.trials_per_point = detail::json_get<std::int64_t>(
        j, "trials_per_point", cfg.trials_per_point, bad, "config");

    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        detail::check_known_keys(
            c, {"propagation_delay_s", "snr_db", "symmetric", "noise_enabled", "rng_seed"},
            bad, "channel");
        cfg.channel.propagation_delay_s = detail::json_get<double>(
            c, "propagation_delay_s", cfg.channel.propagation_delay_s, bad, "channel");
        if (c.contains("snr_db"))
            cfg.channel.snr_db = detail::json_snr(c.at("snr_db"), bad, "channel.snr_db");
        cfg.channel.symmetric =
            detail::json_get<bool>(c, "symmetric", cfg.channel.symmetric, bad, "channel");
        cfg.noise_enabled =
            detail::json_get<bool>(c, "noise_enabled", cfg.noise_enabled, bad, "channel");
        cfg.channel.rng_seed = detail::json_get<std::uint64_t>(
            c, "rng_seed", cfg.channel.rng_seed, bad, "channel");
    }

    auto parse_clock = [&](const nlohmann::json& c, ClockState& state,
                           const char* context) {
        detail::check_known_keys(
            c, {"offset_s", "frac_freq_error", "jitter_std_s", "rng_seed"}, bad, context);
        state.offset_s =
            detail::json_get<double>(c, "offset_s", state.offset_s, bad, context);
        state.frac_freq_error = detail::json_get<double>(
            c, "frac_freq_error", state.frac_freq_error, bad, context);
        state.jitter_std_s = detail::json_get<double>(
            c, "jitter_std_s", state.jitter_std_s, bad, context);
        state.rng_seed = detail::json_get<std::uint64_t>(
            c, "rng_seed", state.rng_seed, bad, context);
    };
    if (j.contains("clocks")) {
        const auto& c = j.at("clocks");
        detail::check_known_keys(c, {"node0", "node_n"}, bad, "clocks");
        if (c.contains("node0")) parse_clock(c.at("node0"), cfg.node0, "clocks.node0");
        if (c.contains("node_n")) parse_clock(c.at("node_n"), cfg.node_n, "clocks.node_n");
    }

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::check_known_keys(
            s, {"sync_epoch_s", "resync_interval_s", "proc_delay_s", "pulse_count"},
            bad, "schedule");
        cfg.schedule.sync_epoch_s = detail::json_get<double>(
            s, "sync_epoch_s", cfg.schedule.sync_epoch_s, bad, "schedule");
        cfg.schedule.resync_interval_s = detail::json_get<double>(
            s, "resync_interval_s", cfg.schedule.resync_interval_s, bad, "schedule");
        cfg.schedule.proc_delay_s = detail::json_get<double>(
            s, "proc_delay_s", cfg.schedule.proc_delay_s, bad, "schedule");
        cfg.schedule.pulse_count = detail::json_get<std::int64_t>(
            s, "pulse_count", cfg.schedule.pulse_count, bad, "schedule");
    }

    cfg.epochs = detail::json_get<std::int64_t>(j, "epochs", cfg.epochs, bad, "config");
    cfg.lut_bins =
        detail::json_get<std::size_t>(j, "lut_bins", cfg.lut_bins, bad, "config");
    cfg.lut_cache_path = detail::json_get<std::string>(
        j, "lut_cache_path", cfg.lut_cache_path, bad, "config");
    cfg.seed = detail::json_get<std::uint64_t>(j, "seed", cfg.seed, bad, "config");
    cfg.output_path = detail::json_get<std::string>(
        j, "output_path", cfg.output_path, bad, "config");
    cfg.threads = detail::json_get<int>(j, "threads", cfg.threads, bad, "config");

    if (!bad.empty()) {
        std::string msg = "invalid experiment config: ";
        for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : "") + bad[i];
        throw validation_error(msg, bad);
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_experiment_config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("config parse error: ") + e.what(),
                               {"config"});
    }
    return parse_experiment_config(j);
}

// Dispatches the configured experiment and writes its report. Returns
// the number of emitted records.
inline std::size_t run_experiment_to_file(const ExperimentConfig& cfg,
                                          const std::string& path,
                                          ReportFormat format) {
    if (path.empty())
        throw validation_error("no output path (set output_path or pass --out)",
                               {"output_path"});
    switch (cfg.experiment) {
        case ExperimentKind::SnrSweep: {
            const auto records = run_snr_sweep(cfg);
            emit_report(records, path, format);
            return records.size();
        }
        case ExperimentKind::ToneSepSweep: {
            const auto records = run_tone_sep_sweep(cfg);
            emit_report(records, path, format);
            return records.size();
        }
        case ExperimentKind::BiasCurve: {
            const auto records = run_bias_curve(cfg);
            emit_report(records, path, format);
            return records.size();
        }
        default: {
            const auto result = run_campaign_experiment(cfg);
            emit_report(result.traces, path, format);
            return result.traces.size();
        }
    }
}

} // namespace picosync
