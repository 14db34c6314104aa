// Per-node clock model: local time = (1 + ffe)*t_true + offset + jitter,
// with the drift origin at simulation start (t = 0). Node 0 is the
// reference (zero offset, zero fractional frequency error) and defines
// global time. States are immutable values; corrections return new ones.
#pragma once

#include <cmath>
#include <cstdint>

#include "picosync/detail/rng.hpp"
#include "picosync/errors.hpp"

namespace picosync {

struct ClockState {
    double offset_s = 0.0;          // quasi-static time offset
    double frac_freq_error = 0.0;   // dimensionless (1e-9 = 1 ppb)
    double jitter_std_s = 0.0;      // white Gaussian std per timestamp read
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(jitter_std_s >= 0.0) || !std::isfinite(jitter_std_s))
            throw parameter_error("ClockState: jitter_std_s must be >= 0");
        if (!std::isfinite(offset_s) || !std::isfinite(frac_freq_error))
            throw parameter_error("ClockState: offset/frac_freq_error must be finite");
    }

    bool is_reference() const {
        return offset_s == 0.0 && frac_freq_error == 0.0;
    }
};

// One resynchronization event of a campaign, with simulation-only ground
// truth of the offset that remains after the correction was applied.
struct CorrectionRecord {
    std::int64_t epoch_index = 0;
    double applied_offset_s = 0.0;
    double residual_true_offset_s = 0.0;
};

// Jitter draw i for this clock; deterministic in (rng_seed, index) and
// order-independent, so concurrent trials can share a state value.
inline double clock_jitter(const ClockState& state, std::uint64_t draw_index) {
    if (state.jitter_std_s == 0.0) return 0.0;
    return state.jitter_std_s * detail::gauss_at(state.rng_seed, draw_index);
}

// Local clock reading at true time t_true (one jitter draw per read).
inline double local_from_true(const ClockState& state, double t_true,
                              std::uint64_t draw_index = 0) {
    return (1.0 + state.frac_freq_error) * t_true + state.offset_s +
           clock_jitter(state, draw_index);
}

// Inverse of the jitter-free clock map: the true time at which the local
// clock displays t_local.
inline double true_from_local(const ClockState& state, double t_local) {
    if (!(std::fabs(state.frac_freq_error) < 1e-3))
        throw parameter_error("true_from_local: |frac_freq_error| must be < 1e-3");
    return (t_local - state.offset_s) / (1.0 + state.frac_freq_error);
}

// Removes delta_s from the stored offset, i.e. the caller passes the
// amount of local-clock error to take out. A perfect estimate of the
// node's own offset drives the residual to zero.
inline ClockState apply_correction(const ClockState& state, double delta_s) {
    if (!std::isfinite(delta_s))
        throw parameter_error("apply_correction: delta_s must be finite");
    ClockState next = state;
    next.offset_s -= delta_s;
    return next;
}

// Jitter-free clock error epsilon(t) = local - true at true time t.
inline double true_offset_at(const ClockState& state, double t_true) {
    return state.offset_s + state.frac_freq_error * t_true;
}

// Offset of clock b as seen from clock a: epsilon_a(t) - epsilon_b(t).
// With a = reference this is the quantity the two-way exchange estimates
// for node b, i.e. the correction to add to b's clock.
inline double relative_offset_at(const ClockState& a, const ClockState& b,
                                 double t_true) {
    return true_offset_at(a, t_true) - true_offset_at(b, t_true);
}

} // namespace picosync
