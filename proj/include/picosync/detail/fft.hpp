// Minimal FFT machinery: iterative radix-2 transform with a cached
// twiddle table for power-of-two sizes, plus a Bluestein chirp-z path so
// exact-length DFTs of arbitrary N are available where zero padding would
// introduce leakage (spectral moment integrals). Self-contained on
// purpose; callers that can pad to a power of two should.
#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "picosync/errors.hpp"

namespace picosync::detail {

using cdouble = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Forward twiddles exp(-2*pi*i*k/n), k in [0, n/2); shared across calls.
inline std::shared_ptr<const std::vector<cdouble>> twiddles(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const std::vector<cdouble>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<cdouble>>(n / 2);
    const double step = -6.283185307179586476925286766559 / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = step * static_cast<double>(k);
        (*table)[k] = {std::cos(a), std::sin(a)};
    }
    cache.emplace(n, table);
    return table;
}

// In-place radix-2 FFT. Inverse applies 1/n scaling.
inline void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) throw parameter_error("fft: empty input");
    if (!is_pow2(n)) throw parameter_error("fft: length must be a power of two");
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const auto tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble w = (*tw)[k * stride];
                if (inverse) w = std::conj(w);
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= s;
    }
}

// Exact-length forward DFT for arbitrary N (Bluestein when N is not a
// power of two). X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).
inline std::vector<cdouble> dft_exact(const std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw parameter_error("dft: empty input");
    if (is_pow2(n)) {
        std::vector<cdouble> a = x;
        fft_pow2(a, false);
        return a;
    }
    // Bluestein: x[n]*c[n] convolved with conj chirp, c[n] = exp(-i*pi*n^2/N).
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cdouble> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // n^2 mod 2N keeps the phase argument small and exact.
        const unsigned long long k2 =
            (static_cast<unsigned long long>(k) * k) % (2ULL * n);
        const double a = -3.1415926535897932384626433832795 *
                         static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = {std::cos(a), std::sin(a)};
    }
    std::vector<cdouble> fa(m, cdouble{0.0, 0.0});
    std::vector<cdouble> fb(m, cdouble{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) fa[k] = x[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        fb[k] = std::conj(chirp[k]);
        fb[m - k] = std::conj(chirp[k]);
    }
    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa, true);
    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = fa[k] * chirp[k];
    return out;
}

// Signed bin frequency in Hz for an L-point transform at sample rate fs.
inline double bin_frequency_hz(std::size_t k, std::size_t len, double fs) {
    const auto half = len / 2;
    const double idx = (k < half) ? static_cast<double>(k)
                                  : static_cast<double>(k) - static_cast<double>(len);
    return idx * fs / static_cast<double>(len);
}

} // namespace picosync::detail
