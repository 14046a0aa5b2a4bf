#include "nbiot/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nbiot::dsp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void fft_unitary(std::span<cplx> x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) {
        throw std::invalid_argument("fft size must be a power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(x[i], x[j]);
        }
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) {
        v *= scale;
    }
}

std::vector<cplx> fft(std::span<const cplx> x, bool inverse) {
    std::vector<cplx> out(x.begin(), x.end());
    fft_unitary(out, inverse);
    return out;
}

namespace {

constexpr int kSincHalfTaps = 8;  // 16-tap interpolator

double windowed_sinc(double t) {
    if (std::abs(t) >= kSincHalfTaps) {
        return 0.0;
    }
    const double pi = std::numbers::pi;
    double s = (t == 0.0) ? 1.0 : std::sin(pi * t) / (pi * t);
    // Hann window over [-kSincHalfTaps, kSincHalfTaps]
    double w = 0.5 * (1.0 + std::cos(pi * t / kSincHalfTaps));
    return s * w;
}

cplx interp_at(std::span<const cplx> x, double pos) {
    const auto n = static_cast<long>(x.size());
    const long base = static_cast<long>(std::floor(pos));
    cplx acc(0.0, 0.0);
    for (long k = base - kSincHalfTaps + 1; k <= base + kSincHalfTaps; ++k) {
        if (k < 0 || k >= n) {
            continue;
        }
        acc += x[static_cast<std::size_t>(k)] * windowed_sinc(pos - static_cast<double>(k));
    }
    return acc;
}

}  // namespace

std::vector<cplx> resample(std::span<const cplx> x, double ratio, double offset, std::size_t out_len) {
    std::vector<cplx> out(out_len);
    for (std::size_t k = 0; k < out_len; ++k) {
        out[k] = interp_at(x, static_cast<double>(k) * ratio + offset);
    }
    return out;
}

cplx interpolate(std::span<const cplx> x, double pos) { return interp_at(x, pos); }

std::vector<cplx> fractional_delay(std::span<const cplx> x, double delay) {
    return resample(x, 1.0, -delay, x.size());
}

double mean_power(std::span<const cplx> x) {
    if (x.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& v : x) {
        acc += std::norm(v);
    }
    return acc / static_cast<double>(x.size());
}

double papr_db(std::span<const cplx> x) {
    double peak = 0.0;
    for (const auto& v : x) {
        peak = std::max(peak, std::norm(v));
    }
    const double avg = mean_power(x);
    if (avg <= 0.0) {
        return 0.0;
    }
    return 10.0 * std::log10(peak / avg);
}

double GaussianSource::uniform() {
    // 53-bit mantissa uniform in (0, 1]
    const std::uint64_t r = eng_();
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianSource::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
}

cplx GaussianSource::next_cplx(double sigma_per_component) {
    const double re = next() * sigma_per_component;
    const double im = next() * sigma_per_component;
    return {re, im};
}

}  // namespace nbiot::dsp
