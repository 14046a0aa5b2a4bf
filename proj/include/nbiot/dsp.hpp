#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nbiot::dsp {

using cplx = std::complex<double>;

/// Unitary radix-2 FFT (scales by 1/sqrt(N) in both directions).
/// Size must be a power of two.
void fft_unitary(std::span<cplx> x, bool inverse);

std::vector<cplx> fft(std::span<const cplx> x, bool inverse);

/// Windowed-sinc interpolation: y[k] = x(k*ratio + offset), 16 taps,
/// Hann-windowed, zero outside the input span.
std::vector<cplx> resample(std::span<const cplx> x, double ratio, double offset, std::size_t out_len);

/// Fractional delay by `delay` samples (delay >= 0 shifts the signal later).
std::vector<cplx> fractional_delay(std::span<const cplx> x, double delay);

/// Windowed-sinc interpolation at a single fractional position.
cplx interpolate(std::span<const cplx> x, double pos);

double mean_power(std::span<const cplx> x);

/// Peak-to-average power ratio of a sample stream, in dB.
double papr_db(std::span<const cplx> x);

/// Deterministic complex Gaussian source (Box-Muller over mt19937_64),
/// identical output for identical seeds on every platform.
class GaussianSource {
  public:
    explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}

    double next();
    /// Complex sample with the given standard deviation per I/Q component.
    cplx next_cplx(double sigma_per_component);

  private:
    double uniform();

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nbiot::dsp
