#include "nbiot/channel.hpp"

#include <cmath>
#include <numbers>

#include "nbiot/dsp.hpp"

namespace nbiot {

double compose_cfo_hz(double oscillator_ppm, double carrier_hz, double raster_offset_hz) {
    return oscillator_ppm * 1e-6 * carrier_hz + raster_offset_hz;
}

double drift_from_cfo(double cfo_hz, double carrier_hz, double duration_s) {
    return cfo_hz / carrier_hz * duration_s;
}

Waveform apply_channel(const Waveform& wave, const ChannelSpec& spec) {
    Waveform out;
    out.sample_rate_hz = wave.sample_rate_hz;
    out.carrier_offset_hz = wave.carrier_offset_hz;

    std::vector<cplx> work(wave.samples);
    if (spec.cfo_hz != 0.0) {
        const double step = 2.0 * std::numbers::pi * spec.cfo_hz / wave.sample_rate_hz;
        for (std::size_t n = 0; n < work.size(); ++n) {
            work[n] *= cplx(std::cos(step * n), std::sin(step * n));
        }
    }
    if (spec.delay_samples != 0.0 || spec.drift_ppm != 0.0) {
        const double ratio = 1.0 + spec.drift_ppm * 1e-6;
        work = dsp::resample(work, ratio, -spec.delay_samples, work.size());
    }
    const double gain = std::pow(10.0, -spec.coupling_loss_db / 20.0);
    if (gain != 1.0) {
        for (auto& v : work) {
            v *= gain;
        }
    }
    if (std::isfinite(spec.snr_db)) {
        // zero input (noise-only trials): noise is scaled against unit power
        double signal_power = dsp::mean_power(work);
        if (signal_power <= 0.0) {
            signal_power = 1.0;
        }
        const double noise_power = signal_power / std::pow(10.0, spec.snr_db / 10.0);
        const double sigma = std::sqrt(noise_power / 2.0);
        dsp::GaussianSource noise(spec.seed ^ 0x9E3779B97F4A7C15ull);
        for (auto& v : work) {
            v += noise.next_cplx(sigma);
        }
    }
    out.samples = std::move(work);
    return out;
}

}  // namespace nbiot
