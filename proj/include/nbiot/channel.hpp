#pragma once

#include <cstdint>
#include <limits>

#include "nbiot/waveform.hpp"

namespace nbiot {

struct ChannelSpec {
    double snr_db = std::numeric_limits<double>::infinity();
    double cfo_hz = 0.0;
    double delay_samples = 0.0;  // fractional allowed
    double drift_ppm = 0.0;      // receiver sampling clock error
    double coupling_loss_db = 0.0;
    std::uint64_t seed = 0;
};

/// Total carrier error seen by the UE: oscillator ppm plus raster offset.
double compose_cfo_hz(double oscillator_ppm, double carrier_hz, double raster_offset_hz);

/// Timing slip accumulated over `duration_s` when a carrier error of
/// `cfo_hz` is mistaken for (or left in) the sampling clock.
double drift_from_cfo(double cfo_hz, double carrier_hz, double duration_s);

/// out = resample(delay(rotate(in, cfo)), drift) * 10^(-loss/20) + noise.
/// Deterministic for a fixed (wave, spec, seed).
Waveform apply_channel(const Waveform& wave, const ChannelSpec& spec);

}  // namespace nbiot
