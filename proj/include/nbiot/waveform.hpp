#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace nbiot {

using cplx = std::complex<double>;

struct Waveform {
    std::vector<cplx> samples;
    double sample_rate_hz = 1.92e6;
    double carrier_offset_hz = 0.0;
};

/// Binary IQ file: "NBIQ" magic, u32 version, f64 sample_rate, f64
/// carrier_offset, u64 count, then interleaved float32 little-endian I/Q.
void write_iq(const std::string& path, const Waveform& wave);
Waveform read_iq(const std::string& path);

}  // namespace nbiot
