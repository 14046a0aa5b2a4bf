#pragma once

#include <cstdint>
#include <vector>

namespace nbiot {

// Baseband conventions shared by the TX chains and the receiver.
constexpr double kSampleRateHz = 1.92e6;
constexpr int kFftSize15k = 128;        // 15 kHz subcarriers
constexpr int kFftSize3750 = 512;       // 3.75 kHz tones
constexpr int kCpFirstSamples = 10;     // first symbol of each 0.5 ms slot
constexpr int kCpOtherSamples = 9;
constexpr int kCp3750Samples = 16;      // 3.75 kHz symbol CP
constexpr int kGuard3750Samples = 144;  // tail guard of the 2 ms slot
constexpr int kSamplesPerSlot15k = 960;
constexpr int kSamplesPerSubframe = 1920;
constexpr int kSamplesPerFrame = 19200;
constexpr int kSubframesPerFrame = 10;
constexpr int kFrameRange = 1024;  // 10-bit system frame number

struct Numerology {
    double subcarrier_spacing_hz;
    double slot_duration_s;
    int symbols_per_slot;
    int tone_count;  // tones spanning the 180 kHz carrier

    static Numerology khz15() { return {15000.0, 0.5e-3, 7, 12}; }
    static Numerology khz3750() { return {3750.0, 2.0e-3, 7, 48}; }
};

enum class DeploymentMode { StandAlone, InBand, GuardBand };

struct DeploymentConfig {
    DeploymentMode mode = DeploymentMode::StandAlone;
    int lte_bandwidth_mhz = 10;  // meaningful for InBand/GuardBand
    int prb_index = 0;           // InBand only
    bool is_anchor = true;

    void validate() const;
};

struct TimingPosition {
    int frame = 0;        // 0..1023
    int subframe = 0;     // 0..9
    int slot = 0;         // 0..1
    long sample_offset = 0;

    long absolute_subframe() const { return static_cast<long>(frame) * kSubframesPerFrame + subframe; }
};

int prb_count(int lte_bandwidth_mhz);

/// PRB center frequency relative to the LTE DC subcarrier, in Hz.
double prb_center_offset_hz(int lte_bandwidth_mhz, int prb_index);

/// Signed distance from `freq_hz` to the nearest 100 kHz raster point.
double distance_to_raster_hz(double freq_hz);

/// PRB indexes usable as an NB-IoT anchor: center within 7.5 kHz of the
/// 100 kHz raster, excluding the middle 6 PRBs.
std::vector<int> anchor_prb_candidates(int lte_bandwidth_mhz);

double raster_offset_hz(const DeploymentConfig& config);

TimingPosition timing_advance(const TimingPosition& position, int subframes);

}  // namespace nbiot
