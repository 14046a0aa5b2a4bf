#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nbiot/coding.hpp"
#include "nbiot/grid.hpp"
#include "nbiot/waveform.hpp"

namespace nbiot {

constexpr int kNprachSymbolsPerGroup = 5;
constexpr int kNprachGroupsPerPreamble = 4;
constexpr int kNprachSymbolSamples = 512;   // 266.67 us at 1.92 Msps
constexpr int kNprachCpSamplesFormat0 = 128;  // 66.67 us
constexpr int kNprachCpSamplesFormat1 = 512;  // 266.7 us
constexpr int kNprachTones = 48;

struct NpuschAllocation {
    Numerology numerology = Numerology::khz15();
    int tone_count = 12;  // 1|3|6|12 at 15 kHz, 1 at 3.75 kHz
    int tone_offset = 0;
    NpuschFormat format = NpuschFormat::F1;
    int repetitions = 1;  // power of two, <= 128
    Modulation single_tone_modulation = Modulation::Pi4Qpsk;  // Format 1 single-tone
    int slots_override = 0;  // 0 = shortest allocation; larger lowers the code rate

    bool single_tone() const { return tone_count == 1; }
    void validate() const;
};

/// Data-symbol capacity (bits) of one uplink slot for this allocation.
int npusch_bits_per_slot(const NpuschAllocation& alloc);

/// Data symbol indexes within a 7-symbol slot (the rest is DMRS).
const std::vector<int>& npusch_data_symbols(NpuschFormat format);

Modulation npusch_modulation(const NpuschAllocation& alloc);

/// Slot count for one transmission of the TBS (before repetitions).
int npusch_slots_for(int tbs, const NpuschAllocation& alloc);

int npusch_f2_slots();

Waveform build_npusch_f1(const TransportBlock& tb, const NpuschAllocation& alloc, const CellConfig& cell);
Waveform build_npusch_f2(int ack, const NpuschAllocation& alloc, const CellConfig& cell);

struct NprachConfig {
    int format = 0;  // 0: cell radius <= 10 km, 1: <= 40 km
    int repetitions = 1;  // power of two, <= 128
    double periodicity_ms = 40.0;
    double start_time_ms = 0.0;
    int subcarrier_offset = 0;   // 3.75 kHz tones within the 180 kHz carrier
    int num_subcarriers = 12;    // 12|24|36|48
    int multitone_partition_boundary = 0;  // starts below it signal single-tone-only UEs

    int cp_samples() const { return format == 0 ? kNprachCpSamplesFormat0 : kNprachCpSamplesFormat1; }
    double cp_length_s() const { return cp_samples() / kSampleRateHz; }
    void validate() const;
};

double nprach_group_duration_s(const NprachConfig& config);
double nprach_preamble_duration_s(const NprachConfig& config);  // one basic preamble

/// Phase advance per sample of a 3.75 kHz NPRACH tone at 1.92 Msps.
double nprach_tone_phase_step(int tone);

struct NprachPreamble {
    int start_subcarrier = 0;
    int repetitions = 1;
    std::vector<int> tone_indexes;  // 4 per repetition unit, absolute tone index
};

/// Deterministic hop pattern: +-1 within a tone pair, +-6 within the
/// 12-tone sub-band, and a cell-seeded even offset per repetition unit.
std::vector<int> nprach_hop_pattern(const NprachConfig& config, int start_subcarrier, std::uint32_t cell_seed);

std::pair<NprachPreamble, Waveform> build_nprach(const NprachConfig& config, int start_subcarrier,
                                                 std::uint32_t cell_seed);

}  // namespace nbiot
