#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nbiot/coding.hpp"
#include "nbiot/grid.hpp"
#include "nbiot/waveform.hpp"

namespace nbiot {

constexpr int kMibBits = 34;
constexpr int kNpbchSubblocks = 8;
constexpr int kNpbchRepetitions = 8;
constexpr int kNpbchTtiFrames = 64;  // 640 ms

struct Mib {
    int sfn_msbs = 0;  // 4 bits: SFN bits above those carried by NSSS/NPBCH
    DeploymentMode mode = DeploymentMode::StandAlone;
    std::uint32_t scheduling_stub = 0;  // 28 spare bits

    Bits payload_bits() const;
    static Mib from_bits(std::span<const std::uint8_t> bits);
    friend bool operator==(const Mib&, const Mib&) = default;
};

enum class DciDirection { Downlink, Uplink };

/// 23-bit scheduling message. Time offsets are subframe counts drawn from
/// the ladder {4,8,16,32,64} downlink and {8,16,32,64} uplink.
struct Dci {
    DciDirection direction = DciDirection::Downlink;
    int tbs_index = 0;         // 4 bits
    int repetition_exp = 0;    // 4 bits: repetitions = 1 << exp
    int time_offset_index = 0; // 3 bits
    int subcarrier_alloc = 0;  // 8 bits, uplink grants
    int harq_ack_resource = 0; // 2 bits, downlink grants
    int new_data = 1;          // 1 bit

    Bits encode() const;
    static Dci decode(std::span<const std::uint8_t> bits);
    int time_offset_subframes() const;
    int repetitions() const { return 1 << repetition_exp; }
    friend bool operator==(const Dci&, const Dci&) = default;
};

extern const std::vector<int> kDlTimeOffsets;
extern const std::vector<int> kUlTimeOffsets;
extern const std::vector<int> kDlTbsLadder;
extern const std::vector<int> kUlTbsLadder;

struct NpdschConfig {
    int tbs = 0;
    int repetitions = 1;  // power of two, <= 512
    TimingPosition start;

    void validate() const;
};

/// 64 NPBCH subframe grids (subframe #0 of each frame in the 640 ms TTI):
/// 8 self-decodable sub-blocks, each repeated in 8 consecutive frames.
std::vector<ResourceGrid> build_npbch_tti(const Mib& mib, const CellConfig& cell);

/// NPBCH scrambled rate-matched bits for one sub-block (receiver side view).
std::uint32_t npbch_scrambler_init(const CellConfig& cell, int subblock);

/// AL-1 occupies half the subframe (two DCI slots), AL-2 the whole subframe.
std::vector<ResourceGrid> build_npdcch(const Dci& dci, int aggregation_level, int repetitions,
                                       const CellConfig& cell, int dci_slot = 0);

std::vector<ResourceGrid> build_npdsch(const TransportBlock& tb, const NpdschConfig& cfg,
                                       const CellConfig& cell);

/// Subframes needed to carry a downlink TBS at the working code rate.
int npdsch_subframes_for(int tbs, const CellConfig& cell);

std::uint32_t data_scrambler_init(const CellConfig& cell, ChannelKind kind, int subframe_in_pattern);

/// OFDM-modulate contiguous subframes (15 kHz numerology, LTE normal CP).
Waveform serialize(std::span<const ResourceGrid> grids);

/// Recover subframe grids from a serialized waveform (values only).
std::vector<ResourceGrid> deserialize(const Waveform& wave, int num_subframes, long sample_offset = 0);

/// Frequency-domain values of one OFDM symbol, CP removed at the given
/// sample position.
std::vector<cplx> extract_symbol(std::span<const cplx> samples, long symbol_start, int cp_len);

/// Sample offset of OFDM symbol `l` within a subframe (start of its CP).
long symbol_sample_offset(int symbol_index);
int symbol_cp_length(int symbol_index);

/// A full downlink frame sequence: NPBCH/NPSS/NSSS in their fixed slots,
/// optional data grids placed into pool subframes in order.
std::vector<ResourceGrid> compose_frames(const CellConfig& cell, const Mib& mib, int start_frame,
                                         int frame_count, std::span<const ResourceGrid> pool_payload = {});

}  // namespace nbiot
