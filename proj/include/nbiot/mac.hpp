#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nbiot/phy_dl.hpp"
#include "nbiot/phy_ul.hpp"

namespace nbiot {

// ---- coverage classes ----

struct CoverageClass {
    int level = 0;  // 0 = best coverage, up to 2
    double rsrp_threshold_dbm = -110.0;
    NprachConfig nprach;
    double preamble_tx_power_dbm = 23.0;
};

/// Classes must have strictly decreasing thresholds; a measurement equal to
/// a threshold selects the better (lower) level. The worst class catches all.
const CoverageClass& select_coverage_level(double measured_rsrp_dbm,
                                           std::span<const CoverageClass> classes);

// ---- scheduling timeline ----

enum class TimelineChannel { Npdcch, Npdsch, NpuschF1, NpuschF2 };
enum class LinkDirection { Downlink, Uplink };

enum class RejectReason {
    None,
    GapTooShort,       // one of the >=4 / >=8 / >=12 subframe offsets violated
    SubframeOccupied,
    HarqBusy,          // a HARQ process is already pending in that direction
    HalfDuplexOverlap  // DL and UL occupancy would overlap
};

const char* reject_reason_name(RejectReason r);

struct ScheduleResult {
    bool accepted = false;
    RejectReason reason = RejectReason::None;
};

struct DlGrant {
    long npdcch_start = 0;  // absolute subframe index
    int npdcch_subframes = 1;
    int data_offset = 4;  // end of NPDCCH to start of NPDSCH, >= 4
    int data_subframes = 1;  // per repetition
    int data_repetitions = 1;
    int ack_offset = 12;  // end of NPDSCH to start of the HARQ-ACK, >= 12
    int ack_subframes = 2;  // NPUSCH Format 2, 4 slots
};

struct UlGrant {
    long npdcch_start = 0;
    int npdcch_subframes = 1;
    int data_offset = 8;  // end of NPDCCH to start of NPUSCH, >= 8
    int data_subframes = 1;
    int data_repetitions = 1;
    int feedback_gap = 3;  // NPDCCH monitoring after NPUSCH
};

constexpr int kMinDlDataOffset = 4;
constexpr int kMinUlDataOffset = 8;
constexpr int kMinAckOffset = 12;

/// Subframe-occupancy ledger for one UE enforcing the HARQ timing rules:
/// single process per direction, minimum gaps, half-duplex operation, and
/// downlink placement only in NPDCCH/NPDSCH pool subframes.
class ScheduleTimeline {
  public:
    ScheduleResult schedule_dl(const DlGrant& grant);
    ScheduleResult schedule_ul(const UlGrant& grant);

    /// Convenience wrappers deriving the offsets from a DCI.
    ScheduleResult schedule_dl(long npdcch_start, int npdcch_subframes, const Dci& dci,
                               const NpdschConfig& cfg, const CellConfig& cell);
    ScheduleResult schedule_ul(long npdcch_start, int npdcch_subframes, const Dci& dci, int tbs,
                               const NpuschAllocation& alloc);

    bool dl_busy_at(long subframe) const { return subframe <= dl_busy_until_; }
    bool ul_busy_at(long subframe) const { return subframe <= ul_busy_until_; }
    const std::map<long, TimelineChannel>& occupancy() const { return occupancy_; }

    /// Next pool subframe at or after `from` (skips NPBCH/NPSS/NSSS).
    static long next_pool_subframe(long from);
    /// The subframe in which a downlink transmission of `count` pool
    /// subframes starting at `start` ends.
    static long dl_span_end(long start, int count);

  private:
    ScheduleResult reject(RejectReason r) const { return {false, r}; }
    RejectReason conflict(long first, long last, LinkDirection dir) const;

    std::map<long, TimelineChannel> occupancy_;
    long dl_busy_until_ = -1;
    long ul_busy_until_ = -1;
};

// ---- deterministic calculators ----

double peak_rate_bps(LinkDirection direction);

struct RateGaps {
    int dci_subframes = 1;
    int dci_to_data = kMinDlDataOffset;  // or kMinUlDataOffset for uplink
    int data_to_ack = kMinAckOffset;     // downlink only
    int ack_subframes = 2;
    int turnaround = 3;  // to the next NPDCCH
};

double sustained_rate_bps(LinkDirection direction, int tbs, int tx_subframes, int repetitions,
                          const RateGaps& gaps);

/// MCL = tx_power - (-174 + 10 log10(bw) + NF + required SNR).
double link_budget_mcl_db(double tx_power_dbm, double noise_figure_db, double bandwidth_hz,
                          double required_snr_db);

/// Working point for the deep-coverage single-tone configuration
/// (15 kHz single tone, 128 repetitions, smallest TBS). The required SNR is
/// a Monte Carlo result of this simulator, recorded as a baseline.
struct DeepCoverageEntry {
    int tbs;
    int repetitions;
    int slots_per_repetition;  // lowest-rate mapping of the TBS
    double required_snr_db;    // 10% BLER operating point, 15 kHz reference
    double tx_power_dbm;
    double noise_figure_db;
    double bandwidth_hz;
};
extern const DeepCoverageEntry kDeepCoverageUplink;

// ---- random access ----

enum class RaStep { Idle, Msg1Sent, RarReceived, Msg3Sent, Resolved, Failed };

const char* ra_step_name(RaStep s);

struct RaUeConfig {
    int id = 0;
    double rsrp_dbm = -100.0;
    bool multitone_capable = true;
};

struct RaUeOutcome {
    int id = 0;
    RaStep step = RaStep::Idle;
    int attempts = 0;
    int coverage_level = 0;
    int chosen_subcarrier = -1;
    bool network_inferred_multitone = false;
    bool granted_multitone_msg3 = false;
    double timing_advance_s = 0.0;
};

struct RaEvent {
    double time_ms = 0.0;
    int ue_id = -1;
    std::string event;
    std::string detail;
};

struct RaSimConfig {
    std::vector<CoverageClass> classes;
    int max_attempts = 10;
    double rar_window_ms = 10.0;
    std::uint64_t seed = 1;
};

struct RaSimResult {
    std::vector<RaUeOutcome> ues;
    std::vector<RaEvent> events;
};

/// Contention-based 4-step random access over shared NPRACH windows.
/// Collisions happen when two UEs pick the same subcarrier in the same
/// window; msg4 resolves at most one of them.
RaSimResult run_random_access(const RaSimConfig& config, std::span<const RaUeConfig> ues);

}  // namespace nbiot
