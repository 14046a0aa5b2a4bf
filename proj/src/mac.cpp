#include "nbiot/mac.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nbiot {

const CoverageClass& select_coverage_level(double measured_rsrp_dbm,
                                           std::span<const CoverageClass> classes) {
    if (classes.empty()) {
        throw std::invalid_argument("no coverage classes configured");
    }
    for (std::size_t i = 1; i < classes.size(); ++i) {
        if (!(classes[i].rsrp_threshold_dbm < classes[i - 1].rsrp_threshold_dbm)) {
            throw std::invalid_argument("coverage thresholds must be strictly decreasing");
        }
    }
    for (const auto& c : classes) {
        if (measured_rsrp_dbm >= c.rsrp_threshold_dbm) {
            return c;  // equality selects the better level
        }
    }
    return classes.back();
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "none";
        case RejectReason::GapTooShort: return "gap_too_short";
        case RejectReason::SubframeOccupied: return "subframe_occupied";
        case RejectReason::HarqBusy: return "harq_busy";
        case RejectReason::HalfDuplexOverlap: return "half_duplex_overlap";
    }
    return "?";
}

namespace {

bool is_pool_subframe(long subframe) {
    const TimingPosition pos{static_cast<int>((subframe / 10) % kFrameRange),
                             static_cast<int>(subframe % 10), 0, 0};
    return subframe_role(pos) == SubframeRole::Pool;
}

}  // namespace

long ScheduleTimeline::next_pool_subframe(long from) {
    long sf = from;
    while (!is_pool_subframe(sf)) {
        ++sf;
    }
    return sf;
}

long ScheduleTimeline::dl_span_end(long start, int count) {
    long sf = next_pool_subframe(start);
    for (int used = 1; used < count; ++used) {
        sf = next_pool_subframe(sf + 1);
    }
    return sf;
}

RejectReason ScheduleTimeline::conflict(long first, long last, LinkDirection dir) const {
    for (long sf = first; sf <= last; ++sf) {
        const auto it = occupancy_.find(sf);
        if (it == occupancy_.end()) {
            continue;
        }
        const bool existing_dl =
            it->second == TimelineChannel::Npdcch || it->second == TimelineChannel::Npdsch;
        const bool same = existing_dl == (dir == LinkDirection::Downlink);
        return same ? RejectReason::SubframeOccupied : RejectReason::HalfDuplexOverlap;
    }
    return RejectReason::None;
}

ScheduleResult ScheduleTimeline::schedule_dl(const DlGrant& grant) {
    if (grant.npdcch_subframes < 1 || grant.data_subframes < 1 || grant.data_repetitions < 1 ||
        grant.ack_subframes < 1) {
        throw std::invalid_argument("grant lengths must be positive");
    }
    if (grant.data_offset < kMinDlDataOffset) {
        return reject(RejectReason::GapTooShort);
    }
    if (grant.ack_offset < kMinAckOffset) {
        return reject(RejectReason::GapTooShort);
    }
    if (dl_busy_at(grant.npdcch_start)) {
        return reject(RejectReason::HarqBusy);
    }

    // NPDCCH and NPDSCH occupy pool subframes, deferring around sync/broadcast
    const long npdcch_first = next_pool_subframe(grant.npdcch_start);
    const long npdcch_end = dl_span_end(npdcch_first, grant.npdcch_subframes);
    const long data_first = next_pool_subframe(npdcch_end + grant.data_offset);
    const long data_end = dl_span_end(data_first, grant.data_subframes * grant.data_repetitions);
    const long ack_first = data_end + grant.ack_offset;  // uplink: any subframe
    const long ack_end = ack_first + grant.ack_subframes - 1;

    if (const auto r = conflict(npdcch_first, data_end, LinkDirection::Downlink); r != RejectReason::None) {
        return reject(r);
    }
    if (const auto r = conflict(ack_first, ack_end, LinkDirection::Uplink); r != RejectReason::None) {
        return reject(r);
    }

    for (long sf = npdcch_first; sf <= dl_span_end(npdcch_first, grant.npdcch_subframes); ++sf) {
        if (is_pool_subframe(sf)) {
            occupancy_[sf] = TimelineChannel::Npdcch;
        }
    }
    for (long sf = data_first; sf <= data_end; ++sf) {
        if (is_pool_subframe(sf)) {
            occupancy_[sf] = TimelineChannel::Npdsch;
        }
    }
    for (long sf = ack_first; sf <= ack_end; ++sf) {
        occupancy_[sf] = TimelineChannel::NpuschF2;
    }
    dl_busy_until_ = ack_end;
    return {true, RejectReason::None};
}

ScheduleResult ScheduleTimeline::schedule_ul(const UlGrant& grant) {
    if (grant.npdcch_subframes < 1 || grant.data_subframes < 1 || grant.data_repetitions < 1) {
        throw std::invalid_argument("grant lengths must be positive");
    }
    if (grant.data_offset < kMinUlDataOffset) {
        return reject(RejectReason::GapTooShort);
    }
    if (ul_busy_at(grant.npdcch_start)) {
        return reject(RejectReason::HarqBusy);
    }
    const long npdcch_first = next_pool_subframe(grant.npdcch_start);
    const long npdcch_end = dl_span_end(npdcch_first, grant.npdcch_subframes);
    const long data_first = npdcch_end + grant.data_offset;
    const long data_end = data_first + static_cast<long>(grant.data_subframes) * grant.data_repetitions - 1;

    // the grant's own DCI is downlink reception, the data is transmission
    if (const auto r = conflict(npdcch_first, npdcch_end, LinkDirection::Downlink); r != RejectReason::None) {
        return reject(r);
    }
    if (const auto r = conflict(data_first, data_end, LinkDirection::Uplink); r != RejectReason::None) {
        return reject(r);
    }
    for (long sf = npdcch_first; sf <= npdcch_end; ++sf) {
        if (is_pool_subframe(sf)) {
            occupancy_[sf] = TimelineChannel::Npdcch;
        }
    }
    for (long sf = data_first; sf <= data_end; ++sf) {
        occupancy_[sf] = TimelineChannel::NpuschF1;
    }
    ul_busy_until_ = data_end + grant.feedback_gap;
    return {true, RejectReason::None};
}

ScheduleResult ScheduleTimeline::schedule_dl(long npdcch_start, int npdcch_subframes, const Dci& dci,
                                             const NpdschConfig& cfg, const CellConfig& cell) {
    cfg.validate();
    DlGrant grant;
    grant.npdcch_start = npdcch_start;
    grant.npdcch_subframes = npdcch_subframes;
    grant.data_offset = dci.time_offset_subframes();
    grant.data_subframes = npdsch_subframes_for(cfg.tbs, cell);
    grant.data_repetitions = cfg.repetitions;
    grant.ack_offset = kMinAckOffset + 2 * dci.harq_ack_resource;
    return schedule_dl(grant);
}

ScheduleResult ScheduleTimeline::schedule_ul(long npdcch_start, int npdcch_subframes, const Dci& dci,
                                             int tbs, const NpuschAllocation& alloc) {
    UlGrant grant;
    grant.npdcch_start = npdcch_start;
    grant.npdcch_subframes = npdcch_subframes;
    grant.data_offset = dci.time_offset_subframes();
    const int slots = npusch_slots_for(tbs, alloc);
    const double slot_ms = alloc.numerology.slot_duration_s * 1e3;
    grant.data_subframes = static_cast<int>(std::ceil(slots * slot_ms));
    grant.data_repetitions = alloc.repetitions;
    return schedule_ul(grant);
}

double peak_rate_bps(LinkDirection direction) {
    if (direction == LinkDirection::Downlink) {
        return kMaxTbsNpdsch / 3e-3;  // largest TBS over 3 ms
    }
    return kMaxTbsNpusch / 4e-3;  // largest TBS over 4 ms
}

double sustained_rate_bps(LinkDirection direction, int tbs, int tx_subframes, int repetitions,
                          const RateGaps& gaps) {
    if (tbs < 1 || tx_subframes < 1 || repetitions < 1) {
        throw std::invalid_argument("rate inputs must be positive");
    }
    const int min_offset = direction == LinkDirection::Downlink ? kMinDlDataOffset : kMinUlDataOffset;
    if (gaps.dci_to_data < min_offset) {
        throw std::invalid_argument("DCI-to-data gap below the minimum");
    }
    long cycle = gaps.dci_subframes + gaps.dci_to_data + static_cast<long>(tx_subframes) * repetitions;
    if (direction == LinkDirection::Downlink) {
        if (gaps.data_to_ack < kMinAckOffset) {
            throw std::invalid_argument("data-to-ACK gap below the minimum");
        }
        cycle += gaps.data_to_ack + gaps.ack_subframes;
    }
    cycle += gaps.turnaround;
    return static_cast<double>(tbs) / (static_cast<double>(cycle) * 1e-3);
}

double link_budget_mcl_db(double tx_power_dbm, double noise_figure_db, double bandwidth_hz,
                          double required_snr_db) {
    if (bandwidth_hz <= 0) {
        throw std::invalid_argument("bandwidth must be positive");
    }
    const double noise_floor_dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return tx_power_dbm - (noise_floor_dbm + required_snr_db);
}

// Monte Carlo baseline of this simulator's uplink receiver: SNR at 10% BLER
// for 15 kHz single-tone pi/2-BPSK, TBS 16 over a 16-slot allocation,
// 128 repetitions.
const DeepCoverageEntry kDeepCoverageUplink = {16, 128, 16, -19.5, 23.0, 5.0, 15000.0};

const char* ra_step_name(RaStep s) {
    switch (s) {
        case RaStep::Idle: return "idle";
        case RaStep::Msg1Sent: return "msg1_sent";
        case RaStep::RarReceived: return "rar_received";
        case RaStep::Msg3Sent: return "msg3_sent";
        case RaStep::Resolved: return "resolved";
        case RaStep::Failed: return "failed";
    }
    return "?";
}

RaSimResult run_random_access(const RaSimConfig& config, std::span<const RaUeConfig> ues) {
    if (config.classes.empty()) {
        throw std::invalid_argument("random access needs at least one coverage class");
    }
    for (const auto& c : config.classes) {
        c.nprach.validate();
        if (c.nprach.multitone_partition_boundary <= 0 ||
            c.nprach.multitone_partition_boundary >= c.nprach.num_subcarriers) {
            throw std::invalid_argument("partition boundary must leave both capability sets non-empty");
        }
    }

    RaSimResult result;
    std::mt19937_64 eng(config.seed);

    struct UeState {
        RaUeOutcome outcome;
        const CoverageClass* cls = nullptr;
        bool multitone = false;
        bool active = true;
    };
    std::vector<UeState> states;
    for (const auto& ue : ues) {
        UeState st;
        st.outcome.id = ue.id;
        st.cls = &select_coverage_level(ue.rsrp_dbm, config.classes);
        st.outcome.coverage_level = st.cls->level;
        st.multitone = ue.multitone_capable;
        states.push_back(st);
    }

    auto log = [&](double t, int ue, const char* ev, std::string detail) {
        result.events.push_back({t, ue, ev, std::move(detail)});
    };

    bool any_active = true;
    for (int window = 0; any_active && window < 4 * config.max_attempts; ++window) {
        any_active = false;
        // msg1: every active UE picks a subcarrier on its capability side
        std::map<std::pair<int, int>, std::vector<int>> picks;  // (level, subcarrier) -> UEs
        for (std::size_t i = 0; i < states.size(); ++i) {
            auto& st = states[i];
            if (!st.active) {
                continue;
            }
            any_active = true;
            const auto& np = st.cls->nprach;
            const double t_ms = np.start_time_ms + window * np.periodicity_ms;
            const int boundary = np.multitone_partition_boundary;
            const int lo = st.multitone ? boundary : 0;
            const int hi = st.multitone ? np.num_subcarriers : boundary;
            const int pick = np.subcarrier_offset + lo + static_cast<int>(eng() % static_cast<unsigned>(hi - lo));
            st.outcome.chosen_subcarrier = pick;
            st.outcome.step = RaStep::Msg1Sent;
            st.outcome.attempts++;
            // the network reads capability from the partition side
            st.outcome.network_inferred_multitone = (pick - np.subcarrier_offset) >= boundary;
            picks[{st.cls->level, pick}].push_back(static_cast<int>(i));
            log(t_ms, st.outcome.id, "msg1",
                "subcarrier=" + std::to_string(pick) + " level=" + std::to_string(st.cls->level) +
                    " reps=" + std::to_string(np.repetitions));
        }
        if (!any_active) {
            break;
        }
        // msg2..msg4 per detected preamble
        for (auto& [key, contenders] : picks) {
            const double t_ms = states[contenders.front()].cls->nprach.start_time_ms +
                                window * states[contenders.front()].cls->nprach.periodicity_ms +
                                config.rar_window_ms;
            // one RAR per detected preamble; every contender applies it
            for (const int i : contenders) {
                auto& st = states[i];
                st.outcome.step = RaStep::RarReceived;
                st.outcome.granted_multitone_msg3 = st.outcome.network_inferred_multitone;
                log(t_ms, st.outcome.id, "rar",
                    std::string("msg3_grant=") + (st.outcome.granted_multitone_msg3 ? "multi" : "single"));
                st.outcome.step = RaStep::Msg3Sent;
                log(t_ms + 8.0, st.outcome.id, "msg3", "");
            }
            // contention resolution: at most one winner per preamble
            const int winner = contenders[eng() % contenders.size()];
            for (const int i : contenders) {
                auto& st = states[i];
                if (i == winner) {
                    st.outcome.step = RaStep::Resolved;
                    st.active = false;
                    log(t_ms + 12.0, st.outcome.id, "msg4", "resolved");
                } else {
                    log(t_ms + 12.0, st.outcome.id, "msg4", "contention_lost");
                    if (st.outcome.attempts >= config.max_attempts) {
                        st.outcome.step = RaStep::Failed;
                        st.active = false;
                        log(t_ms + 12.0, st.outcome.id, "failed", "max_attempts");
                    } else {
                        st.outcome.step = RaStep::Idle;  // retry in the next window
                    }
                }
            }
        }
    }
    for (auto& st : states) {
        if (st.active && st.outcome.step != RaStep::Resolved) {
            st.outcome.step = RaStep::Failed;
        }
        result.ues.push_back(st.outcome);
    }
    return result;
}

}  // namespace nbiot
