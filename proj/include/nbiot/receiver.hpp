#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nbiot/channel.hpp"
#include "nbiot/grid.hpp"
#include "nbiot/phy_dl.hpp"
#include "nbiot/phy_ul.hpp"
#include "nbiot/waveform.hpp"

namespace nbiot {

struct SyncConfig {
    double carrier_hz = 900e6;
    // coarse CFO grid; defaults to half-subcarrier (7.5 kHz) steps covering
    // 20 ppm oscillator error plus the worst raster offset
    std::vector<double> cfo_hypotheses_hz = {-22500, -15000, -7500, 0, 7500, 15000, 22500};
    double accumulation_weight = 0.9;  // lambda, 1.0 = plain coherent
    double detection_threshold = 7.0;  // peak-to-mean, calibrated for 1% false alarm over 64 segments
    int refine_segments = 4;           // full-rate segments kept for timing refinement
};

struct SyncResult {
    bool detected = false;
    long sample_timing = 0;       // NPSS subframe start within the 10 ms period
    double cfo_hz_estimate = 0.0;
    int nb_pcid = -1;
    int frame_position_80ms = -1;  // frame index mod 8 of the NPSS frame
    double metric_peak = 0.0;
    int accumulation_count = 0;
};

/// Streaming NPSS searcher: feed 10 ms worth of samples at a time; the
/// correlation buffer accumulates across segments with exponential weight.
class NpssSearcher {
  public:
    explicit NpssSearcher(SyncConfig config = {});

    /// Append samples; returns a result once at least one full segment has
    /// been evaluated (detected=false when below threshold).
    SyncResult feed(std::span<const cplx> samples);

    /// Convenience: feed an entire waveform, stop at first detection.
    SyncResult search(const Waveform& wave);

    int segments_accumulated() const { return segments_; }
    const SyncConfig& config() const { return config_; }
    const std::vector<std::vector<cplx>>& accumulators() const { return accum_; }

  private:
    SyncResult evaluate();
    void process_segment(std::span<const cplx> segment);

    SyncConfig config_;
    std::vector<std::vector<cplx>> accum_;   // per hypothesis, decimated taus
    std::vector<cplx> pending_;
    std::vector<std::vector<cplx>> recent_;  // full-rate recent segments
    int segments_ = 0;
};

/// Staged CFO estimate at a known NPSS timing: coarse grid, then symbol-,
/// 5-symbol- and segment-baseline refinements.
double estimate_cfo(const Waveform& wave, long npss_timing, const SyncConfig& config = {});

/// Full cell search: NPSS timing, CFO estimate, then NSSS for the NB-PCID
/// and the 80 ms frame position. Returns a fully populated SyncResult.
SyncResult cell_search(const Waveform& wave, const SyncConfig& config = {}, int nsss_combine = 4);

struct NsssDetection {
    bool detected = false;
    int nb_pcid = -1;
    int frame_position_80ms = -1;
    double metric = 0.0;
};

/// Joint search over PCID, cyclic shift, and frame parity; combines up to
/// `combine` NSSS occasions non-coherently.
NsssDetection nsss_detect(const Waveform& wave, long npss_timing, double cfo_hz, int combine = 4,
                          double threshold = 0.0);

struct RasterHypothesis {
    double offset_hz = 0.0;
    bool crs_reserved = false;  // in-band style NPBCH demapping
};

struct NpbchResult {
    bool acquired = false;
    Mib mib;
    RasterHypothesis hypothesis;
    int subblock = -1;       // gives the frame number mod 64
    double metric = 0.0;
    int windows_used = 0;
    double next_attempt_offset_ms = 0.0;  // 640 after a failed TTI
};

/// Hypothesis testing over raster offsets: compensate CFO and the implied
/// sampling drift, accumulate the 8 repetitions of each sub-block, decode.
NpbchResult npbch_acquire(const Waveform& wave, const SyncResult& sync,
                          const std::vector<RasterHypothesis>& hypotheses, const SyncConfig& config = {});

std::vector<RasterHypothesis> default_raster_hypotheses();

struct NprachDetection {
    int start_subcarrier = 0;
    double timing_advance_s = 0.0;
    double metric = 0.0;
};

/// Correlate every candidate start against the hop pattern; timing advance
/// from inter-group phase differences across the +-1 and +-6 tone hops.
std::vector<NprachDetection> nprach_detect(const Waveform& wave, const NprachConfig& config,
                                           std::uint32_t cell_seed, double threshold = 0.1);

struct DlScheduleInfo {
    std::vector<long> data_subframes;  // absolute subframe index within the waveform
    int tbs = 0;
    int repetitions = 1;
    int subframes_per_rep = 0;
};

DecodeResult decode_npdsch(const Waveform& wave, const DlScheduleInfo& info, const CellConfig& cell);

struct UlScheduleInfo {
    int tbs = 0;
    NpuschAllocation alloc;
    long first_sample = 0;
};

DecodeResult decode_npusch_f1(const Waveform& wave, const UlScheduleInfo& info, const CellConfig& cell);

/// HARQ-ACK decode; returns the bit and a quality metric.
std::pair<int, double> decode_npusch_f2(const Waveform& wave, const NpuschAllocation& alloc,
                                        const CellConfig& cell, long first_sample = 0);

}  // namespace nbiot
