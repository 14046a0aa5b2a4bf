#include "nbiot/receiver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nbiot/dsp.hpp"

namespace nbiot {

namespace {

constexpr int kDecim = 8;
constexpr int kSegment = kSamplesPerFrame;              // 10 ms at 1.92 Msps
constexpr int kSegmentDec = kSegment / kDecim;          // 2400 decimated taus
constexpr int kLookahead = kSamplesPerSubframe;         // NPSS block tail
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct NpssReference {
    std::vector<cplx> subframe;       // 1920 samples, NPSS subframe at full rate
    std::vector<cplx> decimated;      // 240 samples
    std::array<long, 11> data_start;  // post-CP start of NPSS symbol l
    std::array<int, 11> dec_lo;
    std::array<int, 11> dec_hi;       // inclusive decimated tap range
};

std::vector<cplx> decimate8(std::span<const cplx> x) {
    std::vector<cplx> out(x.size() / kDecim);
    for (std::size_t d = 0; d < out.size(); ++d) {
        cplx acc(0, 0);
        for (int i = 0; i < kDecim; ++i) {
            acc += x[d * kDecim + i];
        }
        out[d] = acc / static_cast<double>(kDecim);
    }
    return out;
}

const NpssReference& npss_reference() {
    static const NpssReference ref = [] {
        NpssReference r;
        const auto cell = CellConfig::standalone(0);
        ResourceGrid grid = make_subframe(SubframeRole::Npss, cell);
        const auto npss = generate_npss();
        std::vector<cplx> flat;
        flat.reserve(kNpssSymbols * kNpssSubcarriers);
        for (const auto& row : npss.symbols) {
            flat.insert(flat.end(), row.begin(), row.end());
        }
        map_channel(grid, flat, ChannelKind::Npss, cell);
        r.subframe = serialize({&grid, 1}).samples;
        r.decimated = decimate8(r.subframe);
        for (int l = 0; l < 11; ++l) {
            const int sym = 3 + l;
            r.data_start[l] = symbol_sample_offset(sym) + symbol_cp_length(sym);
            r.dec_lo[l] = static_cast<int>((r.data_start[l] + kDecim - 1) / kDecim);
            r.dec_hi[l] = static_cast<int>((r.data_start[l] + kFftSize15k) / kDecim - 1);
        }
        return r;
    }();
    return ref;
}

// mean spacing between adjacent NPSS symbol starts, in samples
double npss_adjacent_spacing() {
    const auto& ref = npss_reference();
    double acc = 0;
    for (int l = 0; l < 10; ++l) {
        acc += static_cast<double>(ref.data_start[l + 1] - ref.data_start[l]);
    }
    return acc / 10.0;
}

}  // namespace

NpssSearcher::NpssSearcher(SyncConfig config) : config_(std::move(config)) {
    accum_.assign(config_.cfo_hypotheses_hz.size(), std::vector<cplx>(kSegmentDec, cplx(0, 0)));
}

void NpssSearcher::process_segment(std::span<const cplx> segment) {
    const auto& ref = npss_reference();
    const auto seg_dec = decimate8(segment);
    const double lambda = config_.accumulation_weight;
    const std::size_t n = seg_dec.size();

    // planar buffers so the per-tap accumulation vectorizes
    std::vector<double> rot_re(n), rot_im(n);
    std::vector<double> b_re(11 * kSegmentDec), b_im(11 * kSegmentDec);
    for (std::size_t h = 0; h < config_.cfo_hypotheses_hz.size(); ++h) {
        const double step = -kTwoPi * config_.cfo_hypotheses_hz[h] * kDecim / kSampleRateHz;
        const cplx rot_step = std::polar(1.0, step);
        cplx phase(1.0, 0.0);
        for (std::size_t d = 0; d < n; ++d) {
            const cplx v = seg_dec[d] * phase;
            rot_re[d] = v.real();
            rot_im[d] = v.imag();
            phase *= rot_step;
            if ((d & 1023u) == 0) {
                phase /= std::abs(phase);
            }
        }
        std::fill(b_re.begin(), b_re.end(), 0.0);
        std::fill(b_im.begin(), b_im.end(), 0.0);
        for (int l = 0; l < 11; ++l) {
            double* br = &b_re[static_cast<std::size_t>(l) * kSegmentDec];
            double* bi = &b_im[static_cast<std::size_t>(l) * kSegmentDec];
            for (int d = ref.dec_lo[l]; d <= ref.dec_hi[l]; ++d) {
                const double cr = ref.decimated[d].real();
                const double ci = -ref.decimated[d].imag();  // conj
                const double* xr = rot_re.data() + d;
                const double* xi = rot_im.data() + d;
                for (int tau = 0; tau < kSegmentDec; ++tau) {
                    br[tau] += xr[tau] * cr - xi[tau] * ci;
                    bi[tau] += xr[tau] * ci + xi[tau] * cr;
                }
            }
        }
        // adjacent-symbol differential combining is immune to residual CFO;
        // the code cover is already part of the per-symbol reference
        auto& acc_h = accum_[h];
        for (int tau = 0; tau < kSegmentDec; ++tau) {
            double mr = 0, mi = 0;
            for (int l = 0; l < 10; ++l) {
                const double ar = b_re[static_cast<std::size_t>(l + 1) * kSegmentDec + tau];
                const double ai = b_im[static_cast<std::size_t>(l + 1) * kSegmentDec + tau];
                const double cr = b_re[static_cast<std::size_t>(l) * kSegmentDec + tau];
                const double ci = -b_im[static_cast<std::size_t>(l) * kSegmentDec + tau];
                mr += ar * cr - ai * ci;
                mi += ar * ci + ai * cr;
            }
            acc_h[tau] = lambda * acc_h[tau] + cplx(mr, mi);
        }
    }
    ++segments_;
}

SyncResult NpssSearcher::evaluate() {
    SyncResult res;
    res.accumulation_count = segments_;
    if (segments_ == 0) {
        return res;
    }
    std::size_t best_h = 0;
    int best_tau = 0;
    double best_ratio = 0;
    for (std::size_t h = 0; h < accum_.size(); ++h) {
        double peak = 0, sum = 0;
        int arg = 0;
        for (int tau = 0; tau < kSegmentDec; ++tau) {
            const double v = std::abs(accum_[h][tau]);
            sum += v;
            if (v > peak) {
                peak = v;
                arg = tau;
            }
        }
        const double ratio = peak / std::max(sum / kSegmentDec, 1e-300);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_h = h;
            best_tau = arg;
        }
    }
    res.metric_peak = best_ratio;
    if (best_ratio < config_.detection_threshold) {
        return res;
    }
    res.detected = true;

    // full-rate refinement around the decimated peak over the kept segments
    const auto& ref = npss_reference();
    const double hyp = config_.cfo_hypotheses_hz[best_h];
    long best_off = static_cast<long>(best_tau) * kDecim;
    double best_m = -1.0;
    cplx best_metric_cplx(0, 0);
    for (long delta = -kDecim - 3; delta <= kDecim + 3; ++delta) {
        const long cand = static_cast<long>(best_tau) * kDecim + delta;
        if (cand < 0) {
            continue;
        }
        cplx m_total(0, 0);
        for (const auto& seg : recent_) {
            if (cand + ref.data_start[10] + kFftSize15k >= static_cast<long>(seg.size())) {
                continue;
            }
            std::array<cplx, 11> b{};
            for (int l = 0; l < 11; ++l) {
                cplx acc(0, 0);
                const long s0 = cand + ref.data_start[l];
                for (int n = 0; n < kFftSize15k; ++n) {
                    const long idx = s0 + n;
                    acc += seg[idx] * std::polar(1.0, -kTwoPi * hyp * idx / kSampleRateHz) *
                           std::conj(ref.subframe[ref.data_start[l] + n]);
                }
                b[l] = acc;
            }
            for (int l = 0; l < 10; ++l) {
                m_total += b[l + 1] * std::conj(b[l]);
            }
        }
        if (std::abs(m_total) > best_m) {
            best_m = std::abs(m_total);
            best_off = cand;
            best_metric_cplx = m_total;
        }
    }
    res.sample_timing = best_off % kSegment;

    // coarse hypothesis + fractional from the differential phase
    const double frac = std::arg(best_metric_cplx) / (kTwoPi * npss_adjacent_spacing() / kSampleRateHz);
    res.cfo_hz_estimate = hyp + frac;
    return res;
}

SyncResult NpssSearcher::feed(std::span<const cplx> samples) {
    pending_.insert(pending_.end(), samples.begin(), samples.end());
    SyncResult last;
    last.accumulation_count = segments_;
    while (pending_.size() >= static_cast<std::size_t>(kSegment + kLookahead)) {
        std::span<const cplx> seg(pending_.data(), kSegment + kLookahead);
        process_segment(seg);
        recent_.emplace_back(seg.begin(), seg.end());
        if (static_cast<int>(recent_.size()) > config_.refine_segments) {
            recent_.erase(recent_.begin());
        }
        pending_.erase(pending_.begin(), pending_.begin() + kSegment);
        last = evaluate();
        if (last.detected) {
            return last;
        }
    }
    return last;
}

SyncResult NpssSearcher::search(const Waveform& wave) {
    SyncResult res = feed(wave.samples);
    if (!res.detected && segments_ == 0) {
        // flush a short capture with zero padding
        res = feed(std::vector<cplx>(kLookahead, cplx(0, 0)));
    }
    return res;
}

namespace {

// full-rate per-symbol NPSS correlations at a given timing, after
// derotating by freq_hz
std::array<cplx, 11> npss_base_at(std::span<const cplx> samples, long timing, double freq_hz) {
    const auto& ref = npss_reference();
    std::array<cplx, 11> b{};
    for (int l = 0; l < 11; ++l) {
        cplx acc(0, 0);
        const long s0 = timing + ref.data_start[l];
        for (int n = 0; n < kFftSize15k; ++n) {
            const long idx = s0 + n;
            if (idx < 0 || idx >= static_cast<long>(samples.size())) {
                continue;
            }
            acc += samples[idx] * std::polar(1.0, -kTwoPi * freq_hz * idx / kSampleRateHz) *
                   std::conj(ref.subframe[ref.data_start[l] + n]);
        }
        b[l] = acc;
    }
    return b;
}

double spacing_samples(int l0, int l1) {
    const auto& ref = npss_reference();
    return static_cast<double>(ref.data_start[l1] - ref.data_start[l0]);
}

}  // namespace

double estimate_cfo(const Waveform& wave, long npss_timing, const SyncConfig& config) {
    // NPSS occasions available in the capture
    std::vector<long> occasions;
    for (long t = npss_timing; t + kSamplesPerSubframe <= static_cast<long>(wave.samples.size());
         t += kSegment) {
        occasions.push_back(t);
    }
    if (occasions.empty()) {
        throw std::invalid_argument("capture does not cover an NPSS occasion");
    }
    const int coarse_occasions = std::min<std::size_t>(4, occasions.size());

    // stage 1: coarse hypothesis grid
    double best_hyp = 0.0;
    double best_metric = -1.0;
    for (const double hyp : config.cfo_hypotheses_hz) {
        cplx m(0, 0);
        for (int k = 0; k < coarse_occasions; ++k) {
            const auto b = npss_base_at(wave.samples, occasions[k], hyp);
            for (int l = 0; l < 10; ++l) {
                m += b[l + 1] * std::conj(b[l]);
            }
        }
        if (std::abs(m) > best_metric) {
            best_metric = std::abs(m);
            best_hyp = hyp;
        }
    }
    double est = best_hyp;

    // stages 2-4: fractional refinement with growing symbol baselines
    for (const int span : {1, 5, 10}) {
        cplx m(0, 0);
        for (int k = 0; k < coarse_occasions; ++k) {
            const auto b = npss_base_at(wave.samples, occasions[k], est);
            for (int l = 0; l + span < 11; ++l) {
                m += b[l + span] * std::conj(b[l]);
            }
        }
        if (std::abs(m) > 0) {
            est += std::arg(m) / (kTwoPi * spacing_samples(0, span) / kSampleRateHz);
        }
    }

    // stage 5: segment baseline (10 ms) when several occasions exist;
    // range is +-50 Hz, applied after the estimate is already close
    if (occasions.size() >= 2) {
        cplx m(0, 0);
        std::vector<cplx> blocks;
        for (const long t : occasions) {
            const auto b = npss_base_at(wave.samples, t, est);
            cplx c(0, 0);
            for (int l = 0; l < 11; ++l) {
                c += b[l];
            }
            blocks.push_back(c);
        }
        for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
            m += blocks[k + 1] * std::conj(blocks[k]);
        }
        if (std::abs(m) > 0) {
            est += std::arg(m) / (kTwoPi * kSegment / kSampleRateHz);
        }
    }
    return est;
}

namespace {

// 132-element received NSSS block at an occasion start (subframe start)
std::vector<cplx> extract_nsss_block(std::span<const cplx> samples, long subframe_start, double cfo_hz) {
    std::vector<cplx> span_copy(kSamplesPerSubframe);
    for (int n = 0; n < kSamplesPerSubframe; ++n) {
        const long idx = subframe_start + n;
        span_copy[n] = (idx >= 0 && idx < static_cast<long>(samples.size()))
                           ? samples[idx] * std::polar(1.0, -kTwoPi * cfo_hz * idx / kSampleRateHz)
                           : cplx(0, 0);
    }
    std::vector<cplx> block;
    block.reserve(kNsssLength);
    for (int sym = 3; sym < kSymbolsPerSubframe; ++sym) {
        const auto vals = extract_symbol(span_copy, symbol_sample_offset(sym), symbol_cp_length(sym));
        block.insert(block.end(), vals.begin(), vals.end());
    }
    return block;
}

struct NsssCandidates {
    // candidate sequences indexed [pcid * 4 + shift]
    std::vector<std::vector<cplx>> seq;
};

const NsssCandidates& nsss_candidates() {
    static const NsssCandidates c = [] {
        NsssCandidates out;
        out.seq.resize(static_cast<std::size_t>(kNumPcid) * 4);
        for (int pcid = 0; pcid < kNumPcid; ++pcid) {
            for (int shift = 0; shift < 4; ++shift) {
                out.seq[static_cast<std::size_t>(pcid) * 4 + shift] = generate_nsss(pcid, 2 * shift).values;
            }
        }
        return out;
    }();
    return c;
}

}  // namespace

NsssDetection nsss_detect(const Waveform& wave, long npss_timing, double cfo_hz, int combine,
                          double threshold) {
    const auto& cands = nsss_candidates();
    // candidate occasions every 10 ms after the NPSS frame's subframe 9;
    // true NSSS occasions are the even or odd ones depending on frame parity
    std::vector<std::vector<cplx>> blocks;
    std::vector<double> energies;
    for (int k = 0; k < 2 * combine; ++k) {
        const long t = npss_timing + 4L * kSamplesPerSubframe + static_cast<long>(k) * kSegment;
        if (t + kSamplesPerSubframe > static_cast<long>(wave.samples.size())) {
            break;
        }
        auto block = extract_nsss_block(wave.samples, t, cfo_hz);
        double e = 0;
        for (const auto& v : block) {
            e += std::norm(v);
        }
        blocks.push_back(std::move(block));
        energies.push_back(e);
    }
    NsssDetection best;
    if (blocks.empty()) {
        return best;
    }
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<int> occ;
        for (std::size_t k = parity; k < blocks.size(); k += 2) {
            if (static_cast<int>(occ.size()) < combine) {
                occ.push_back(static_cast<int>(k));
            }
        }
        if (occ.empty()) {
            continue;
        }
        for (int pcid = 0; pcid < kNumPcid; ++pcid) {
            for (int shift0 = 0; shift0 < 4; ++shift0) {
                double metric = 0;
                for (std::size_t j = 0; j < occ.size(); ++j) {
                    const auto& r = blocks[occ[j]];
                    const auto& c = cands.seq[static_cast<std::size_t>(pcid) * 4 + (shift0 + j) % 4];
                    cplx corr(0, 0);
                    for (int n = 0; n < kNsssLength; ++n) {
                        corr += r[n] * std::conj(c[n]);
                    }
                    const double denom = energies[occ[j]] * kNsssLength;
                    if (denom > 0) {
                        metric += std::norm(corr) / denom;
                    }
                }
                metric /= static_cast<double>(occ.size());
                if (metric > best.metric) {
                    best.metric = metric;
                    best.nb_pcid = pcid;
                    best.frame_position_80ms = parity == 0 ? (2 * shift0) % 8 : (2 * shift0 + 7) % 8;
                }
            }
        }
    }
    best.detected = best.metric > threshold;
    if (!best.detected) {
        best.nb_pcid = -1;
        best.frame_position_80ms = -1;
    }
    return best;
}

SyncResult cell_search(const Waveform& wave, const SyncConfig& config, int nsss_combine) {
    NpssSearcher searcher(config);
    SyncResult res = searcher.search(wave);
    if (!res.detected) {
        return res;
    }
    res.cfo_hz_estimate = estimate_cfo(wave, res.sample_timing, config);
    const auto nsss = nsss_detect(wave, res.sample_timing, res.cfo_hz_estimate, nsss_combine);
    if (!nsss.detected) {
        res.detected = false;
        return res;
    }
    res.nb_pcid = nsss.nb_pcid;
    res.frame_position_80ms = nsss.frame_position_80ms;
    return res;
}

std::vector<RasterHypothesis> default_raster_hypotheses() {
    // nonzero offsets occur both with CRS (in-band) and without (guard-band)
    return {{0.0, false},    {2500.0, true},  {-2500.0, true}, {7500.0, true}, {-7500.0, true},
            {2500.0, false}, {-2500.0, false}, {7500.0, false}, {-7500.0, false}};
}

namespace {

// derotate by cfo (absolute sample phase) and resample by 1/(1+drift)
std::vector<cplx> compensated_block(std::span<const cplx> samples, double cfo_hz, double drift,
                                    double start, int length) {
    const double ratio = 1.0 / (1.0 + drift);
    const long src_lo = static_cast<long>(std::floor(start * ratio)) - 12;
    const long src_hi = static_cast<long>(std::ceil((start + length) * ratio)) + 12;
    std::vector<cplx> local(static_cast<std::size_t>(src_hi - src_lo), cplx(0, 0));
    for (long i = src_lo; i < src_hi; ++i) {
        if (i >= 0 && i < static_cast<long>(samples.size())) {
            local[i - src_lo] = samples[i] * std::polar(1.0, -kTwoPi * cfo_hz * i / kSampleRateHz);
        }
    }
    std::vector<cplx> out(length);
    for (int k = 0; k < length; ++k) {
        const double pos = (start + k) * ratio - static_cast<double>(src_lo);
        out[k] = dsp::interpolate(local, pos);
    }
    return out;
}

CellConfig hypothesis_cell(int nb_pcid, const RasterHypothesis& hyp) {
    CellConfig cell;
    cell.nb_pcid = nb_pcid;
    cell.lte_pcid = nb_pcid;  // identity relationship
    if (hyp.crs_reserved) {
        cell.deployment = {DeploymentMode::InBand, 10, 4, true};
        cell.lte_crs_ports = 4;
        cell.lte_pdcch_symbols = 3;
    } else {
        cell.deployment.mode = DeploymentMode::StandAlone;
        cell.lte_pdcch_symbols = 0;
    }
    return cell;
}

}  // namespace

NpbchResult npbch_acquire(const Waveform& wave, const SyncResult& sync,
                          const std::vector<RasterHypothesis>& hypotheses, const SyncConfig& config) {
    NpbchResult result;
    if (!sync.detected || sync.nb_pcid < 0 || sync.frame_position_80ms < 0) {
        throw std::invalid_argument("NPBCH acquisition requires a complete SyncResult");
    }
    long frame0 = sync.sample_timing - 5L * kSamplesPerSubframe;
    int frame0_mod8 = sync.frame_position_80ms;
    if (frame0 < 0) {
        frame0 += kSegment;
        frame0_mod8 = (frame0_mod8 + 1) % 8;
    }
    const int to_boundary = (8 - frame0_mod8) % 8;
    const long first_window = frame0 + static_cast<long>(to_boundary) * kSegment;
    const long window_span = 8L * kSegment;

    for (int w = 0;; ++w) {
        const long ws = first_window + static_cast<long>(w) * window_span;
        if (ws + window_span > static_cast<long>(wave.samples.size())) {
            break;
        }
        result.windows_used = w + 1;
        double best_slip = std::numeric_limits<double>::infinity();
        for (const auto& hyp : hypotheses) {
            const double drift = (sync.cfo_hz_estimate - hyp.offset_hz) / config.carrier_hz;
            const CellConfig cell = hypothesis_cell(sync.nb_pcid, hyp);
            const auto positions = data_positions(ChannelKind::Npbch, cell);
            const int capacity_bits = 2 * static_cast<int>(positions.size());

            // accumulate the 8 repetitions of this sub-block, keeping the
            // per-repetition grids for the drift check below
            std::vector<std::vector<cplx>> reps(kNpbchRepetitions,
                                                std::vector<cplx>(kElementsPerSubframe, cplx(0, 0)));
            std::vector<cplx> acc(kElementsPerSubframe, cplx(0, 0));
            for (int rep = 0; rep < kNpbchRepetitions; ++rep) {
                const auto block = compensated_block(wave.samples, sync.cfo_hz_estimate, drift,
                                                     static_cast<double>(ws + rep * kSegment),
                                                     kSamplesPerSubframe);
                for (int sym = 0; sym < kSymbolsPerSubframe; ++sym) {
                    const auto vals = extract_symbol(block, symbol_sample_offset(sym), symbol_cp_length(sym));
                    for (int k = 0; k < kSubcarriers; ++k) {
                        reps[rep][ResourceGrid::index(k, sym)] = vals[k];
                        acc[ResourceGrid::index(k, sym)] += vals[k];
                    }
                }
            }
            // channel estimate from port-0 NRS
            const auto nrs = nrs_positions(cell, 0);
            cplx h(0, 0);
            for (std::size_t i = 0; i < nrs.size(); ++i) {
                h += acc[ResourceGrid::index(nrs[i].subcarrier, nrs[i].symbol)] *
                     std::conj(nrs_value(cell, 0, static_cast<int>(i)));
            }
            if (std::abs(h) == 0.0) {
                continue;
            }
            h /= static_cast<double>(nrs.size()) * kNpbchRepetitions;
            const cplx eq = std::conj(h) / std::abs(h);

            std::vector<cplx> symbols;
            symbols.reserve(positions.size());
            for (const auto& p : positions) {
                symbols.push_back(acc[ResourceGrid::index(p.subcarrier, p.symbol)] * eq /
                                  static_cast<double>(kNpbchRepetitions));
            }
            const auto llr = demodulate(symbols, Modulation::Qpsk, 1.0);

            for (int sb = 0; sb < kNpbchSubblocks; ++sb) {
                const auto scr = gold_sequence(npbch_scrambler_init(cell, sb), llr.size());
                std::vector<double> descrambled(llr.size());
                for (std::size_t i = 0; i < llr.size(); ++i) {
                    descrambled[i] = scr[i] ? -llr[i] : llr[i];
                }
                // each sub-block is a window of the 8x rate-matched stream
                const auto mother = derate_match(descrambled, CodingScheme::Tbcc, kMibBits + kCrc24Bits,
                                                 static_cast<long>(sb) * capacity_bits);
                const auto bits = viterbi_decode_mother(mother, kMibBits + kCrc24Bits);
                if (!check_crc(bits, kCrc24Bits)) {
                    continue;
                }
                Bits payload(bits.begin(), bits.begin() + kMibBits);
                // re-encode the decoded MIB; a wrong raster hypothesis leaves
                // residual sampling drift, visible as a timing slip that
                // grows linearly across the 8 repetitions
                const auto tb = make_transport_block(payload, Channel::Npbch);
                const Bits re = rate_match(tbcc_encode(tb), kNpbchSubblocks * capacity_bits);
                std::vector<cplx> ref(positions.size());
                for (std::size_t i = 0; i < positions.size(); ++i) {
                    const std::uint8_t b0 = re[static_cast<std::size_t>(sb) * capacity_bits + 2 * i] ^ scr[2 * i];
                    const std::uint8_t b1 =
                        re[static_cast<std::size_t>(sb) * capacity_bits + 2 * i + 1] ^ scr[2 * i + 1];
                    ref[i] = cplx(1.0 - 2.0 * b0, 1.0 - 2.0 * b1) / std::sqrt(2.0);
                }
                double slope_num = 0, slope_den = 0;
                for (int rep = 0; rep < kNpbchRepetitions; ++rep) {
                    cplx p(0, 0);
                    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
                        if (positions[i + 1].symbol != positions[i].symbol ||
                            positions[i + 1].subcarrier != positions[i].subcarrier + 1) {
                            continue;
                        }
                        const cplx y1 = reps[rep][ResourceGrid::index(positions[i].subcarrier, positions[i].symbol)];
                        const cplx y2 =
                            reps[rep][ResourceGrid::index(positions[i + 1].subcarrier, positions[i + 1].symbol)];
                        p += y2 * std::conj(y1) * std::conj(ref[i + 1] * std::conj(ref[i]));
                    }
                    // timing slip of this repetition, in samples
                    const double slip = -std::arg(p) * kFftSize15k / kTwoPi;
                    const double x = rep - (kNpbchRepetitions - 1) / 2.0;
                    slope_num += x * slip;
                    slope_den += x * x;
                }
                const double slip_rate = std::abs(slope_num / std::max(slope_den, 1e-12));
                if (slip_rate < best_slip) {
                    best_slip = slip_rate;
                    result.acquired = true;
                    result.mib = Mib::from_bits(payload);
                    result.hypothesis = hyp;
                    result.subblock = sb;
                    result.metric = slip_rate;
                }
            }
        }
        if (result.acquired) {
            return result;
        }
    }
    result.next_attempt_offset_ms = 640.0;
    return result;
}

DecodeResult decode_npdsch(const Waveform& wave, const DlScheduleInfo& info, const CellConfig& cell) {
    cell.validate();
    const int nsf = info.subframes_per_rep;
    if (nsf <= 0 || info.repetitions <= 0 ||
        info.data_subframes.size() != static_cast<std::size_t>(nsf) * info.repetitions) {
        throw std::invalid_argument("schedule info inconsistent with the data subframe list");
    }
    const auto positions = data_positions(ChannelKind::Npdsch, cell);
    const auto nrs = nrs_positions(cell, 0);
    const int capacity_bits = 2 * static_cast<int>(positions.size());

    std::vector<double> llr_all;
    llr_all.reserve(static_cast<std::size_t>(nsf) * capacity_bits);
    for (int s = 0; s < nsf; ++s) {
        // chase-combine the repetitions of this pattern subframe
        std::vector<cplx> acc(kElementsPerSubframe, cplx(0, 0));
        for (int rep = 0; rep < info.repetitions; ++rep) {
            const long sf_index = info.data_subframes[static_cast<std::size_t>(rep) * nsf + s];
            const long start = sf_index * kSamplesPerSubframe;
            if (start < 0 || start + kSamplesPerSubframe > static_cast<long>(wave.samples.size())) {
                throw std::invalid_argument("data subframe outside the capture");
            }
            for (int sym = 0; sym < kSymbolsPerSubframe; ++sym) {
                const auto vals = extract_symbol(std::span<const cplx>(wave.samples).subspan(start, kSamplesPerSubframe),
                                                 symbol_sample_offset(sym), symbol_cp_length(sym));
                for (int k = 0; k < kSubcarriers; ++k) {
                    acc[ResourceGrid::index(k, sym)] += vals[k];
                }
            }
        }
        for (auto& v : acc) {
            v /= static_cast<double>(info.repetitions);
        }
        // flat least-squares channel estimate from NRS
        cplx h(0, 0);
        for (std::size_t i = 0; i < nrs.size(); ++i) {
            h += acc[ResourceGrid::index(nrs[i].subcarrier, nrs[i].symbol)] *
                 std::conj(nrs_value(cell, 0, static_cast<int>(i)));
        }
        h /= static_cast<double>(nrs.size());
        double noise_var = 0;
        for (std::size_t i = 0; i < nrs.size(); ++i) {
            noise_var += std::norm(acc[ResourceGrid::index(nrs[i].subcarrier, nrs[i].symbol)] -
                                   h * nrs_value(cell, 0, static_cast<int>(i)));
        }
        noise_var = std::max(noise_var / static_cast<double>(nrs.size()), 1e-12);
        const double habs = std::max(std::abs(h), 1e-12);

        std::vector<cplx> symbols;
        symbols.reserve(positions.size());
        for (const auto& p : positions) {
            symbols.push_back(acc[ResourceGrid::index(p.subcarrier, p.symbol)] * std::conj(h) / habs);
        }
        auto llr = demodulate(symbols, Modulation::Qpsk, noise_var / habs);
        const auto scr = gold_sequence(data_scrambler_init(cell, ChannelKind::Npdsch, s), llr.size());
        for (std::size_t i = 0; i < llr.size(); ++i) {
            if (scr[i]) {
                llr[i] = -llr[i];
            }
        }
        llr_all.insert(llr_all.end(), llr.begin(), llr.end());
    }
    return viterbi_decode(llr_all, info.tbs, Channel::Npdsch);
}

}  // namespace nbiot
