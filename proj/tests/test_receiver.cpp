#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nbiot/channel.hpp"
#include "nbiot/receiver.hpp"

using namespace nbiot;

namespace {

constexpr long kNpssStart = 5L * kSamplesPerSubframe;  // subframe 5 of frame 0

Waveform downlink_capture(const CellConfig& cell, int frames, int start_frame = 0) {
    Mib mib;
    mib.sfn_msbs = 2;
    mib.mode = cell.deployment.mode;
    return serialize(compose_frames(cell, mib, start_frame, frames));
}

}  // namespace

TEST_CASE("NPSS search: clean detection at 10 dB with one segment") {
    const auto cell = CellConfig::standalone(17);
    auto wave = downlink_capture(cell, 3);
    ChannelSpec spec;
    spec.snr_db = 10.0;
    spec.seed = 1;
    const auto rx = apply_channel(wave, spec);

    NpssSearcher searcher;
    const auto res = searcher.search(rx);
    REQUIRE(res.detected);
    CHECK(std::abs(res.sample_timing - kNpssStart) <= 2);
    CHECK(res.accumulation_count >= 1);
}

TEST_CASE("NPSS timing is shift-equivariant") {
    const auto cell = CellConfig::standalone(3);
    const auto wave = downlink_capture(cell, 3);
    for (const long shift : {137L, 1001L}) {
        Waveform delayed;
        delayed.sample_rate_hz = wave.sample_rate_hz;
        delayed.samples.assign(shift, cplx(0, 0));
        delayed.samples.insert(delayed.samples.end(), wave.samples.begin(), wave.samples.end());
        NpssSearcher searcher;
        const auto res = searcher.search(delayed);
        REQUIRE(res.detected);
        CHECK((res.sample_timing - kNpssStart - shift) % kSamplesPerFrame == 0);
    }
}

TEST_CASE("weighted accumulation with lambda=1 equals plain summation") {
    const auto cell = CellConfig::standalone(9);
    const auto wave = downlink_capture(cell, 4);
    ChannelSpec spec;
    spec.snr_db = 0.0;
    spec.seed = 3;
    const auto rx = apply_channel(wave, spec);

    SyncConfig cfg;
    cfg.accumulation_weight = 1.0;
    cfg.detection_threshold = 1e9;  // never detect: accumulate everything
    NpssSearcher all(cfg);
    all.feed(rx.samples);

    // same segments, one fresh searcher each, buffers summed manually
    std::vector<std::vector<cplx>> sum;
    const long seg = kSamplesPerFrame;
    const long lookahead = kSamplesPerSubframe;
    for (int s = 0; s + 1 < 4; ++s) {
        NpssSearcher one(cfg);
        std::span<const cplx> chunk(rx.samples.data() + s * seg, seg + lookahead);
        one.feed(chunk);
        REQUIRE(one.segments_accumulated() == 1);
        if (sum.empty()) {
            sum = one.accumulators();
        } else {
            for (std::size_t h = 0; h < sum.size(); ++h) {
                for (std::size_t t = 0; t < sum[h].size(); ++t) {
                    sum[h][t] += one.accumulators()[h][t];
                }
            }
        }
    }
    REQUIRE(all.segments_accumulated() == 3);
    for (std::size_t h = 0; h < sum.size(); ++h) {
        for (std::size_t t = 0; t < sum[h].size(); ++t) {
            CHECK(std::abs(all.accumulators()[h][t] - sum[h][t]) < 1e-9);
        }
    }
}

TEST_CASE("CFO estimation: zero and large offsets") {
    const auto cell = CellConfig::standalone(21);
    const auto wave = downlink_capture(cell, 6);

    SUBCASE("clean, zero CFO") {
        const double est = estimate_cfo(wave, kNpssStart);
        CHECK(std::abs(est) <= 50.0);
    }
    SUBCASE("20 ppm at 900 MHz, 10 dB SNR") {
        ChannelSpec spec;
        spec.snr_db = 10.0;
        spec.cfo_hz = 18000.0;
        spec.seed = 5;
        const auto rx = apply_channel(wave, spec);
        const double est = estimate_cfo(rx, kNpssStart);
        CHECK(std::abs(est - 18000.0) <= 100.0);
    }
    SUBCASE("odd symmetry") {
        for (const double f : {4000.0, 12500.0}) {
            ChannelSpec plus, minus;
            plus.snr_db = minus.snr_db = 20.0;
            plus.seed = minus.seed = 9;
            plus.cfo_hz = f;
            minus.cfo_hz = -f;
            const double ep = estimate_cfo(apply_channel(wave, plus), kNpssStart);
            const double em = estimate_cfo(apply_channel(wave, minus), kNpssStart);
            CHECK(std::abs(ep + em) < 100.0);
        }
    }
}

TEST_CASE("NSSS detection: PCID and 80 ms position") {
    for (const int start_frame : {0, 2, 5}) {
        const auto cell = CellConfig::standalone(17);
        const auto wave = downlink_capture(cell, 8, start_frame);
        const auto det = nsss_detect(wave, kNpssStart, 0.0, 4);
        REQUIRE(det.detected);
        CHECK(det.nb_pcid == 17);
        CHECK(det.frame_position_80ms == start_frame % 8);
    }
}

TEST_CASE("NSSS detection is amplitude invariant") {
    const auto cell = CellConfig::standalone(99);
    auto wave = downlink_capture(cell, 8);
    const auto a = nsss_detect(wave, kNpssStart, 0.0, 2);
    for (auto& v : wave.samples) {
        v *= 0.01;
    }
    const auto b = nsss_detect(wave, kNpssStart, 0.0, 2);
    REQUIRE(a.detected);
    CHECK(a.nb_pcid == b.nb_pcid);
    CHECK(a.frame_position_80ms == b.frame_position_80ms);
    CHECK(a.metric == doctest::Approx(b.metric).epsilon(1e-6));
}

TEST_CASE("NSSS at -6 dB with 4 combined occasions") {
    const auto cell = CellConfig::standalone(251);
    const auto wave = downlink_capture(cell, 16);
    ChannelSpec spec;
    spec.snr_db = -6.0;
    spec.seed = 11;
    const auto rx = apply_channel(wave, spec);
    const auto det = nsss_detect(rx, kNpssStart, 0.0, 4);
    REQUIRE(det.detected);
    CHECK(det.nb_pcid == 251);
    CHECK(det.frame_position_80ms == 0);
}

TEST_CASE("NSSS detection rate at -6 dB with 4 combinations") {
    const auto cell = CellConfig::standalone(251);
    const auto wave = downlink_capture(cell, 16);
    int ok = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        ChannelSpec spec;
        spec.snr_db = -6.0;
        spec.seed = 7000 + t;
        const auto rx = apply_channel(wave, spec);
        const auto det = nsss_detect(rx, kNpssStart, 0.0, 4);
        ok += det.detected && det.nb_pcid == 251 && det.frame_position_80ms == 0;
    }
    CHECK(ok >= (trials * 95) / 100);
}

TEST_CASE("NSSS below threshold signals a detection failure") {
    Waveform noise;
    noise.samples.assign(16 * kSamplesPerFrame, cplx(0, 0));
    ChannelSpec spec;
    spec.snr_db = 0.0;
    spec.seed = 9;
    const auto rx = apply_channel(noise, spec);
    const auto det = nsss_detect(rx, kNpssStart, 0.0, 4, 0.5);
    CHECK(!det.detected);
    CHECK(det.nb_pcid == -1);
}

TEST_CASE("NPBCH acquisition: stand-alone, clean, first sub-block window") {
    const auto cell = CellConfig::standalone(77);
    Mib mib;
    mib.sfn_msbs = 13;
    mib.mode = DeploymentMode::StandAlone;
    const auto wave = serialize(compose_frames(cell, mib, 0, 16));

    SyncResult sync;
    sync.detected = true;
    sync.sample_timing = kNpssStart;
    sync.cfo_hz_estimate = 0.0;
    sync.nb_pcid = 77;
    sync.frame_position_80ms = 0;

    const auto res = npbch_acquire(wave, sync, default_raster_hypotheses());
    REQUIRE(res.acquired);
    CHECK(res.windows_used == 1);
    CHECK(res.hypothesis.offset_hz == 0.0);
    CHECK(res.mib == mib);
    CHECK(res.subblock == 0);
}

TEST_CASE("NPBCH acquisition from a capture starting mid-TTI") {
    const auto cell = CellConfig::standalone(55);
    Mib mib;
    mib.sfn_msbs = 9;
    const int start_frame = 12;  // sub-block 1, frame position 4 within the 80 ms block
    const auto wave = serialize(compose_frames(cell, mib, start_frame, 16));

    SyncResult sync;
    sync.detected = true;
    sync.sample_timing = kNpssStart;
    sync.cfo_hz_estimate = 0.0;
    sync.nb_pcid = 55;
    sync.frame_position_80ms = start_frame % 8;
    const auto res = npbch_acquire(wave, sync, default_raster_hypotheses());
    REQUIRE(res.acquired);
    CHECK(res.mib == mib);
    // first mod-8 boundary after frame 12 is frame 16 = sub-block 2
    CHECK(res.subblock == 2);
}

TEST_CASE("NPBCH raster hypothesis testing picks the true offset (in-band)") {
    const auto cell = CellConfig::inband(42, 10, 30, 2, 3);
    Mib mib;
    mib.sfn_msbs = 5;
    mib.mode = DeploymentMode::InBand;
    const auto wave = serialize(compose_frames(cell, mib, 0, 16));

    const double osc_ppm = 8.0;
    const double carrier = 900e6;
    const double raster = 7500.0;
    ChannelSpec spec;
    spec.cfo_hz = compose_cfo_hz(osc_ppm, carrier, raster);
    spec.drift_ppm = osc_ppm;
    spec.snr_db = 20.0;
    spec.seed = 21;
    const auto rx = apply_channel(wave, spec);

    SyncResult sync;
    sync.detected = true;
    sync.sample_timing = kNpssStart;
    sync.cfo_hz_estimate = spec.cfo_hz;  // isolated from the CFO estimator
    sync.nb_pcid = 42;
    sync.frame_position_80ms = 0;

    const auto res = npbch_acquire(rx, sync, default_raster_hypotheses());
    REQUIRE(res.acquired);
    CHECK(res.hypothesis.offset_hz == raster);
    CHECK(res.hypothesis.crs_reserved);
    CHECK(res.mib == mib);
}

TEST_CASE("NPBCH acquisition on a guard-band cell: raster offset without CRS") {
    CellConfig cell;
    cell.nb_pcid = 88;
    cell.lte_pcid = 88;
    cell.deployment = {DeploymentMode::GuardBand, 10, 0, true};
    cell.lte_pdcch_symbols = 0;
    cell.validate();
    Mib mib;
    mib.sfn_msbs = 7;
    mib.mode = DeploymentMode::GuardBand;
    const auto wave = serialize(compose_frames(cell, mib, 0, 16));

    const double osc_ppm = 6.0;
    const double raster = raster_offset_hz(cell.deployment);
    ChannelSpec spec;
    spec.cfo_hz = compose_cfo_hz(osc_ppm, 900e6, raster);
    spec.drift_ppm = osc_ppm;
    spec.snr_db = 20.0;
    spec.seed = 33;
    const auto rx = apply_channel(wave, spec);

    SyncResult sync;
    sync.detected = true;
    sync.sample_timing = kNpssStart;
    sync.cfo_hz_estimate = spec.cfo_hz;
    sync.nb_pcid = 88;
    sync.frame_position_80ms = 0;
    const auto res = npbch_acquire(rx, sync, default_raster_hypotheses());
    REQUIRE(res.acquired);
    CHECK(res.hypothesis.offset_hz == raster);
    CHECK(!res.hypothesis.crs_reserved);
    CHECK(res.mib == mib);
}

TEST_CASE("NPBCH failure path reports the 640 ms retry latency") {
    const auto cell = CellConfig::standalone(7);
    Waveform noise;
    noise.samples.assign(16 * kSamplesPerFrame, cplx(0, 0));
    ChannelSpec spec;
    spec.snr_db = 0.0;
    spec.seed = 2;
    const auto rx = apply_channel(noise, spec);

    SyncResult sync;
    sync.detected = true;
    sync.sample_timing = kNpssStart;
    sync.cfo_hz_estimate = 0.0;
    sync.nb_pcid = 7;
    sync.frame_position_80ms = 0;
    const auto res = npbch_acquire(rx, sync, default_raster_hypotheses());
    CHECK(!res.acquired);
    CHECK(res.next_attempt_offset_ms == 640.0);
}

TEST_CASE("cell_search composes the full chain") {
    const auto cell = CellConfig::standalone(303);
    const auto wave = downlink_capture(cell, 10, 4);
    ChannelSpec spec;
    spec.snr_db = 5.0;
    spec.cfo_hz = 9000.0;
    spec.seed = 71;
    const auto rx = apply_channel(wave, spec);
    const auto res = cell_search(rx);
    REQUIRE(res.detected);
    CHECK(std::abs(res.sample_timing - kNpssStart) <= 2);
    CHECK(std::abs(res.cfo_hz_estimate - 9000.0) < 150.0);
    CHECK(res.nb_pcid == 303);
    CHECK(res.frame_position_80ms == 4);
}

TEST_CASE("misaligned schedule metadata raises") {
    const auto cell = CellConfig::standalone(3);
    Waveform tiny;
    tiny.samples.assign(kSamplesPerSubframe, cplx(0, 0));
    DlScheduleInfo info;
    info.tbs = 16;
    info.repetitions = 1;
    info.subframes_per_rep = 1;
    info.data_subframes = {5};  // outside the one-subframe capture
    CHECK_THROWS_AS(decode_npdsch(tiny, info, cell), std::invalid_argument);
    DlScheduleInfo inconsistent;
    inconsistent.tbs = 16;
    inconsistent.repetitions = 2;
    inconsistent.subframes_per_rep = 1;
    inconsistent.data_subframes = {0};  // wrong list length
    CHECK_THROWS_AS(decode_npdsch(tiny, inconsistent, cell), std::invalid_argument);
}

TEST_CASE("NPDSCH decode: clean single transmission and with repetitions") {
    const auto cell = CellConfig::standalone(31);
    const int tbs = 120;
    const auto tb = random_transport_block(tbs, Channel::Npdsch, 77);
    NpdschConfig cfg;
    cfg.tbs = tbs;
    cfg.repetitions = 2;
    const auto grids = build_npdsch(tb, cfg, cell);
    const int nsf = npdsch_subframes_for(tbs, cell);

    // place the data grids into pool subframes of two frames
    Mib mib;
    const auto frames = compose_frames(cell, mib, 0, 2, grids);
    const auto wave = serialize(frames);
    // pool subframes in order, skipping 0/5/9-even
    DlScheduleInfo info;
    info.tbs = tbs;
    info.repetitions = 2;
    info.subframes_per_rep = nsf;
    for (long sf = 0; static_cast<int>(info.data_subframes.size()) < 2 * nsf; ++sf) {
        const TimingPosition pos{static_cast<int>(sf / 10), static_cast<int>(sf % 10), 0, 0};
        if (subframe_role(pos) == SubframeRole::Pool) {
            info.data_subframes.push_back(sf);
        }
    }
    ChannelSpec spec;
    spec.snr_db = 6.0;
    spec.seed = 4;
    const auto rx = apply_channel(wave, spec);
    const auto res = decode_npdsch(rx, info, cell);
    CHECK(res.crc_ok);
    CHECK(res.tb.payload_bits == tb.payload_bits);
}

TEST_CASE("NPDSCH decode on an in-band cell maps around CRS") {
    const auto cell = CellConfig::inband(23, 10, 35, 2, 3);
    const int tbs = 88;
    const auto tb = random_transport_block(tbs, Channel::Npdsch, 123);
    NpdschConfig cfg;
    cfg.tbs = tbs;
    cfg.repetitions = 1;
    const auto grids = build_npdsch(tb, cfg, cell);
    const auto wave = serialize(grids);
    DlScheduleInfo info;
    info.tbs = tbs;
    info.repetitions = 1;
    info.subframes_per_rep = npdsch_subframes_for(tbs, cell);
    for (long sf = 0; sf < static_cast<long>(grids.size()); ++sf) {
        info.data_subframes.push_back(sf);
    }
    ChannelSpec spec;
    spec.snr_db = 4.0;
    spec.seed = 31;
    const auto rx = apply_channel(wave, spec);
    const auto res = decode_npdsch(rx, info, cell);
    CHECK(res.crc_ok);
    CHECK(res.tb.payload_bits == tb.payload_bits);
}

TEST_CASE("NPRACH detection: start subcarrier and timing advance") {
    NprachConfig cfg;
    cfg.format = 0;
    cfg.repetitions = 4;
    cfg.num_subcarriers = 12;
    const std::uint32_t seed = 55;

    SUBCASE("zero delay") {
        const auto [pre, wave] = build_nprach(cfg, 5, seed);
        const auto dets = nprach_detect(wave, cfg, seed);
        REQUIRE(!dets.empty());
        CHECK(dets[0].start_subcarrier == 5);
        CHECK(std::abs(dets[0].timing_advance_s) <= 3e-6);
        CHECK(dets.size() == 1);
    }
    SUBCASE("33.3 us delay (10 km cell edge)") {
        auto [pre, wave] = build_nprach(cfg, 7, seed);
        ChannelSpec spec;
        spec.delay_samples = 64;  // 33.33 us
        spec.snr_db = 10.0;
        spec.seed = 6;
        const auto rx = apply_channel(wave, spec);
        const auto dets = nprach_detect(rx, cfg, seed);
        REQUIRE(!dets.empty());
        CHECK(dets[0].start_subcarrier == 7);
        CHECK(dets[0].timing_advance_s == doctest::Approx(33.33e-6).epsilon(0.15));
        CHECK(std::abs(dets[0].timing_advance_s - 33.33e-6) <= 5e-6);
    }
    SUBCASE("two preambles, no cross detection") {
        const auto [p1, w1] = build_nprach(cfg, 2, seed);
        const auto [p2, w2] = build_nprach(cfg, 9, seed);
        Waveform mix = w1;
        for (std::size_t i = 0; i < mix.samples.size(); ++i) {
            mix.samples[i] += w2.samples[i];
        }
        const auto dets = nprach_detect(mix, cfg, seed);
        REQUIRE(dets.size() == 2);
        const int a = std::min(dets[0].start_subcarrier, dets[1].start_subcarrier);
        const int b = std::max(dets[0].start_subcarrier, dets[1].start_subcarrier);
        CHECK(a == 2);
        CHECK(b == 9);
    }
    SUBCASE("noise only: nothing detected") {
        Waveform noise;
        noise.samples.assign(4 * 4 * 2688, cplx(0, 0));
        ChannelSpec spec;
        spec.snr_db = 0.0;
        spec.seed = 8;
        const auto rx = apply_channel(noise, spec);
        CHECK(nprach_detect(rx, cfg, seed).empty());
    }
}

TEST_CASE("NPUSCH decode: multi-tone, single-tone, and Format 2") {
    const auto cell = CellConfig::standalone(17);

    SUBCASE("12-tone QPSK") {
        NpuschAllocation alloc;
        alloc.tone_count = 12;
        const auto tb = random_transport_block(256, Channel::NpuschF1, 91);
        const auto wave = build_npusch_f1(tb, alloc, cell);
        ChannelSpec spec;
        spec.snr_db = 8.0;
        spec.seed = 10;
        const auto rx = apply_channel(wave, spec);
        UlScheduleInfo info;
        info.tbs = 256;
        info.alloc = alloc;
        const auto res = decode_npusch_f1(rx, info, cell);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
    SUBCASE("single-tone pi/2-BPSK with repetitions") {
        NpuschAllocation alloc;
        alloc.tone_count = 1;
        alloc.tone_offset = 4;
        alloc.repetitions = 4;
        alloc.single_tone_modulation = Modulation::Pi2Bpsk;
        const auto tb = random_transport_block(56, Channel::NpuschF1, 92);
        const auto wave = build_npusch_f1(tb, alloc, cell);
        ChannelSpec spec;
        spec.snr_db = 2.0;
        spec.seed = 12;
        const auto rx = apply_channel(wave, spec);
        UlScheduleInfo info;
        info.tbs = 56;
        info.alloc = alloc;
        const auto res = decode_npusch_f1(rx, info, cell);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
    SUBCASE("single-tone 3.75 kHz numerology") {
        NpuschAllocation alloc;
        alloc.numerology = Numerology::khz3750();
        alloc.tone_count = 1;
        alloc.tone_offset = 13;
        alloc.repetitions = 2;
        const auto tb = random_transport_block(88, Channel::NpuschF1, 93);
        const auto wave = build_npusch_f1(tb, alloc, cell);
        // 2 ms slots at the common 1.92 Msps rate
        CHECK(wave.samples.size() % 3840 == 0);
        ChannelSpec spec;
        spec.snr_db = 4.0;
        spec.seed = 14;
        const auto rx = apply_channel(wave, spec);
        UlScheduleInfo info;
        info.tbs = 88;
        info.alloc = alloc;
        const auto res = decode_npusch_f1(rx, info, cell);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
    SUBCASE("Format 2 HARQ-ACK") {
        NpuschAllocation alloc;
        alloc.format = NpuschFormat::F2;
        alloc.tone_count = 1;
        alloc.tone_offset = 9;
        for (const int ack : {0, 1}) {
            const auto wave = build_npusch_f2(ack, alloc, cell);
            ChannelSpec spec;
            spec.snr_db = 0.0;
            spec.seed = 13 + ack;
            const auto rx = apply_channel(wave, spec);
            const auto [bit, metric] = decode_npusch_f2(rx, alloc, cell);
            CHECK(bit == ack);
            CHECK(metric > 0.5);
        }
    }
}

TEST_CASE("NPSS correlation peak dominates sidelobes within +-1 subframe") {
    // brute-force sweep of the full-rate NPSS block correlation
    const auto cell = CellConfig::standalone(11);
    const auto wave = downlink_capture(cell, 2);
    // reference: the clean NPSS span of a lone subframe
    ResourceGrid grid = make_subframe(SubframeRole::Npss, cell);
    const auto npss = generate_npss();
    std::vector<cplx> flat;
    for (const auto& row : npss.symbols) {
        flat.insert(flat.end(), row.begin(), row.end());
    }
    map_channel(grid, flat, ChannelKind::Npss, cell);
    const auto ref = serialize({&grid, 1}).samples;
    const long ref_lo = symbol_sample_offset(3);
    const long ref_len = kSamplesPerSubframe - ref_lo;

    double peak = 0, sidelobe = 0;
    for (long delta = -kSamplesPerSubframe; delta <= kSamplesPerSubframe; ++delta) {
        const long base = kNpssStart + delta + ref_lo;
        cplx acc(0, 0);
        for (long n = 0; n < ref_len; ++n) {
            const long idx = base + n;
            if (idx >= 0 && idx < static_cast<long>(wave.samples.size())) {
                acc += wave.samples[idx] * std::conj(ref[ref_lo + n]);
            }
        }
        const double m = std::abs(acc);
        // the 180 kHz signal has a ~10-sample wide correlation main lobe
        if (std::abs(delta) <= 16) {
            peak = std::max(peak, m);
        } else {
            sidelobe = std::max(sidelobe, m);
        }
    }
    CHECK(peak >= 3.0 * sidelobe);
}

TEST_CASE("single-hypothesis NPBCH: the true offset does at least as well as a wrong one") {
    const auto cell = CellConfig::inband(9, 10, 35, 2, 3);
    Mib mib;
    mib.mode = DeploymentMode::InBand;
    const auto tx = serialize(compose_frames(cell, mib, 0, 16));
    const double raster = raster_offset_hz(cell.deployment);
    int true_ok = 0, wrong_ok = 0;
    for (int t = 0; t < 6; ++t) {
        const double ppm = 4.0;
        ChannelSpec spec;
        spec.cfo_hz = compose_cfo_hz(ppm, 900e6, raster);
        spec.drift_ppm = ppm;
        spec.snr_db = -4.0;
        spec.seed = 400 + t;
        const auto rx = apply_channel(tx, spec);
        SyncResult sync;
        sync.detected = true;
        sync.sample_timing = kNpssStart;
        sync.nb_pcid = cell.nb_pcid;
        sync.frame_position_80ms = 0;
        sync.cfo_hz_estimate = spec.cfo_hz;
        true_ok += npbch_acquire(rx, sync, {{raster, true}}).acquired;
        wrong_ok += npbch_acquire(rx, sync, {{-raster, true}}).acquired;
    }
    CHECK(true_ok >= wrong_ok);
    CHECK(true_ok >= 5);
}
