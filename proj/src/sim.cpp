#include "nbiot/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nbiot/channel.hpp"
#include "nbiot/mac.hpp"
#include "nbiot/receiver.hpp"

namespace nbiot::sim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Scenario Scenario::parse_text(const std::string& text) {
    Scenario out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::runtime_error("scenario line " + std::to_string(lineno) + ": malformed section");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("scenario line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty() || key.empty()) {
            throw std::runtime_error("scenario line " + std::to_string(lineno) + ": key outside a section");
        }
        out.values_[section + "." + key] = value;
    }
    return out;
}

Scenario Scenario::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open scenario file " + path);
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_text(buf.str());
}

std::string Scenario::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long Scenario::get_int(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stol(it->second);
}

double Scenario::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stod(it->second);
}

bool Scenario::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    return it->second == "true" || it->second == "1" || it->second == "yes";
}

std::vector<double> Scenario::get_list(const std::string& key, std::vector<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(trim(item)));
    }
    return out;
}

std::uint64_t Scenario::seed_base() const {
    if (const char* env = std::getenv("NBIOT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return static_cast<std::uint64_t>(get_int("scenario.seed_base", 1));
}

void parallel_trials(int count, const std::function<void(int)>& body) {
    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("NBIOT_THREADS")) {
        workers = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    workers = std::max(1u, std::min(workers, static_cast<unsigned>(count)));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                body(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

namespace {

namespace fs = std::filesystem;

struct Outputs {
    std::ofstream trials;
    std::ofstream summary;
    fs::path dir;
};

Outputs open_outputs(const std::string& out_dir) {
    Outputs o;
    o.dir = out_dir;
    fs::create_directories(o.dir);
    o.trials.open(o.dir / "trials.csv");
    o.summary.open(o.dir / "summary.csv");
    if (!o.trials || !o.summary) {
        throw std::runtime_error("cannot write into " + out_dir);
    }
    return o;
}

CellConfig cell_from(const Scenario& sc) {
    const std::string mode = sc.get_string("cell.mode", "standalone");
    const int pcid = static_cast<int>(sc.get_int("cell.nb_pcid", 17));
    CellConfig cell;
    if (mode == "standalone") {
        cell = CellConfig::standalone(pcid);
    } else if (mode == "inband") {
        cell = CellConfig::inband(pcid, static_cast<int>(sc.get_int("cell.bandwidth_mhz", 10)),
                                  static_cast<int>(sc.get_int("cell.prb_index", 30)),
                                  static_cast<int>(sc.get_int("cell.crs_ports", 2)),
                                  static_cast<int>(sc.get_int("cell.pdcch_symbols", 3)));
    } else if (mode == "guardband") {
        cell.nb_pcid = pcid;
        cell.lte_pcid = pcid;
        cell.deployment = {DeploymentMode::GuardBand,
                           static_cast<int>(sc.get_int("cell.bandwidth_mhz", 10)), 0, true};
        cell.lte_pdcch_symbols = 0;
        cell.validate();
    } else {
        throw std::runtime_error("unknown cell.mode " + mode);
    }
    cell.nrs_ports = static_cast<int>(sc.get_int("cell.nrs_ports", 1));
    return cell;
}

struct ChannelDraw {
    ChannelSpec spec;
    double cfo_true_hz = 0.0;
};

ChannelDraw channel_from(const Scenario& sc, const CellConfig& cell, double snr_db, std::uint64_t seed) {
    ChannelDraw out;
    const double carrier = sc.get_double("channel.carrier_hz", 900e6);
    double ppm = sc.get_double("channel.cfo_ppm", 0.0);
    if (sc.has("channel.cfo_ppm_max")) {
        std::mt19937_64 eng(seed ^ 0xC0FFEEull);
        const double lim = sc.get_double("channel.cfo_ppm_max", 0.0);
        ppm = std::uniform_real_distribution<double>(-lim, lim)(eng);
    }
    double raster = 0.0;
    if (sc.get_bool("channel.apply_raster_offset", false)) {
        raster = raster_offset_hz(cell.deployment);
    }
    out.cfo_true_hz = compose_cfo_hz(ppm, carrier, raster);
    out.spec.cfo_hz = out.cfo_true_hz;
    out.spec.drift_ppm = sc.get_bool("channel.drift_from_ppm", false) ? ppm : sc.get_double("channel.drift_ppm", 0.0);
    out.spec.delay_samples = sc.get_double("channel.delay_samples", 0.0);
    out.spec.coupling_loss_db = sc.get_double("channel.coupling_loss_db", 0.0);
    out.spec.snr_db = snr_db;
    out.spec.seed = seed;
    return out;
}

SyncConfig sync_config_from(const Scenario& sc) {
    SyncConfig cfg;
    cfg.carrier_hz = sc.get_double("channel.carrier_hz", 900e6);
    cfg.accumulation_weight = sc.get_double("sync.lambda", cfg.accumulation_weight);
    cfg.detection_threshold = sc.get_double("sync.threshold", cfg.detection_threshold);
    if (sc.has("sync.hypotheses_khz")) {
        cfg.cfo_hypotheses_hz.clear();
        for (const double k : sc.get_list("sync.hypotheses_khz")) {
            cfg.cfo_hypotheses_hz.push_back(k * 1e3);
        }
    }
    return cfg;
}

long wrap_timing_err(long detected, long truth) {
    long err = (detected - truth) % kSamplesPerFrame;
    if (err > kSamplesPerFrame / 2) {
        err -= kSamplesPerFrame;
    }
    if (err < -kSamplesPerFrame / 2) {
        err += kSamplesPerFrame;
    }
    return err;
}

// ---- sync ----

int run_sync(const Scenario& sc, Outputs& out, std::ostream& log) {
    const auto cell = cell_from(sc);
    const auto snrs = sc.get_list("channel.snr_db", {0.0});
    const int trials = sc.trials();
    const int segments = static_cast<int>(sc.get_int("sync.segments", 16));
    const bool noise_only = sc.get_bool("sync.noise_only", false);
    const auto sync_cfg = sync_config_from(sc);

    Mib mib;
    mib.mode = cell.deployment.mode;
    const auto tx = noise_only ? Waveform{std::vector<cplx>((segments + 1) * static_cast<std::size_t>(kSamplesPerFrame),
                                                            cplx(0, 0)),
                                          kSampleRateHz, 0.0}
                               : serialize(compose_frames(cell, mib, 0, segments + 1));

    out.trials << "snr_db,seed,detected,timing_err_samples,cfo_err_hz,pcid_ok,segments_used,metric\n";
    out.summary << "snr_db,trials,detected,detection_rate,mean_abs_timing_err,mean_abs_cfo_err,pcid_ok\n";
    for (std::size_t si = 0; si < snrs.size(); ++si) {
        const double snr = snrs[si];
        struct Row {
            bool detected = false;
            bool pcid_ok = false;
            long terr = 0;
            double ferr = 0;
            int segs = 0;
            double metric = 0;
            std::uint64_t seed = 0;
        };
        std::vector<Row> rows(trials);
        parallel_trials(trials, [&](int t) {
            const std::uint64_t seed = sc.seed_base() + static_cast<std::uint64_t>(t);
            const auto draw = channel_from(sc, cell, snr, seed);
            const auto rx = apply_channel(tx, draw.spec);
            NpssSearcher searcher(sync_cfg);
            const auto res = searcher.search(rx);
            Row r;
            r.seed = seed;
            r.detected = res.detected;
            r.segs = res.accumulation_count;
            r.metric = res.metric_peak;
            if (res.detected && !noise_only) {
                r.terr = wrap_timing_err(res.sample_timing,
                                         5L * kSamplesPerSubframe +
                                             static_cast<long>(std::lround(draw.spec.delay_samples)));
                const double cfo_est = estimate_cfo(rx, res.sample_timing, sync_cfg);
                r.ferr = cfo_est - draw.cfo_true_hz;
                const auto nsss = nsss_detect(rx, res.sample_timing, cfo_est);
                r.pcid_ok = nsss.detected && nsss.nb_pcid == cell.nb_pcid;
            }
            rows[t] = r;
        });
        int detected = 0, pcid_ok = 0;
        double terr_acc = 0, ferr_acc = 0;
        for (int t = 0; t < trials; ++t) {
            const auto& r = rows[t];
            out.trials << snr << ',' << r.seed << ',' << (r.detected ? 1 : 0) << ',' << r.terr << ','
                       << r.ferr << ',' << (r.pcid_ok ? 1 : 0) << ',' << r.segs << ',' << r.metric << '\n';
            if (r.detected) {
                ++detected;
                pcid_ok += r.pcid_ok;
                terr_acc += std::abs(static_cast<double>(r.terr));
                ferr_acc += std::abs(r.ferr);
            }
        }
        const double rate = static_cast<double>(detected) / trials;
        out.summary << snr << ',' << trials << ',' << detected << ',' << rate << ','
                    << (detected ? terr_acc / detected : 0.0) << ','
                    << (detected ? ferr_acc / detected : 0.0) << ',' << pcid_ok << '\n';
        log << "sync snr=" << snr << " dB: detection " << detected << "/" << trials << "\n";
    }
    return 0;
}

// ---- npbch ----

int run_npbch(const Scenario& sc, Outputs& out, std::ostream& log) {
    const auto cell = cell_from(sc);
    const auto snrs = sc.get_list("channel.snr_db", {20.0});
    const int trials = sc.trials();
    const int frames = static_cast<int>(sc.get_int("npbch.frames", 16));
    const auto sync_cfg = sync_config_from(sc);

    Mib mib;
    mib.sfn_msbs = 3;
    mib.mode = cell.deployment.mode;
    const auto tx = serialize(compose_frames(cell, mib, 0, frames));
    const double true_offset = sc.get_bool("channel.apply_raster_offset", false)
                                   ? raster_offset_hz(cell.deployment)
                                   : 0.0;

    out.trials << "snr_db,seed,acquired,true_offset_hz,won_offset_hz,offset_ok,mib_ok,windows_used\n";
    out.summary << "snr_db,trials,acquired,offset_ok,mib_ok\n";
    for (const double snr : snrs) {
        struct Row {
            bool acquired = false, offset_ok = false, mib_ok = false;
            double won = 0;
            int windows = 0;
            std::uint64_t seed = 0;
        };
        std::vector<Row> rows(trials);
        parallel_trials(trials, [&](int t) {
            const std::uint64_t seed = sc.seed_base() + static_cast<std::uint64_t>(t);
            const auto draw = channel_from(sc, cell, snr, seed);
            const auto rx = apply_channel(tx, draw.spec);
            SyncResult sync;
            sync.detected = true;
            sync.sample_timing = 5L * kSamplesPerSubframe;
            sync.nb_pcid = cell.nb_pcid;
            sync.frame_position_80ms = 0;
            sync.cfo_hz_estimate = estimate_cfo(rx, sync.sample_timing, sync_cfg);
            const auto res = npbch_acquire(rx, sync, default_raster_hypotheses(), sync_cfg);
            Row r;
            r.seed = seed;
            r.acquired = res.acquired;
            r.won = res.hypothesis.offset_hz;
            r.windows = res.windows_used;
            r.offset_ok = res.acquired && res.hypothesis.offset_hz == true_offset;
            r.mib_ok = res.acquired && res.mib == mib;
            rows[t] = r;
        });
        int acq = 0, offset_ok = 0, mib_ok = 0;
        for (int t = 0; t < trials; ++t) {
            const auto& r = rows[t];
            out.trials << snr << ',' << r.seed << ',' << (r.acquired ? 1 : 0) << ',' << true_offset << ','
                       << r.won << ',' << (r.offset_ok ? 1 : 0) << ',' << (r.mib_ok ? 1 : 0) << ','
                       << r.windows << '\n';
            acq += r.acquired;
            offset_ok += r.offset_ok;
            mib_ok += r.mib_ok;
        }
        out.summary << snr << ',' << trials << ',' << acq << ',' << offset_ok << ',' << mib_ok << '\n';
        log << "npbch snr=" << snr << ": acquired " << acq << "/" << trials << ", true offset "
            << offset_ok << "\n";
    }
    return 0;
}

// ---- nprach ----

int run_nprach(const Scenario& sc, Outputs& out, std::ostream& log) {
    NprachConfig cfg;
    cfg.format = static_cast<int>(sc.get_int("nprach.format", 0));
    cfg.repetitions = static_cast<int>(sc.get_int("nprach.repetitions", 4));
    cfg.num_subcarriers = static_cast<int>(sc.get_int("nprach.subcarriers", 12));
    cfg.subcarrier_offset = static_cast<int>(sc.get_int("nprach.offset", 0));
    cfg.multitone_partition_boundary = static_cast<int>(sc.get_int("nprach.boundary", 6));
    cfg.validate();
    const std::uint32_t cell_seed = static_cast<std::uint32_t>(sc.get_int("cell.nb_pcid", 17));
    const auto snrs = sc.get_list("channel.snr_db", {10.0});
    const int trials = sc.trials();
    const double max_delay_us = sc.get_double("nprach.max_delay_us", 0.0);

    out.trials << "snr_db,seed,true_start,delay_us,detected,est_start,start_ok,ta_err_us,extra\n";
    out.summary << "snr_db,trials,detected,start_ok,mean_abs_ta_err_us,extra_detections\n";
    for (const double snr : snrs) {
        struct Row {
            std::uint64_t seed = 0;
            int true_start = 0, est_start = -1, extra = 0;
            double delay_us = 0, ta_err_us = 0;
            bool detected = false, start_ok = false;
        };
        std::vector<Row> rows(trials);
        parallel_trials(trials, [&](int t) {
            const std::uint64_t seed = sc.seed_base() + static_cast<std::uint64_t>(t);
            std::mt19937_64 eng(seed ^ 0xABCDull);
            Row r;
            r.seed = seed;
            r.true_start = cfg.subcarrier_offset + static_cast<int>(eng() % static_cast<unsigned>(cfg.num_subcarriers));
            r.delay_us = max_delay_us > 0 ? std::uniform_real_distribution<double>(0, max_delay_us)(eng) : 0.0;
            const auto [pre, wave] = build_nprach(cfg, r.true_start, cell_seed);
            ChannelSpec spec;
            spec.snr_db = snr;
            spec.seed = seed;
            spec.delay_samples = r.delay_us * 1e-6 * kSampleRateHz;
            const auto rx = apply_channel(wave, spec);
            const auto dets = nprach_detect(rx, cfg, cell_seed);
            r.detected = !dets.empty();
            if (r.detected) {
                r.est_start = dets[0].start_subcarrier;
                r.start_ok = r.est_start == r.true_start;
                r.ta_err_us = dets[0].timing_advance_s * 1e6 - r.delay_us;
                r.extra = static_cast<int>(dets.size()) - 1;
            }
            rows[t] = r;
        });
        int det = 0, ok = 0, extra = 0;
        double ta_acc = 0;
        for (int t = 0; t < trials; ++t) {
            const auto& r = rows[t];
            out.trials << snr << ',' << r.seed << ',' << r.true_start << ',' << r.delay_us << ','
                       << (r.detected ? 1 : 0) << ',' << r.est_start << ',' << (r.start_ok ? 1 : 0) << ','
                       << r.ta_err_us << ',' << r.extra << '\n';
            det += r.detected;
            ok += r.start_ok;
            extra += r.extra;
            if (r.start_ok) {
                ta_acc += std::abs(r.ta_err_us);
            }
        }
        out.summary << snr << ',' << trials << ',' << det << ',' << ok << ','
                    << (ok ? ta_acc / ok : 0.0) << ',' << extra << '\n';
        log << "nprach snr=" << snr << ": start ok " << ok << "/" << trials << "\n";
    }
    return 0;
}

// ---- link level (downlink / uplink) ----

int run_link(const Scenario& sc, Outputs& out, std::ostream& log, bool downlink) {
    const auto cell = cell_from(sc);
    const auto snrs = sc.get_list("channel.snr_db", {0.0});
    auto reps_list = sc.get_list("link.repetitions", {1});
    const int trials = sc.trials();
    const int tbs = static_cast<int>(sc.get_int("link.tbs", 120));

    NpuschAllocation alloc;
    if (!downlink) {
        if (sc.get_double("link.subcarrier_khz", 15.0) == 3.75) {
            alloc.numerology = Numerology::khz3750();
        }
        alloc.tone_count = static_cast<int>(sc.get_int("link.tones", 12));
        alloc.tone_offset = static_cast<int>(sc.get_int("link.tone_offset", 0));
        alloc.slots_override = static_cast<int>(sc.get_int("link.slots", 0));
        const std::string mod = sc.get_string("link.modulation", "pi4qpsk");
        alloc.single_tone_modulation = mod == "pi2bpsk" ? Modulation::Pi2Bpsk : Modulation::Pi4Qpsk;
    }

    out.trials << "snr_db,repetitions,seed,crc_ok,payload_ok\n";
    out.summary << "snr_db,repetitions,trials,errors,bler\n";
    for (const double rep_d : reps_list) {
        const int rep = static_cast<int>(rep_d);
        // transmit side is deterministic per (tbs, rep, seed)
        for (const double snr : snrs) {
            std::vector<std::uint8_t> ok(trials, 0);
            std::vector<std::uint64_t> seeds(trials);
            parallel_trials(trials, [&](int t) {
                const std::uint64_t seed = sc.seed_base() + static_cast<std::uint64_t>(t);
                seeds[t] = seed;
                ChannelSpec spec;
                spec.snr_db = snr;
                spec.seed = seed;
                if (downlink) {
                    const auto tb = random_transport_block(tbs, Channel::Npdsch, seed);
                    NpdschConfig cfg;
                    cfg.tbs = tbs;
                    cfg.repetitions = rep;
                    const auto grids = build_npdsch(tb, cfg, cell);
                    const int nsf = npdsch_subframes_for(tbs, cell);
                    // data subframes back-to-back: the noise level then refers
                    // to the occupied carrier independent of the repetitions
                    const auto tx = serialize(grids);
                    DlScheduleInfo info;
                    info.tbs = tbs;
                    info.repetitions = rep;
                    info.subframes_per_rep = nsf;
                    for (long sf = 0; sf < static_cast<long>(nsf) * rep; ++sf) {
                        info.data_subframes.push_back(sf);
                    }
                    const auto rx = apply_channel(tx, spec);
                    const auto res = decode_npdsch(rx, info, cell);
                    ok[t] = res.crc_ok && res.tb.payload_bits == tb.payload_bits;
                } else {
                    auto a = alloc;
                    a.repetitions = rep;
                    const auto tb = random_transport_block(tbs, Channel::NpuschF1, seed);
                    const auto tx = build_npusch_f1(tb, a, cell);
                    const auto rx = apply_channel(tx, spec);
                    UlScheduleInfo info;
                    info.tbs = tbs;
                    info.alloc = a;
                    const auto res = decode_npusch_f1(rx, info, cell);
                    ok[t] = res.crc_ok && res.tb.payload_bits == tb.payload_bits;
                }
            });
            int errors = 0;
            for (int t = 0; t < trials; ++t) {
                out.trials << snr << ',' << rep << ',' << seeds[t] << ',' << static_cast<int>(ok[t]) << ','
                           << static_cast<int>(ok[t]) << '\n';
                errors += ok[t] ? 0 : 1;
            }
            out.summary << snr << ',' << rep << ',' << trials << ',' << errors << ','
                        << static_cast<double>(errors) / trials << '\n';
            log << (downlink ? "link_dl" : "link_ul") << " snr=" << snr << " rep=" << rep << ": bler "
                << static_cast<double>(errors) / trials << "\n";
        }
    }
    return 0;
}

// ---- random access ----

int run_random_access_scenario(const Scenario& sc, Outputs& out, std::ostream& log) {
    RaSimConfig cfg;
    const int levels = static_cast<int>(sc.get_int("ra.levels", 3));
    for (int i = 0; i < levels; ++i) {
        CoverageClass c;
        c.level = i;
        c.rsrp_threshold_dbm = -100.0 - 10.0 * i;
        c.nprach.repetitions = 1 << (2 * i);
        c.nprach.num_subcarriers = static_cast<int>(sc.get_int("nprach.subcarriers", 12));
        c.nprach.subcarrier_offset =
            static_cast<int>(sc.get_int("nprach.offset", 0)) + 12 * (i % (48 / 12));
        c.nprach.multitone_partition_boundary = static_cast<int>(sc.get_int("nprach.boundary", 6));
        cfg.classes.push_back(c);
    }
    cfg.max_attempts = static_cast<int>(sc.get_int("ra.max_attempts", 10));
    const int n_ues = static_cast<int>(sc.get_int("ra.ues", 2));
    const double mt_fraction = sc.get_double("ra.multitone_fraction", 0.5);
    const int trials = sc.trials();

    out.trials << "seed,ue,level,attempts,resolved,capability_ok\n";
    out.summary << "trials,ues,resolved_rate,mean_attempts,capability_ok_rate\n";
    std::ofstream events(out.dir / "events.csv");
    events << "time_ms,ue_id,event,detail\n";

    long resolved = 0, capability_ok = 0;
    double attempts_acc = 0;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = sc.seed_base() + static_cast<std::uint64_t>(t);
        std::mt19937_64 eng(seed);
        std::vector<RaUeConfig> ues;
        for (int u = 0; u < n_ues; ++u) {
            RaUeConfig ue;
            ue.id = u;
            ue.rsrp_dbm = -92.0 - static_cast<double>(eng() % 30);
            ue.multitone_capable = std::uniform_real_distribution<double>(0, 1)(eng) < mt_fraction;
            ues.push_back(ue);
        }
        auto cfg_t = cfg;
        cfg_t.seed = seed;
        const auto res = run_random_access(cfg_t, ues);
        for (std::size_t u = 0; u < ues.size(); ++u) {
            const auto& o = res.ues[u];
            const bool cap_ok = o.network_inferred_multitone == ues[u].multitone_capable;
            out.trials << seed << ',' << o.id << ',' << o.coverage_level << ',' << o.attempts << ','
                       << (o.step == RaStep::Resolved ? 1 : 0) << ',' << (cap_ok ? 1 : 0) << '\n';
            resolved += o.step == RaStep::Resolved;
            capability_ok += cap_ok;
            attempts_acc += o.attempts;
        }
        if (t == 0) {
            for (const auto& e : res.events) {
                std::string detail = e.detail;
                std::replace(detail.begin(), detail.end(), ',', ';');
                events << e.time_ms << ',' << e.ue_id << ',' << e.event << ',' << detail << '\n';
            }
        }
    }
    const long total = static_cast<long>(trials) * n_ues;
    out.summary << trials << ',' << n_ues << ',' << static_cast<double>(resolved) / total << ','
                << attempts_acc / total << ',' << static_cast<double>(capability_ok) / total << '\n';
    log << "random_access: resolved " << resolved << "/" << total << "\n";
    return 0;
}

// ---- timeline ----

int run_timeline(const Scenario& sc, Outputs& out, std::ostream& log) {
    const int steps = sc.trials();
    std::mt19937_64 eng(sc.seed_base());
    ScheduleTimeline tl;
    long clock = 1;
    std::map<std::string, long> counts;
    out.trials << "step,direction,accepted,reason\n";
    for (int i = 0; i < steps; ++i) {
        const bool dl = eng() % 2 == 0;
        ScheduleResult r;
        if (dl) {
            DlGrant g;
            g.npdcch_start = clock + static_cast<long>(eng() % 20);
            g.data_offset = static_cast<int>(eng() % 16);
            g.data_subframes = 1 + static_cast<int>(eng() % 3);
            g.data_repetitions = 1 << (eng() % 3);
            g.ack_offset = static_cast<int>(8 + eng() % 10);
            r = tl.schedule_dl(g);
        } else {
            UlGrant g;
            g.npdcch_start = clock + static_cast<long>(eng() % 20);
            g.data_offset = static_cast<int>(eng() % 16);
            g.data_subframes = 1 + static_cast<int>(eng() % 4);
            r = tl.schedule_ul(g);
        }
        out.trials << i << ',' << (dl ? "dl" : "ul") << ',' << (r.accepted ? 1 : 0) << ','
                   << reject_reason_name(r.reason) << '\n';
        counts[r.accepted ? "accepted" : reject_reason_name(r.reason)]++;
        clock += eng() % 8;
    }
    out.summary << "outcome,count\n";
    for (const auto& [k, v] : counts) {
        out.summary << k << ',' << v << '\n';
    }
    log << "timeline: " << counts["accepted"] << "/" << steps << " accepted\n";
    return 0;
}

}  // namespace

int run_scenario(const Scenario& scenario, const std::string& out_dir, std::ostream& log) {
    auto outputs = open_outputs(out_dir);
    const std::string kind = scenario.kind();
    log << "scenario '" << scenario.name() << "' kind=" << kind << " trials=" << scenario.trials() << "\n";
    if (kind == "sync") {
        return run_sync(scenario, outputs, log);
    }
    if (kind == "npbch") {
        return run_npbch(scenario, outputs, log);
    }
    if (kind == "nprach") {
        return run_nprach(scenario, outputs, log);
    }
    if (kind == "link_dl") {
        return run_link(scenario, outputs, log, true);
    }
    if (kind == "link_ul") {
        return run_link(scenario, outputs, log, false);
    }
    if (kind == "random_access") {
        return run_random_access_scenario(scenario, outputs, log);
    }
    if (kind == "timeline") {
        return run_timeline(scenario, outputs, log);
    }
    throw std::runtime_error("unknown scenario kind '" + kind + "'");
}

}  // namespace nbiot::sim
