#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "nbiot/mac.hpp"
#include "nbiot/receiver.hpp"
#include "nbiot/sim.hpp"
#include "nbiot/waveform.hpp"

namespace fs = std::filesystem;
using namespace nbiot;

namespace {

std::ofstream open_csv(const std::string& out_dir, const std::string& name) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / name);
    if (!f) {
        throw std::runtime_error("cannot write " + name + " into " + out_dir);
    }
    return f;
}

int cmd_anchor_scan(int bw, const std::string& out_dir) {
    const int n = prb_count(bw);  // throws for unsupported bandwidths
    const auto anchors = anchor_prb_candidates(bw);
    std::ostringstream table;
    table << "prb_index,center_offset_hz,raster_distance_hz,anchor_ok\n";
    for (int i = 0; i < n; ++i) {
        const double center = prb_center_offset_hz(bw, i);
        const bool ok = std::find(anchors.begin(), anchors.end(), i) != anchors.end();
        table << i << ',' << center << ',' << distance_to_raster_hz(center) << ',' << (ok ? 1 : 0)
              << '\n';
    }
    std::cout << "anchor candidates for " << bw << " MHz:";
    for (const int a : anchors) {
        std::cout << ' ' << a;
    }
    std::cout << "\n" << table.str();
    if (!out_dir.empty()) {
        open_csv(out_dir, "anchor_scan.csv") << table.str();
    }
    return 0;
}

int cmd_rates(const std::string& out_dir) {
    std::ostringstream table;
    table << "direction,tbs,tx_subframes,repetitions,peak_kbps,sustained_kbps\n";
    const double dl_peak = peak_rate_bps(LinkDirection::Downlink) / 1e3;
    const double ul_peak = peak_rate_bps(LinkDirection::Uplink) / 1e3;
    RateGaps dl_gaps;
    RateGaps ul_gaps;
    ul_gaps.dci_to_data = kMinUlDataOffset;
    for (const int rep : {1, 2, 4, 8}) {
        table << "dl,680,3," << rep << ',' << dl_peak << ','
              << sustained_rate_bps(LinkDirection::Downlink, 680, 3, rep, dl_gaps) / 1e3 << '\n';
    }
    for (const int rep : {1, 2, 4, 8}) {
        table << "ul,1000,4," << rep << ',' << ul_peak << ','
              << sustained_rate_bps(LinkDirection::Uplink, 1000, 4, rep, ul_gaps) / 1e3 << '\n';
    }
    std::cout << "peak layer-1 rates: DL " << std::fixed << std::setprecision(1) << dl_peak
              << " kbps, UL " << ul_peak << " kbps\n"
              << std::defaultfloat << std::setprecision(6) << table.str();
    if (!out_dir.empty()) {
        open_csv(out_dir, "rates.csv") << table.str();
    }
    return 0;
}

int cmd_linkbudget(double tx_dbm, double nf_db, double bw_hz, double snr_db, bool deep,
                   const std::string& out_dir) {
    std::ostringstream table;
    table << "tx_power_dbm,noise_figure_db,bandwidth_hz,required_snr_db,mcl_db\n";
    auto emit = [&](double p, double nf, double bw, double snr) {
        const double mcl = link_budget_mcl_db(p, nf, bw, snr);
        table << p << ',' << nf << ',' << bw << ',' << snr << ',' << mcl << '\n';
        return mcl;
    };
    const double mcl = emit(tx_dbm, nf_db, bw_hz, snr_db);
    std::cout << "MCL = " << mcl << " dB\n";
    if (deep) {
        const auto& e = kDeepCoverageUplink;
        const double deep_mcl = emit(e.tx_power_dbm, e.noise_figure_db, e.bandwidth_hz, e.required_snr_db);
        std::cout << "deep-coverage single-tone entry (TBS " << e.tbs << ", " << e.repetitions
                  << " repetitions, required SNR " << e.required_snr_db << " dB): " << deep_mcl
                  << " dB\n";
    }
    if (!out_dir.empty()) {
        open_csv(out_dir, "linkbudget.csv") << table.str();
    }
    return 0;
}

int cmd_nprach_info(int format, int reps, int subcarriers, int offset, int boundary, int start,
                    const std::string& out_dir) {
    NprachConfig cfg;
    cfg.format = format;
    cfg.repetitions = reps;
    cfg.num_subcarriers = subcarriers;
    cfg.subcarrier_offset = offset;
    cfg.multitone_partition_boundary = boundary;
    cfg.validate();
    std::cout << "format " << cfg.format << ": CP " << cfg.cp_length_s() * 1e6 << " us, symbol group "
              << nprach_group_duration_s(cfg) * 1e3 << " ms, basic preamble "
              << nprach_preamble_duration_s(cfg) * 1e3 << " ms, total "
              << nprach_preamble_duration_s(cfg) * 1e3 * cfg.repetitions << " ms over " << cfg.repetitions
              << " repetitions\n";
    const auto tones = nprach_hop_pattern(cfg, start, 0);
    std::ostringstream table;
    table << "group,tone_index\n";
    for (std::size_t g = 0; g < tones.size(); ++g) {
        table << g << ',' << tones[g] << '\n';
    }
    std::cout << "hop pattern from subcarrier " << start << " (first unit):";
    for (int g = 0; g < 4; ++g) {
        std::cout << ' ' << tones[g];
    }
    std::cout << '\n';
    if (!out_dir.empty()) {
        open_csv(out_dir, "nprach_hops.csv") << table.str();
    }
    return 0;
}

int cmd_grid_dump(const std::string& mode, int pcid, int bw, int prb, const std::string& out_dir) {
    CellConfig cell = mode == "inband" ? CellConfig::inband(pcid, bw, prb) : CellConfig::standalone(pcid);
    Mib mib;
    mib.mode = cell.deployment.mode;
    const auto frames = compose_frames(cell, mib, 0, 2);
    const fs::path dir = out_dir.empty() ? "." : out_dir;
    fs::create_directories(dir);
    dump_grid_csv((dir / "grid.csv").string(), frames);
    Waveform wave = serialize(frames);
    wave.carrier_offset_hz = raster_offset_hz(cell.deployment);
    write_iq((dir / "frames.iq").string(), wave);
    const auto npss = generate_npss();
    std::vector<cplx> flat;
    for (const auto& row : npss.symbols) {
        flat.insert(flat.end(), row.begin(), row.end());
    }
    export_sequence_csv((dir / "npss.csv").string(), flat);
    export_sequence_csv((dir / "nsss.csv").string(), generate_nsss(cell.nb_pcid, 0).values);
    std::cout << "wrote " << frames.size() << " subframes to grid.csv, frames.iq, npss.csv, nsss.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NB-IoT link-level simulator and calculators"};
    app.require_subcommand(1);

    std::string out_dir;
    app.add_option("--out", out_dir, "output directory for CSV files");

    auto* anchor = app.add_subcommand("anchor-scan", "anchor PRB candidates for an LTE bandwidth");
    int bw = 10;
    anchor->add_option("--bw", bw, "LTE bandwidth in MHz")->required();

    auto* rates = app.add_subcommand("rates", "peak and sustained layer-1 rates");
    (void)rates;

    auto* lb = app.add_subcommand("linkbudget", "maximum coupling loss calculator");
    double tx_dbm = 23.0, nf_db = 5.0, bw_hz = 15e3, snr_db = -11.8;
    bool deep = false;
    lb->add_option("--tx-power", tx_dbm, "transmit power in dBm");
    lb->add_option("--nf", nf_db, "receiver noise figure in dB");
    lb->add_option("--bw", bw_hz, "occupied bandwidth in Hz");
    lb->add_option("--snr", snr_db, "required SNR in dB");
    lb->add_flag("--deep-coverage", deep, "also print the 128-repetition single-tone entry");

    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo scenario file");
    std::string scenario_path;
    simulate->add_option("scenario", scenario_path, "scenario file")->required();

    auto* nprach = app.add_subcommand("nprach-info", "NPRACH timing and hop pattern");
    int format = 0, reps = 4, subcarriers = 12, offset = 0, boundary = 6, start = 0;
    nprach->add_option("--format", format, "preamble format (0 or 1)");
    nprach->add_option("--reps", reps, "repetitions");
    nprach->add_option("--subcarriers", subcarriers, "allocated 3.75 kHz tones");
    nprach->add_option("--offset", offset, "subcarrier offset");
    nprach->add_option("--boundary", boundary, "multi-tone capability partition boundary");
    nprach->add_option("--start", start, "example start subcarrier");

    auto* grid = app.add_subcommand("grid-dump", "dump two frames of resource grids as CSV");
    std::string mode = "standalone";
    int pcid = 17, gbw = 10, prb = 30;
    grid->add_option("--mode", mode, "standalone or inband");
    grid->add_option("--pcid", pcid, "NB-PCID");
    grid->add_option("--bw", gbw, "LTE bandwidth (in-band)");
    grid->add_option("--prb", prb, "PRB index (in-band)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (anchor->parsed()) {
            return cmd_anchor_scan(bw, out_dir);
        }
        if (rates->parsed()) {
            return cmd_rates(out_dir);
        }
        if (lb->parsed()) {
            return cmd_linkbudget(tx_dbm, nf_db, bw_hz, snr_db, deep, out_dir);
        }
        if (simulate->parsed()) {
            sim::Scenario scenario;
            try {
                scenario = sim::Scenario::parse_file(scenario_path);
            } catch (const std::exception& e) {
                std::cerr << "scenario error: " << e.what() << "\n";
                return 2;
            }
            return sim::run_scenario(scenario, out_dir.empty() ? "." : out_dir, std::cout);
        }
        if (nprach->parsed()) {
            return cmd_nprach_info(format, reps, subcarriers, offset, boundary, start, out_dir);
        }
        if (grid->parsed()) {
            return cmd_grid_dump(mode, pcid, gbw, prb, out_dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
