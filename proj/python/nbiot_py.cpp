#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nbiot/mac.hpp"
#include "nbiot/receiver.hpp"
#include "nbiot/sim.hpp"

namespace py = pybind11;
using namespace nbiot;

namespace {

py::array_t<std::complex<double>> to_array(const std::vector<cplx>& v) {
    py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<cplx> from_array(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

Waveform waveform_from(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a,
                       double sample_rate) {
    Waveform w;
    w.samples = from_array(a);
    w.sample_rate_hz = sample_rate;
    return w;
}

DeploymentMode mode_from(const std::string& name) {
    if (name == "standalone") {
        return DeploymentMode::StandAlone;
    }
    if (name == "inband") {
        return DeploymentMode::InBand;
    }
    if (name == "guardband") {
        return DeploymentMode::GuardBand;
    }
    throw std::invalid_argument("unknown deployment mode " + name);
}

}  // namespace

PYBIND11_MODULE(_nbiot, m) {
    m.doc() = "NB-IoT link-level simulator core";

    // ---- numerology ----
    m.def("anchor_prb_candidates", &anchor_prb_candidates, py::arg("lte_bandwidth_mhz"));
    m.def("prb_center_offset_hz", &prb_center_offset_hz, py::arg("lte_bandwidth_mhz"), py::arg("prb_index"));
    m.def(
        "raster_offset_hz",
        [](const std::string& mode, int bandwidth_mhz, int prb_index) {
            DeploymentConfig c;
            c.mode = mode_from(mode);
            c.lte_bandwidth_mhz = bandwidth_mhz;
            c.prb_index = prb_index;
            return raster_offset_hz(c);
        },
        py::arg("mode"), py::arg("lte_bandwidth_mhz") = 10, py::arg("prb_index") = 0);

    // ---- sequences ----
    m.def(
        "generate_zc",
        [](int length, int root) { return to_array(generate_zc(length, root).values); },
        py::arg("length"), py::arg("root"));
    m.def("generate_npss", [] {
        const auto npss = generate_npss();
        py::array_t<std::complex<double>> out({11, 11});
        auto r = out.mutable_unchecked<2>();
        for (int l = 0; l < 11; ++l) {
            for (int k = 0; k < 11; ++k) {
                r(l, k) = npss.symbols[l][k];
            }
        }
        return out;
    });
    m.def(
        "generate_nsss",
        [](int nb_pcid, int frame) { return to_array(generate_nsss(nb_pcid, frame).values); },
        py::arg("nb_pcid"), py::arg("frame_number") = 0);

    // ---- cell configuration ----
    py::class_<CellConfig>(m, "CellConfig")
        .def_static("standalone", &CellConfig::standalone, py::arg("nb_pcid"))
        .def_static("inband", &CellConfig::inband, py::arg("nb_pcid"), py::arg("lte_bandwidth_mhz"),
                    py::arg("prb_index"), py::arg("crs_ports") = 2, py::arg("pdcch_symbols") = 3)
        .def_readwrite("nb_pcid", &CellConfig::nb_pcid)
        .def_readwrite("lte_pcid", &CellConfig::lte_pcid)
        .def_readwrite("nrs_ports", &CellConfig::nrs_ports);

    // ---- coding ----
    m.def("crc24", [](const Bits& bits) { return crc24(bits); });
    m.def("tbcc_encode_bits", [](const Bits& bits) { return tbcc_encode_bits(bits); });
    m.def(
        "modulate",
        [](const Bits& bits, const std::string& scheme) {
            Modulation mod = scheme == "qpsk"      ? Modulation::Qpsk
                             : scheme == "pi2bpsk" ? Modulation::Pi2Bpsk
                                                   : Modulation::Pi4Qpsk;
            return to_array(modulate(bits, mod).symbols);
        },
        py::arg("bits"), py::arg("scheme") = "qpsk");

    // ---- downlink waveforms ----
    m.def(
        "downlink_frames",
        [](const CellConfig& cell, int frames, int start_frame) {
            Mib mib;
            mib.mode = cell.deployment.mode;
            return to_array(serialize(compose_frames(cell, mib, start_frame, frames)).samples);
        },
        py::arg("cell"), py::arg("frames") = 2, py::arg("start_frame") = 0,
        "OFDM baseband of NPBCH/NPSS/NSSS frames at 1.92 Msps");

    // ---- uplink waveforms ----
    m.def(
        "npusch_f1_waveform",
        [](const CellConfig& cell, int tbs, int tones, int tone_offset, int repetitions,
           const std::string& single_tone_mod, std::uint64_t seed) {
            NpuschAllocation alloc;
            alloc.tone_count = tones;
            alloc.tone_offset = tone_offset;
            alloc.repetitions = repetitions;
            alloc.single_tone_modulation =
                single_tone_mod == "pi2bpsk" ? Modulation::Pi2Bpsk : Modulation::Pi4Qpsk;
            const auto tb = random_transport_block(tbs, Channel::NpuschF1, seed);
            return to_array(build_npusch_f1(tb, alloc, cell).samples);
        },
        py::arg("cell"), py::arg("tbs") = 256, py::arg("tones") = 12, py::arg("tone_offset") = 0,
        py::arg("repetitions") = 1, py::arg("single_tone_modulation") = "pi4qpsk", py::arg("seed") = 1);

    py::class_<NprachConfig>(m, "NprachConfig")
        .def(py::init<>())
        .def_readwrite("format", &NprachConfig::format)
        .def_readwrite("repetitions", &NprachConfig::repetitions)
        .def_readwrite("subcarrier_offset", &NprachConfig::subcarrier_offset)
        .def_readwrite("num_subcarriers", &NprachConfig::num_subcarriers)
        .def_readwrite("multitone_partition_boundary", &NprachConfig::multitone_partition_boundary)
        .def("cp_length_s", &NprachConfig::cp_length_s)
        .def("preamble_duration_s", [](const NprachConfig& c) { return nprach_preamble_duration_s(c); });

    m.def(
        "nprach_waveform",
        [](const NprachConfig& cfg, int start_subcarrier, std::uint32_t cell_seed) {
            auto [preamble, wave] = build_nprach(cfg, start_subcarrier, cell_seed);
            return py::make_tuple(preamble.tone_indexes, to_array(wave.samples));
        },
        py::arg("config"), py::arg("start_subcarrier"), py::arg("cell_seed") = 0);

    // ---- channel ----
    m.def(
        "apply_channel",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           double snr_db, double cfo_hz, double delay_samples, double drift_ppm, double coupling_loss_db,
           std::uint64_t seed, double sample_rate) {
            ChannelSpec spec;
            spec.snr_db = snr_db;
            spec.cfo_hz = cfo_hz;
            spec.delay_samples = delay_samples;
            spec.drift_ppm = drift_ppm;
            spec.coupling_loss_db = coupling_loss_db;
            spec.seed = seed;
            return to_array(apply_channel(waveform_from(samples, sample_rate), spec).samples);
        },
        py::arg("samples"), py::arg("snr_db") = std::numeric_limits<double>::infinity(),
        py::arg("cfo_hz") = 0.0, py::arg("delay_samples") = 0.0, py::arg("drift_ppm") = 0.0,
        py::arg("coupling_loss_db") = 0.0, py::arg("seed") = 0, py::arg("sample_rate") = kSampleRateHz);
    m.def("drift_from_cfo", &drift_from_cfo, py::arg("cfo_hz"), py::arg("carrier_hz"), py::arg("duration_s"));
    m.def("compose_cfo_hz", &compose_cfo_hz, py::arg("oscillator_ppm"), py::arg("carrier_hz"),
          py::arg("raster_offset_hz") = 0.0);

    // ---- receiver ----
    py::class_<SyncResult>(m, "SyncResult")
        .def_readonly("detected", &SyncResult::detected)
        .def_readonly("sample_timing", &SyncResult::sample_timing)
        .def_readonly("cfo_hz_estimate", &SyncResult::cfo_hz_estimate)
        .def_readonly("metric_peak", &SyncResult::metric_peak)
        .def_readonly("accumulation_count", &SyncResult::accumulation_count);
    m.def(
        "npss_search",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           double lambda_weight, double threshold) {
            SyncConfig cfg;
            cfg.accumulation_weight = lambda_weight;
            if (threshold > 0) {
                cfg.detection_threshold = threshold;
            }
            NpssSearcher searcher(cfg);
            return searcher.search(waveform_from(samples, kSampleRateHz));
        },
        py::arg("samples"), py::arg("accumulation_weight") = 0.9, py::arg("threshold") = 0.0);
    m.def(
        "cell_search",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           int nsss_combine) {
            SyncConfig cfg;
            auto res = cell_search(waveform_from(samples, kSampleRateHz), cfg, nsss_combine);
            return py::make_tuple(res.detected, res.sample_timing, res.cfo_hz_estimate, res.nb_pcid,
                                  res.frame_position_80ms);
        },
        py::arg("samples"), py::arg("nsss_combine") = 4);
    m.def(
        "estimate_cfo",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           long timing) { return estimate_cfo(waveform_from(samples, kSampleRateHz), timing); },
        py::arg("samples"), py::arg("npss_timing"));
    m.def(
        "nsss_detect",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           long timing, double cfo_hz, int combine) {
            const auto det = nsss_detect(waveform_from(samples, kSampleRateHz), timing, cfo_hz, combine);
            return py::make_tuple(det.detected, det.nb_pcid, det.frame_position_80ms, det.metric);
        },
        py::arg("samples"), py::arg("npss_timing"), py::arg("cfo_hz") = 0.0, py::arg("combine") = 4);
    m.def(
        "nprach_detect",
        [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& samples,
           const NprachConfig& cfg, std::uint32_t cell_seed, double threshold) {
            py::list out;
            for (const auto& d : nprach_detect(waveform_from(samples, kSampleRateHz), cfg, cell_seed, threshold)) {
                out.append(py::make_tuple(d.start_subcarrier, d.timing_advance_s, d.metric));
            }
            return out;
        },
        py::arg("samples"), py::arg("config"), py::arg("cell_seed") = 0, py::arg("threshold") = 0.1);

    // ---- calculators ----
    m.def("peak_rate_bps", [](const std::string& dir) {
        return peak_rate_bps(dir == "dl" ? LinkDirection::Downlink : LinkDirection::Uplink);
    });
    m.def("link_budget_mcl_db", &link_budget_mcl_db, py::arg("tx_power_dbm"), py::arg("noise_figure_db"),
          py::arg("bandwidth_hz"), py::arg("required_snr_db"));

    // ---- scenario runner ----
    m.def(
        "run_scenario",
        [](const std::string& path, const std::string& out_dir) {
            const auto scenario = sim::Scenario::parse_file(path);
            std::ostringstream log;
            const int rc = sim::run_scenario(scenario, out_dir, log);
            return py::make_tuple(rc, log.str());
        },
        py::arg("scenario_path"), py::arg("out_dir"));

    m.attr("SAMPLE_RATE_HZ") = kSampleRateHz;
    m.attr("NPSS_SUBFRAME") = 5;
}
