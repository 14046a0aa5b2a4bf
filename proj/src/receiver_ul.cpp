#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbiot/dsp.hpp"
#include "nbiot/receiver.hpp"

namespace nbiot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNprachToneHz = 3750.0;

double wrap_pi(double x) {
    while (x > std::numbers::pi) {
        x -= kTwoPi;
    }
    while (x < -std::numbers::pi) {
        x += kTwoPi;
    }
    return x;
}

}  // namespace

std::vector<NprachDetection> nprach_detect(const Waveform& wave, const NprachConfig& config,
                                           std::uint32_t cell_seed, double threshold) {
    config.validate();
    const int group_samples = config.cp_samples() + kNprachSymbolsPerGroup * kNprachSymbolSamples;
    const int window_len = kNprachSymbolsPerGroup * kNprachSymbolSamples;
    const int total_groups = kNprachGroupsPerPreamble * config.repetitions;

    // received energy per group window (start-candidate independent)
    std::vector<double> window_energy(total_groups, 0.0);
    int usable_groups = 0;
    for (int g = 0; g < total_groups; ++g) {
        const long w0 = static_cast<long>(g) * group_samples + config.cp_samples();
        if (w0 + window_len > static_cast<long>(wave.samples.size())) {
            break;
        }
        usable_groups = g + 1;
        double e = 0;
        for (int n = 0; n < window_len; ++n) {
            e += std::norm(wave.samples[w0 + n]);
        }
        window_energy[g] = e;
    }
    if (usable_groups < kNprachGroupsPerPreamble) {
        return {};
    }

    std::vector<NprachDetection> detections;
    for (int start = config.subcarrier_offset; start < config.subcarrier_offset + config.num_subcarriers;
         ++start) {
        const auto tones = nprach_hop_pattern(config, start, cell_seed);
        // group correlations against the phase-continuous reference
        std::vector<cplx> z(usable_groups, cplx(0, 0));
        double phase = 0.0;
        for (int g = 0; g < usable_groups; ++g) {
            const double step = nprach_tone_phase_step(tones[g]);
            const long w0 = static_cast<long>(g) * group_samples + config.cp_samples();
            const double phase0 = phase + step * config.cp_samples();
            cplx acc(0, 0);
            for (int n = 0; n < window_len; ++n) {
                acc += wave.samples[w0 + n] * std::polar(1.0, -(phase0 + step * n));
            }
            z[g] = acc;
            phase = std::fmod(phase + step * group_samples, kTwoPi);
        }
        double num = 0, den = 0;
        for (int g = 0; g < usable_groups; ++g) {
            num += std::norm(z[g]);
            den += window_energy[g];
        }
        const double metric = den > 0 ? num / (den * window_len) : 0.0;
        if (metric < threshold) {
            continue;
        }

        // timing advance from inter-group phase differences; +-1 tone hops
        // give the coarse (unambiguous) estimate, the +-6 hop refines it
        const double coarse_range = 1.0 / kNprachToneHz;  // 266.7 us
        // estimates just below the wrap point are noise around zero unless
        // the CP budget really extends that far
        const double fold_limit = (config.cp_length_s() + coarse_range) / 2.0;
        double ta_acc = 0, weight_acc = 0;
        const int units = usable_groups / kNprachGroupsPerPreamble;
        for (int u = 0; u < units; ++u) {
            const int b = 4 * u;
            auto pair_tau = [&](int i, int j) {
                const int dtone = tones[b + j] - tones[b + i];
                const double dphi = wrap_pi(std::arg(z[b + j]) - std::arg(z[b + i]));
                double tau = -dphi / (kTwoPi * dtone * kNprachToneHz);
                while (tau < 0) {
                    tau += coarse_range / std::abs(dtone);
                }
                return tau;
            };
            const double t01 = pair_tau(0, 1);
            const double t23 = pair_tau(2, 3);
            // circular mean over the +-1 hop range
            const cplx mean_vec = std::polar(1.0, kTwoPi * t01 / coarse_range) +
                                  std::polar(1.0, kTwoPi * t23 / coarse_range);
            double tau = std::arg(mean_vec) / kTwoPi * coarse_range;
            if (tau < 0) {
                tau += coarse_range;
            }
            // refine with the +-6 hop (group 1 -> 2)
            const int dtone12 = tones[b + 2] - tones[b + 1];
            const double df12 = dtone12 * kNprachToneHz;
            const double expected = -kTwoPi * df12 * tau;
            const double measured = wrap_pi(std::arg(z[b + 2]) - std::arg(z[b + 1]));
            const double corr = wrap_pi(measured - expected) / (-kTwoPi * df12);
            tau += corr;
            if (tau > fold_limit) {
                tau -= coarse_range;
            }
            const double w = std::norm(z[b]) + std::norm(z[b + 1]) + std::norm(z[b + 2]) + std::norm(z[b + 3]);
            ta_acc += tau * w;
            weight_acc += w;
        }
        NprachDetection det;
        det.start_subcarrier = start;
        det.timing_advance_s = std::max(weight_acc > 0 ? ta_acc / weight_acc : 0.0, 0.0);
        det.metric = metric;
        detections.push_back(det);
    }
    std::sort(detections.begin(), detections.end(),
              [](const auto& a, const auto& b) { return a.metric > b.metric; });
    return detections;
}

namespace {

struct UlSymbols {
    // equalized data-symbol stream in transmit order plus noise estimate
    std::vector<cplx> data;
    double noise_var = 1.0;
    double channel_mag = 1.0;
};

int ul_fft_size(const NpuschAllocation& alloc) {
    return alloc.numerology.subcarrier_spacing_hz == 15000.0 ? kFftSize15k : kFftSize3750;
}

int ul_slot_samples(const NpuschAllocation& alloc) {
    return alloc.numerology.subcarrier_spacing_hz == 15000.0 ? kSamplesPerSlot15k : 3840;
}

long ul_sym_offset(const NpuschAllocation& alloc, int sym) {
    if (alloc.numerology.subcarrier_spacing_hz == 15000.0) {
        return symbol_sample_offset(sym) % kSamplesPerSlot15k;
    }
    return static_cast<long>(sym) * (kFftSize3750 + kCp3750Samples);
}

int ul_sym_cp(const NpuschAllocation& alloc, int sym) {
    if (alloc.numerology.subcarrier_spacing_hz == 15000.0) {
        return sym == 0 ? kCpFirstSamples : kCpOtherSamples;
    }
    return kCp3750Samples;
}

std::vector<cplx> ul_extract_tones(std::span<const cplx> slot_samples, const NpuschAllocation& alloc,
                                   int sym) {
    const int fft = ul_fft_size(alloc);
    const int half = fft == kFftSize15k ? 6 : 24;
    std::vector<cplx> bins(fft, cplx(0, 0));
    const long start = ul_sym_offset(alloc, sym) + ul_sym_cp(alloc, sym);
    for (int n = 0; n < fft; ++n) {
        const long idx = start + n;
        if (idx >= 0 && idx < static_cast<long>(slot_samples.size())) {
            bins[n] = slot_samples[idx];
        }
    }
    dsp::fft_unitary(bins, false);
    std::vector<cplx> out(alloc.tone_count);
    for (int t = 0; t < alloc.tone_count; ++t) {
        out[t] = bins[(alloc.tone_offset + t - half + fft) % fft];
    }
    return out;
}

UlSymbols ul_demodulate_grid(const Waveform& wave, const NpuschAllocation& alloc, const CellConfig& cell,
                             int slots, long first_sample) {
    const int slot_len = ul_slot_samples(alloc);
    const auto& data_syms = npusch_data_symbols(alloc.format);

    // chase-combine repetitions at slot level
    std::vector<std::vector<std::vector<cplx>>> tones(
        slots, std::vector<std::vector<cplx>>(7, std::vector<cplx>(alloc.tone_count, cplx(0, 0))));
    for (int rep = 0; rep < alloc.repetitions; ++rep) {
        for (int slot = 0; slot < slots; ++slot) {
            const long s0 = first_sample + (static_cast<long>(rep) * slots + slot) * slot_len;
            if (s0 < 0 || s0 + slot_len > static_cast<long>(wave.samples.size())) {
                throw std::invalid_argument("uplink transmission outside the capture");
            }
            const std::span<const cplx> slot_span(wave.samples.data() + s0, static_cast<std::size_t>(slot_len));
            for (int sym = 0; sym < 7; ++sym) {
                const auto vals = ul_extract_tones(slot_span, alloc, sym);
                for (int t = 0; t < alloc.tone_count; ++t) {
                    tones[slot][sym][t] += vals[t] / static_cast<double>(alloc.repetitions);
                }
            }
        }
    }

    // flat least-squares channel estimate over every DMRS element
    cplx h(0, 0);
    double h_norm = 0;
    for (int slot = 0; slot < slots; ++slot) {
        const auto dmrs = generate_dmrs(alloc.format, slot, cell.nb_pcid, alloc.tone_count);
        for (std::size_t s = 0; s < dmrs.symbol_indexes.size(); ++s) {
            for (int t = 0; t < alloc.tone_count; ++t) {
                h += tones[slot][dmrs.symbol_indexes[s]][t] * std::conj(dmrs.values[s][t]);
                h_norm += std::norm(dmrs.values[s][t]);
            }
        }
    }
    h /= std::max(h_norm, 1e-12);
    double noise = 0;
    int pilots = 0;
    for (int slot = 0; slot < slots; ++slot) {
        const auto dmrs = generate_dmrs(alloc.format, slot, cell.nb_pcid, alloc.tone_count);
        for (std::size_t s = 0; s < dmrs.symbol_indexes.size(); ++s) {
            for (int t = 0; t < alloc.tone_count; ++t) {
                noise += std::norm(tones[slot][dmrs.symbol_indexes[s]][t] - h * dmrs.values[s][t]);
                ++pilots;
            }
        }
    }

    UlSymbols out;
    out.channel_mag = std::max(std::abs(h), 1e-12);
    out.noise_var = std::max(noise / std::max(pilots, 1), 1e-12);
    const cplx eq = std::conj(h) / out.channel_mag;
    for (int slot = 0; slot < slots; ++slot) {
        for (const int sym : data_syms) {
            std::vector<cplx> block(alloc.tone_count);
            for (int t = 0; t < alloc.tone_count; ++t) {
                block[t] = tones[slot][sym][t] * eq;
            }
            if (alloc.tone_count > 1) {
                // undo the SC-FDMA DFT precoding
                std::vector<cplx> time(alloc.tone_count, cplx(0, 0));
                for (int t = 0; t < alloc.tone_count; ++t) {
                    for (int q = 0; q < alloc.tone_count; ++q) {
                        const double ang = kTwoPi * q * t / alloc.tone_count;
                        time[t] += block[q] * std::polar(1.0, ang);
                    }
                    time[t] /= std::sqrt(static_cast<double>(alloc.tone_count));
                }
                block = std::move(time);
            }
            out.data.insert(out.data.end(), block.begin(), block.end());
        }
    }
    return out;
}

}  // namespace

DecodeResult decode_npusch_f1(const Waveform& wave, const UlScheduleInfo& info, const CellConfig& cell) {
    info.alloc.validate();
    cell.validate();
    if (info.alloc.format != NpuschFormat::F1) {
        throw std::invalid_argument("allocation is not Format 1");
    }
    const int slots = npusch_slots_for(info.tbs, info.alloc);
    const auto grid = ul_demodulate_grid(wave, info.alloc, cell, slots, info.first_sample);
    auto llr = demodulate(grid.data, npusch_modulation(info.alloc), grid.noise_var / grid.channel_mag);
    const auto scr = gold_sequence(static_cast<std::uint32_t>(cell.nb_pcid) + 0x400000u, llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i) {
        if (scr[i]) {
            llr[i] = -llr[i];
        }
    }
    return turbo_decode(llr, info.tbs);
}

std::pair<int, double> decode_npusch_f2(const Waveform& wave, const NpuschAllocation& alloc,
                                        const CellConfig& cell, long first_sample) {
    alloc.validate();
    if (alloc.format != NpuschFormat::F2) {
        throw std::invalid_argument("allocation is not Format 2");
    }
    const auto grid = ul_demodulate_grid(wave, alloc, cell, npusch_f2_slots(), first_sample);
    const auto llr = demodulate(grid.data, Modulation::Pi2Bpsk, grid.noise_var / grid.channel_mag);
    const int bit = repetition_decode(llr);
    double num = 0, den = 0;
    for (const auto v : llr) {
        num += v;
        den += std::abs(v);
    }
    return {bit, den > 0 ? std::abs(num) / den : 0.0};
}

}  // namespace nbiot
