#include "nbiot/phy_ul.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbiot/dsp.hpp"
#include "nbiot/phy_dl.hpp"

namespace nbiot {

void NpuschAllocation::validate() const {
    const bool khz15 = numerology.subcarrier_spacing_hz == 15000.0;
    const bool khz375 = numerology.subcarrier_spacing_hz == 3750.0;
    if (!khz15 && !khz375) {
        throw std::invalid_argument("uplink numerology must be 15 kHz or 3.75 kHz");
    }
    if (khz375 && tone_count != 1) {
        throw std::invalid_argument("3.75 kHz supports single-tone only");
    }
    if (khz15 && tone_count != 1 && tone_count != 3 && tone_count != 6 && tone_count != 12) {
        throw std::invalid_argument("15 kHz tone count must be 1, 3, 6 or 12");
    }
    const int max_tones = khz15 ? 12 : 48;
    if (tone_offset < 0 || tone_offset + tone_count > max_tones) {
        throw std::invalid_argument("tone allocation exceeds the carrier");
    }
    if (repetitions < 1 || repetitions > 128 || !std::has_single_bit(static_cast<unsigned>(repetitions))) {
        throw std::invalid_argument("repetitions must be a power of two up to 128");
    }
    if (format == NpuschFormat::F2 && tone_count != 1) {
        throw std::invalid_argument("NPUSCH Format 2 uses single-tone transmission only");
    }
}

namespace {

constexpr int kDataSymbolsF1 = 6;  // per slot, DMRS at symbol 3
constexpr int kDataSymbolsF2 = 4;  // per slot, DMRS at symbols 2..4
constexpr int kF2Slots = 4;

}  // namespace

const std::vector<int>& npusch_data_symbols(NpuschFormat format) {
    static const std::vector<int> f1 = {0, 1, 2, 4, 5, 6};
    static const std::vector<int> f2 = {0, 1, 5, 6};
    return format == NpuschFormat::F1 ? f1 : f2;
}

Modulation npusch_modulation(const NpuschAllocation& alloc) {
    if (alloc.format == NpuschFormat::F2) {
        return Modulation::Pi2Bpsk;
    }
    return alloc.single_tone() ? alloc.single_tone_modulation : Modulation::Qpsk;
}

int npusch_bits_per_slot(const NpuschAllocation& alloc) {
    if (alloc.format == NpuschFormat::F2) {
        return kDataSymbolsF2;  // pi/2-BPSK, single tone
    }
    return kDataSymbolsF1 * alloc.tone_count * bits_per_symbol(npusch_modulation(alloc));
}

int npusch_slots_for(int tbs, const NpuschAllocation& alloc) {
    const int info = tbs + kCrc24Bits;
    const int per_slot = npusch_bits_per_slot(alloc);
    // working code rate cap of 0.9
    int slots = static_cast<int>(std::ceil(info / (0.9 * per_slot)));
    slots = std::max(1, slots);
    if (alloc.numerology.subcarrier_spacing_hz == 15000.0 && slots % 2 != 0) {
        ++slots;  // whole subframes at 15 kHz
    }
    if (alloc.slots_override > 0) {
        if (alloc.slots_override < slots) {
            throw std::invalid_argument("slot override below the shortest allocation");
        }
        return alloc.slots_override;
    }
    return slots;
}

int npusch_f2_slots() { return kF2Slots; }

namespace {

struct UlSlotLayout {
    int fft_size;
    int cp_samples;       // per symbol (15 kHz: first symbol of slot differs)
    int slot_samples;
    int guard_samples;    // tail guard (3.75 kHz only)
};

UlSlotLayout layout_for(const Numerology& numerology) {
    if (numerology.subcarrier_spacing_hz == 15000.0) {
        return {kFftSize15k, kCpOtherSamples, kSamplesPerSlot15k, 0};
    }
    return {kFftSize3750, kCp3750Samples, 3840, kGuard3750Samples};
}

long ul_symbol_offset(const UlSlotLayout& lay, int symbol) {
    if (lay.fft_size == kFftSize15k) {
        return symbol_sample_offset(symbol % 7) % kSamplesPerSlot15k;
    }
    return static_cast<long>(symbol) * (lay.fft_size + lay.cp_samples);
}

int ul_symbol_cp(const UlSlotLayout& lay, int symbol) {
    if (lay.fft_size == kFftSize15k) {
        return symbol == 0 ? kCpFirstSamples : kCpOtherSamples;
    }
    return lay.cp_samples;
}

// Time-domain synthesis of one uplink OFDM symbol with CP into `out`.
void synth_symbol(std::vector<cplx>& out, long start, const UlSlotLayout& lay,
                  std::span<const cplx> bins_in, int cp) {
    std::vector<cplx> bins(bins_in.begin(), bins_in.end());
    dsp::fft_unitary(bins, true);
    for (int n = 0; n < cp; ++n) {
        out[start + n] = bins[lay.fft_size - cp + n];
    }
    for (int n = 0; n < lay.fft_size; ++n) {
        out[start + cp + n] = bins[n];
    }
}

int tone_to_bin(int tone, int fft_size) {
    const int half = fft_size == kFftSize15k ? 6 : 24;
    return (tone - half + fft_size) % fft_size;
}

void normalize_power(Waveform& wave) {
    const double p = dsp::mean_power(wave.samples);
    if (p > 0) {
        const double s = 1.0 / std::sqrt(p);
        for (auto& v : wave.samples) {
            v *= s;
        }
    }
}

Waveform build_npusch(const TransportBlock* tb, int ack_bit, const NpuschAllocation& alloc,
                      const CellConfig& cell) {
    alloc.validate();
    cell.validate();
    const auto lay = layout_for(alloc.numerology);
    const bool f2 = alloc.format == NpuschFormat::F2;
    const int slots = f2 ? kF2Slots : npusch_slots_for(tb->tbs, alloc);

    // coded + modulated payload for one transmission
    ModulatedSymbols mod;
    if (f2) {
        const auto coded = repetition_encode(ack_bit, kF2Slots * kDataSymbolsF2);
        mod = modulate(coded.bits, Modulation::Pi2Bpsk);
    } else {
        const auto coded = turbo_encode(*tb);
        const Bits rm = rate_match(coded, slots * npusch_bits_per_slot(alloc));
        const auto c = gold_sequence(static_cast<std::uint32_t>(cell.nb_pcid) + 0x400000u, rm.size());
        Bits scrambled(rm.size());
        for (std::size_t i = 0; i < rm.size(); ++i) {
            scrambled[i] = rm[i] ^ c[i];
        }
        mod = modulate(scrambled, npusch_modulation(alloc));
    }

    Waveform wave;
    wave.sample_rate_hz = kSampleRateHz;
    wave.samples.assign(static_cast<std::size_t>(lay.slot_samples) * slots * alloc.repetitions, cplx(0, 0));

    std::vector<cplx> bins(lay.fft_size);
    std::size_t sym_consumed = 0;
    for (int rep = 0; rep < alloc.repetitions; ++rep) {
        sym_consumed = 0;  // repetitions carry identical content
        for (int slot = 0; slot < slots; ++slot) {
            const long slot_start = (static_cast<long>(rep) * slots + slot) * lay.slot_samples;
            const auto dmrs = generate_dmrs(alloc.format, slot, cell.nb_pcid, alloc.tone_count);
            for (int sym = 0; sym < 7; ++sym) {
                std::fill(bins.begin(), bins.end(), cplx(0, 0));
                const auto dm = std::find(dmrs.symbol_indexes.begin(), dmrs.symbol_indexes.end(), sym);
                if (dm != dmrs.symbol_indexes.end()) {
                    const auto& vals = dmrs.values[static_cast<std::size_t>(dm - dmrs.symbol_indexes.begin())];
                    for (int t = 0; t < alloc.tone_count; ++t) {
                        bins[tone_to_bin(alloc.tone_offset + t, lay.fft_size)] = vals[t];
                    }
                } else {
                    // SC-FDMA: DFT-precode tone_count modulated symbols
                    std::vector<cplx> block(alloc.tone_count);
                    for (int t = 0; t < alloc.tone_count; ++t) {
                        block[t] = mod.symbols[sym_consumed++];
                    }
                    if (alloc.tone_count > 1) {
                        std::vector<cplx> precoded(alloc.tone_count, cplx(0, 0));
                        for (int q = 0; q < alloc.tone_count; ++q) {
                            for (int t = 0; t < alloc.tone_count; ++t) {
                                const double ang = -2.0 * std::numbers::pi * q * t / alloc.tone_count;
                                precoded[q] += block[t] * cplx(std::cos(ang), std::sin(ang));
                            }
                            precoded[q] /= std::sqrt(static_cast<double>(alloc.tone_count));
                        }
                        block = std::move(precoded);
                    }
                    for (int t = 0; t < alloc.tone_count; ++t) {
                        bins[tone_to_bin(alloc.tone_offset + t, lay.fft_size)] = block[t];
                    }
                }
                synth_symbol(wave.samples, slot_start + ul_symbol_offset(lay, sym), lay, bins,
                             ul_symbol_cp(lay, sym));
            }
        }
    }
    if (!f2 && sym_consumed != mod.symbols.size()) {
        throw std::logic_error("uplink symbol accounting mismatch");
    }
    normalize_power(wave);
    return wave;
}

}  // namespace

Waveform build_npusch_f1(const TransportBlock& tb, const NpuschAllocation& alloc, const CellConfig& cell) {
    if (alloc.format != NpuschFormat::F1) {
        throw std::invalid_argument("allocation is not Format 1");
    }
    if (tb.channel != Channel::NpuschF1 || tb.tbs > kMaxTbsNpusch) {
        throw std::invalid_argument("transport block is not a valid NPUSCH payload");
    }
    return build_npusch(&tb, 0, alloc, cell);
}

Waveform build_npusch_f2(int ack, const NpuschAllocation& alloc, const CellConfig& cell) {
    if (alloc.format != NpuschFormat::F2) {
        throw std::invalid_argument("allocation is not Format 2");
    }
    return build_npusch(nullptr, ack & 1, alloc, cell);
}

void NprachConfig::validate() const {
    if (format != 0 && format != 1) {
        throw std::invalid_argument("NPRACH format must be 0 or 1");
    }
    if (repetitions < 1 || repetitions > 128 || !std::has_single_bit(static_cast<unsigned>(repetitions))) {
        throw std::invalid_argument("NPRACH repetitions must be a power of two up to 128");
    }
    if (num_subcarriers != 12 && num_subcarriers != 24 && num_subcarriers != 36 && num_subcarriers != 48) {
        throw std::invalid_argument("NPRACH subcarrier count must be 12, 24, 36 or 48");
    }
    if (subcarrier_offset < 0 || subcarrier_offset + num_subcarriers > kNprachTones) {
        throw std::invalid_argument("NPRACH subcarriers exceed the 180 kHz carrier");
    }
    if (multitone_partition_boundary < 0 || multitone_partition_boundary > num_subcarriers) {
        throw std::invalid_argument("partition boundary outside the NPRACH subcarrier range");
    }
}

double nprach_tone_phase_step(int tone) {
    const double freq = (tone - kNprachTones / 2) * 3750.0;
    return 2.0 * std::numbers::pi * freq / kSampleRateHz;
}

double nprach_group_duration_s(const NprachConfig& config) {
    return (config.cp_samples() + kNprachSymbolsPerGroup * kNprachSymbolSamples) / kSampleRateHz;
}

double nprach_preamble_duration_s(const NprachConfig& config) {
    return kNprachGroupsPerPreamble * nprach_group_duration_s(config);
}

std::vector<int> nprach_hop_pattern(const NprachConfig& config, int start_subcarrier,
                                    std::uint32_t cell_seed) {
    config.validate();
    const int n = config.num_subcarriers;
    const int p0 = start_subcarrier - config.subcarrier_offset;
    if (p0 < 0 || p0 >= n) {
        throw std::invalid_argument("start subcarrier outside the configured NPRACH range");
    }
    // per-repetition even offset from the cell seed (unit 0 unshifted)
    const auto rnd = gold_sequence(cell_seed + 0x500000u, static_cast<std::size_t>(config.repetitions) * 8);
    std::vector<int> tones;
    tones.reserve(static_cast<std::size_t>(config.repetitions) * kNprachGroupsPerPreamble);
    for (int rep = 0; rep < config.repetitions; ++rep) {
        int delta = 0;
        if (rep > 0) {
            unsigned u = 0;
            for (int b = 0; b < 8; ++b) {
                u = (u << 1) | rnd[static_cast<std::size_t>(rep) * 8 + b];
            }
            delta = 2 * static_cast<int>(u % static_cast<unsigned>(n / 2));
        }
        const int p = (p0 + delta) % n;
        const int t0 = p;
        const int t1 = p ^ 1;
        const int base = t1 - t1 % 12;
        const int t2 = base + (t1 - base + 6) % 12;
        const int t3 = t2 ^ 1;
        for (const int t : {t0, t1, t2, t3}) {
            tones.push_back(config.subcarrier_offset + t);
        }
    }
    return tones;
}

std::pair<NprachPreamble, Waveform> build_nprach(const NprachConfig& config, int start_subcarrier,
                                                 std::uint32_t cell_seed) {
    NprachPreamble preamble;
    preamble.start_subcarrier = start_subcarrier;
    preamble.repetitions = config.repetitions;
    preamble.tone_indexes = nprach_hop_pattern(config, start_subcarrier, cell_seed);

    const int group_samples = config.cp_samples() + kNprachSymbolsPerGroup * kNprachSymbolSamples;
    Waveform wave;
    wave.sample_rate_hz = kSampleRateHz;
    wave.samples.resize(preamble.tone_indexes.size() * static_cast<std::size_t>(group_samples));

    // single tone, phase-continuous across the whole preamble; for a pure
    // tone the CP is simply more of the tone
    double phase = 0.0;
    std::size_t i = 0;
    for (const int tone : preamble.tone_indexes) {
        const double step = nprach_tone_phase_step(tone);
        for (int s = 0; s < group_samples; ++s) {
            wave.samples[i++] = std::polar(1.0, phase + step * s);
        }
        phase = std::fmod(phase + step * group_samples, 2.0 * std::numbers::pi);
    }
    return {std::move(preamble), std::move(wave)};
}

}  // namespace nbiot
