#include "nbiot/phy_dl.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "nbiot/dsp.hpp"

namespace nbiot {

const std::vector<int> kDlTimeOffsets = {4, 8, 16, 32, 64};
const std::vector<int> kUlTimeOffsets = {8, 16, 32, 64};
const std::vector<int> kDlTbsLadder = {16, 24, 32, 56, 88, 120, 256, 328, 440, 680};
const std::vector<int> kUlTbsLadder = {16, 24, 32, 56, 88, 120, 256, 328, 440, 680, 1000};

namespace {

void pack_bits(Bits& out, std::uint32_t value, int width) {
    for (int i = width - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
    }
}

std::uint32_t unpack_bits(std::span<const std::uint8_t> bits, std::size_t& pos, int width) {
    std::uint32_t v = 0;
    for (int i = 0; i < width; ++i) {
        v = (v << 1) | (bits[pos++] & 1u);
    }
    return v;
}

}  // namespace

Bits Mib::payload_bits() const {
    Bits out;
    out.reserve(kMibBits);
    pack_bits(out, static_cast<std::uint32_t>(sfn_msbs), 4);
    pack_bits(out, static_cast<std::uint32_t>(mode), 2);
    pack_bits(out, scheduling_stub, 28);
    return out;
}

Mib Mib::from_bits(std::span<const std::uint8_t> bits) {
    if (bits.size() < kMibBits) {
        throw std::invalid_argument("MIB payload must be 34 bits");
    }
    Mib mib;
    std::size_t pos = 0;
    mib.sfn_msbs = static_cast<int>(unpack_bits(bits, pos, 4));
    mib.mode = static_cast<DeploymentMode>(unpack_bits(bits, pos, 2));
    mib.scheduling_stub = unpack_bits(bits, pos, 28);
    return mib;
}

Bits Dci::encode() const {
    Bits out;
    out.reserve(kDciBits);
    pack_bits(out, direction == DciDirection::Uplink ? 1u : 0u, 1);
    pack_bits(out, static_cast<std::uint32_t>(tbs_index), 4);
    pack_bits(out, static_cast<std::uint32_t>(repetition_exp), 4);
    pack_bits(out, static_cast<std::uint32_t>(time_offset_index), 3);
    pack_bits(out, static_cast<std::uint32_t>(subcarrier_alloc), 8);
    pack_bits(out, static_cast<std::uint32_t>(harq_ack_resource), 2);
    pack_bits(out, static_cast<std::uint32_t>(new_data), 1);
    return out;
}

Dci Dci::decode(std::span<const std::uint8_t> bits) {
    if (bits.size() < kDciBits) {
        throw std::invalid_argument("DCI must be 23 bits");
    }
    Dci dci;
    std::size_t pos = 0;
    dci.direction = unpack_bits(bits, pos, 1) ? DciDirection::Uplink : DciDirection::Downlink;
    dci.tbs_index = static_cast<int>(unpack_bits(bits, pos, 4));
    dci.repetition_exp = static_cast<int>(unpack_bits(bits, pos, 4));
    dci.time_offset_index = static_cast<int>(unpack_bits(bits, pos, 3));
    dci.subcarrier_alloc = static_cast<int>(unpack_bits(bits, pos, 8));
    dci.harq_ack_resource = static_cast<int>(unpack_bits(bits, pos, 2));
    dci.new_data = static_cast<int>(unpack_bits(bits, pos, 1));
    return dci;
}

int Dci::time_offset_subframes() const {
    const auto& ladder = direction == DciDirection::Downlink ? kDlTimeOffsets : kUlTimeOffsets;
    if (time_offset_index < 0 || time_offset_index >= static_cast<int>(ladder.size())) {
        throw std::invalid_argument("time offset index outside the ladder");
    }
    return ladder[time_offset_index];
}

void NpdschConfig::validate() const {
    if (tbs < 1 || tbs > kMaxTbsNpdsch) {
        throw std::invalid_argument("NPDSCH TBS must be 1..680");
    }
    if (repetitions < 1 || repetitions > 512 || !std::has_single_bit(static_cast<unsigned>(repetitions))) {
        throw std::invalid_argument("NPDSCH repetitions must be a power of two up to 512");
    }
}

std::uint32_t npbch_scrambler_init(const CellConfig& cell, int subblock) {
    return static_cast<std::uint32_t>(cell.nb_pcid) * 8u + static_cast<std::uint32_t>(subblock) + 0x100000u;
}

std::uint32_t data_scrambler_init(const CellConfig& cell, ChannelKind kind, int subframe_in_pattern) {
    const auto kind_salt = static_cast<std::uint32_t>(kind) << 12;
    return (static_cast<std::uint32_t>(cell.nb_pcid) << 4) + kind_salt +
           static_cast<std::uint32_t>(subframe_in_pattern) + 0x200000u;
}

namespace {

Bits scramble(const Bits& bits, std::uint32_t c_init) {
    const auto c = gold_sequence(c_init, bits.size());
    Bits out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        out[i] = bits[i] ^ c[i];
    }
    return out;
}

}  // namespace

std::vector<ResourceGrid> build_npbch_tti(const Mib& mib, const CellConfig& cell) {
    cell.validate();
    const auto tb = make_transport_block(mib.payload_bits(), Channel::Npbch);
    const auto coded = tbcc_encode(tb);
    const int capacity_bits = 2 * nb_data_capacity(ChannelKind::Npbch, cell);
    const Bits full = rate_match(coded, kNpbchSubblocks * capacity_bits);

    std::vector<ResourceGrid> out;
    out.reserve(kNpbchTtiFrames);
    for (int sb = 0; sb < kNpbchSubblocks; ++sb) {
        Bits window(full.begin() + static_cast<long>(sb) * capacity_bits,
                    full.begin() + static_cast<long>(sb + 1) * capacity_bits);
        const Bits scrambled = scramble(window, npbch_scrambler_init(cell, sb));
        const auto symbols = modulate(scrambled, Modulation::Qpsk);
        ResourceGrid grid = make_subframe(SubframeRole::Npbch, cell);
        map_channel(grid, symbols.symbols, ChannelKind::Npbch, cell);
        insert_nrs(grid, cell);
        for (int rep = 0; rep < kNpbchRepetitions; ++rep) {
            out.push_back(grid);
        }
    }
    return out;
}

std::vector<ResourceGrid> build_npdcch(const Dci& dci, int aggregation_level, int repetitions,
                                       const CellConfig& cell, int dci_slot) {
    cell.validate();
    if (aggregation_level != 1 && aggregation_level != 2) {
        throw std::invalid_argument("aggregation level must be 1 or 2");
    }
    if (repetitions < 1) {
        throw std::invalid_argument("repetition count must be at least 1");
    }
    if (dci_slot != 0 && (aggregation_level == 2 || dci_slot != 1)) {
        throw std::invalid_argument("AL-1 has two DCI slots, AL-2 one");
    }
    const Bits with_crc = attach_crc(dci.encode(), kCrc16Bits);
    CodedBlock coded;
    coded.scheme = CodingScheme::Tbcc;
    coded.info_bits = static_cast<int>(with_crc.size());
    coded.bits = tbcc_encode_bits(with_crc);

    const auto positions = data_positions(ChannelKind::Npdcch, cell);
    const int total = static_cast<int>(positions.size());
    const int span = (aggregation_level == 2) ? total : total / 2;
    const int target_bits = 2 * span;
    const Bits rm = rate_match(coded, target_bits);
    const Bits scrambled = scramble(rm, data_scrambler_init(cell, ChannelKind::Npdcch, dci_slot));
    const auto symbols = modulate(scrambled, Modulation::Qpsk);

    ResourceGrid grid = make_subframe(SubframeRole::Pool, cell);
    const int base = (aggregation_level == 1 && dci_slot == 1) ? span : 0;
    for (int i = 0; i < span; ++i) {
        const auto& p = positions[base + i];
        grid.at(p.subcarrier, p.symbol) = symbols.symbols[i];
        grid.usage_at(p.subcarrier, p.symbol) = Usage::NbData;
    }
    insert_nrs(grid, cell);

    std::vector<ResourceGrid> out(static_cast<std::size_t>(repetitions), grid);
    return out;
}

int npdsch_subframes_for(int tbs, const CellConfig& cell) {
    const int info = tbs + kCrc24Bits;
    const int capacity_bits = 2 * nb_data_capacity(ChannelKind::Npdsch, cell);
    // working code rate cap of 3/4 per subframe set
    const int n = (4 * info + 3 * capacity_bits - 1) / (3 * capacity_bits);
    return std::max(1, n);
}

std::vector<ResourceGrid> build_npdsch(const TransportBlock& tb, const NpdschConfig& cfg,
                                       const CellConfig& cell) {
    cell.validate();
    cfg.validate();
    if (tb.channel != Channel::Npdsch) {
        throw std::invalid_argument("transport block is not NPDSCH");
    }
    if (tb.tbs != cfg.tbs) {
        throw std::invalid_argument("transport block size does not match the configuration");
    }
    const auto coded = tbcc_encode(tb);
    const int nsf = npdsch_subframes_for(tb.tbs, cell);
    const int capacity_bits = 2 * nb_data_capacity(ChannelKind::Npdsch, cell);
    const Bits rm = rate_match(coded, nsf * capacity_bits);

    std::vector<ResourceGrid> pattern;
    pattern.reserve(nsf);
    for (int s = 0; s < nsf; ++s) {
        Bits chunk(rm.begin() + static_cast<long>(s) * capacity_bits,
                   rm.begin() + static_cast<long>(s + 1) * capacity_bits);
        const Bits scrambled = scramble(chunk, data_scrambler_init(cell, ChannelKind::Npdsch, s));
        const auto symbols = modulate(scrambled, Modulation::Qpsk);
        ResourceGrid grid = make_subframe(SubframeRole::Pool, cell);
        map_channel(grid, symbols.symbols, ChannelKind::Npdsch, cell);
        insert_nrs(grid, cell);
        pattern.push_back(grid);
    }
    std::vector<ResourceGrid> out;
    out.reserve(static_cast<std::size_t>(nsf) * cfg.repetitions);
    for (int r = 0; r < cfg.repetitions; ++r) {
        out.insert(out.end(), pattern.begin(), pattern.end());
    }
    return out;
}

long symbol_sample_offset(int symbol_index) {
    const int slot = symbol_index / 7;
    const int l = symbol_index % 7;
    long off = static_cast<long>(slot) * kSamplesPerSlot15k;
    for (int i = 0; i < l; ++i) {
        off += kFftSize15k + (i == 0 ? kCpFirstSamples : kCpOtherSamples);
    }
    return off;
}

int symbol_cp_length(int symbol_index) {
    return symbol_index % 7 == 0 ? kCpFirstSamples : kCpOtherSamples;
}

Waveform serialize(std::span<const ResourceGrid> grids) {
    Waveform wave;
    wave.sample_rate_hz = kSampleRateHz;
    wave.samples.assign(grids.size() * kSamplesPerSubframe, cplx(0.0, 0.0));
    std::vector<cplx> bins(kFftSize15k);
    for (std::size_t sf = 0; sf < grids.size(); ++sf) {
        for (int sym = 0; sym < kSymbolsPerSubframe; ++sym) {
            std::fill(bins.begin(), bins.end(), cplx(0.0, 0.0));
            for (int k = 0; k < kSubcarriers; ++k) {
                const int bin = (k - 6 + kFftSize15k) % kFftSize15k;
                bins[bin] = grids[sf].at(k, sym);
            }
            dsp::fft_unitary(bins, true);
            const long start = static_cast<long>(sf) * kSamplesPerSubframe + symbol_sample_offset(sym);
            const int cp = symbol_cp_length(sym);
            for (int n = 0; n < cp; ++n) {
                wave.samples[start + n] = bins[kFftSize15k - cp + n];
            }
            for (int n = 0; n < kFftSize15k; ++n) {
                wave.samples[start + cp + n] = bins[n];
            }
        }
    }
    return wave;
}

std::vector<cplx> extract_symbol(std::span<const cplx> samples, long symbol_start, int cp_len) {
    std::vector<cplx> bins(kFftSize15k, cplx(0.0, 0.0));
    const long data_start = symbol_start + cp_len;
    for (int n = 0; n < kFftSize15k; ++n) {
        const long idx = data_start + n;
        if (idx >= 0 && idx < static_cast<long>(samples.size())) {
            bins[n] = samples[idx];
        }
    }
    dsp::fft_unitary(bins, false);
    std::vector<cplx> out(kSubcarriers);
    for (int k = 0; k < kSubcarriers; ++k) {
        out[k] = bins[(k - 6 + kFftSize15k) % kFftSize15k];
    }
    return out;
}

std::vector<ResourceGrid> deserialize(const Waveform& wave, int num_subframes, long sample_offset) {
    std::vector<ResourceGrid> grids(num_subframes);
    for (int sf = 0; sf < num_subframes; ++sf) {
        for (int sym = 0; sym < kSymbolsPerSubframe; ++sym) {
            const long start = sample_offset + static_cast<long>(sf) * kSamplesPerSubframe + symbol_sample_offset(sym);
            const auto vals = extract_symbol(wave.samples, start, symbol_cp_length(sym));
            for (int k = 0; k < kSubcarriers; ++k) {
                grids[sf].at(k, sym) = vals[k];
            }
        }
    }
    return grids;
}

std::vector<ResourceGrid> compose_frames(const CellConfig& cell, const Mib& mib, int start_frame,
                                         int frame_count, std::span<const ResourceGrid> pool_payload) {
    const auto npbch = build_npbch_tti(mib, cell);
    const auto npss = generate_npss();
    std::vector<cplx> npss_flat;
    npss_flat.reserve(kNpssSymbols * kNpssSubcarriers);
    for (const auto& row : npss.symbols) {
        npss_flat.insert(npss_flat.end(), row.begin(), row.end());
    }

    std::vector<ResourceGrid> out;
    out.reserve(static_cast<std::size_t>(frame_count) * kSubframesPerFrame);
    std::size_t pool_used = 0;
    for (int f = 0; f < frame_count; ++f) {
        const int frame = (start_frame + f) % kFrameRange;
        for (int sf = 0; sf < kSubframesPerFrame; ++sf) {
            const TimingPosition pos{frame, sf, 0, 0};
            const SubframeRole role = subframe_role(pos);
            switch (role) {
                case SubframeRole::Npbch:
                    out.push_back(npbch[static_cast<std::size_t>(frame % kNpbchTtiFrames)]);
                    break;
                case SubframeRole::Npss: {
                    ResourceGrid grid = make_subframe(SubframeRole::Npss, cell);
                    map_channel(grid, npss_flat, ChannelKind::Npss, cell);
                    out.push_back(grid);
                    break;
                }
                case SubframeRole::Nsss: {
                    ResourceGrid grid = make_subframe(SubframeRole::Nsss, cell);
                    const auto nsss = generate_nsss(cell.nb_pcid, frame);
                    map_channel(grid, nsss.values, ChannelKind::Nsss, cell);
                    out.push_back(grid);
                    break;
                }
                case SubframeRole::Pool:
                    if (pool_used < pool_payload.size()) {
                        out.push_back(pool_payload[pool_used++]);
                    } else {
                        out.push_back(make_subframe(SubframeRole::Pool, cell));
                    }
                    break;
            }
        }
    }
    return out;
}

}  // namespace nbiot
