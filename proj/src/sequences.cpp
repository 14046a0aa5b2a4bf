#include "nbiot/sequences.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nbiot {

ZcSequence generate_zc(int length, int root) {
    if (length <= 0 || length % 2 == 0) {
        throw std::invalid_argument("ZC length must be odd and positive");
    }
    if (std::gcd(root % length, length) != 1) {
        throw std::invalid_argument("ZC root must be coprime to the length");
    }
    ZcSequence seq;
    seq.length = length;
    seq.root = root;
    seq.values.resize(length);
    for (int n = 0; n < length; ++n) {
        const double phase = -std::numbers::pi * root * n * (n + 1) / length;
        seq.values[n] = {std::cos(phase), std::sin(phase)};
    }
    return seq;
}

NpssBlock generate_npss() {
    NpssBlock block;
    block.base = generate_zc(11, 5);
    for (int l = 0; l < kNpssSymbols; ++l) {
        for (int k = 0; k < kNpssSubcarriers; ++k) {
            block.symbols[l][k] = static_cast<double>(block.code_cover[l]) * block.base.values[k];
        }
    }
    return block;
}

int nsss_shift_index(int frame_number) { return (frame_number / 2) % 4; }

namespace {

// Four fixed +/-1 scrambling sequences, one per floor(pcid/126).
std::vector<int> nsss_scrambling(int q) {
    const auto bits = gold_sequence(0x4E555u + static_cast<std::uint32_t>(q), kNsssLength);
    std::vector<int> s(kNsssLength);
    for (int n = 0; n < kNsssLength; ++n) {
        s[n] = bits[n] ? -1 : 1;
    }
    return s;
}

}  // namespace

NsssBlock generate_nsss(int nb_pcid, int frame_number) {
    if (nb_pcid < 0 || nb_pcid >= kNumPcid) {
        throw std::invalid_argument("NB-PCID out of range");
    }
    if (frame_number % 2 != 0) {
        throw std::invalid_argument("NSSS exists only in even frames");
    }
    const int root = nb_pcid % 126 + 3;
    const int q = nb_pcid / 126;
    const int shift = 33 * nsss_shift_index(frame_number);
    const ZcSequence zc = generate_zc(131, root);
    const auto scr = nsss_scrambling(q);

    NsssBlock block;
    block.nb_pcid = nb_pcid;
    block.frame_number = frame_number;
    block.values.resize(kNsssLength);
    for (int n = 0; n < kNsssLength; ++n) {
        const int m = (n + shift) % kNsssLength;
        block.values[n] = static_cast<double>(scr[n]) * zc.values[m % 131];
    }
    return block;
}

DmrsSlot generate_dmrs(NpuschFormat format, int slot, int nb_pcid, int tone_count) {
    if (tone_count < 1) {
        throw std::invalid_argument("tone_count must be positive");
    }
    DmrsSlot out;
    out.symbol_indexes = (format == NpuschFormat::F1) ? std::vector<int>{3} : std::vector<int>{2, 3, 4};
    const auto n = out.symbol_indexes.size();
    const auto c_init = static_cast<std::uint32_t>(nb_pcid) * 131u + static_cast<std::uint32_t>(slot % 20) +
                        (format == NpuschFormat::F2 ? 0x10000u : 0u);
    const auto flat = gold_qpsk(c_init, n * static_cast<std::size_t>(tone_count));
    out.values.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        out.values[s].assign(flat.begin() + s * tone_count, flat.begin() + (s + 1) * tone_count);
    }
    return out;
}

std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t length) {
    constexpr std::size_t kNc = 1600;
    const std::size_t total = kNc + length;
    std::vector<std::uint8_t> x1(total + 31), x2(total + 31);
    x1[0] = 1;
    for (int i = 0; i < 31; ++i) {
        x2[i] = (c_init >> i) & 1u;
    }
    for (std::size_t n = 0; n + 31 < x1.size(); ++n) {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    std::vector<std::uint8_t> c(length);
    for (std::size_t n = 0; n < length; ++n) {
        c[n] = x1[n + kNc] ^ x2[n + kNc];
    }
    return c;
}

std::vector<cplx> gold_qpsk(std::uint32_t c_init, std::size_t length) {
    const auto bits = gold_sequence(c_init, 2 * length);
    std::vector<cplx> out(length);
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t n = 0; n < length; ++n) {
        out[n] = {s * (1.0 - 2.0 * bits[2 * n]), s * (1.0 - 2.0 * bits[2 * n + 1])};
    }
    return out;
}

void export_sequence_csv(const std::string& path, std::span<const cplx> values) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    f << "index,re,im\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        f << i << ',' << values[i].real() << ',' << values[i].imag() << '\n';
    }
}

}  // namespace nbiot
