#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nbiot {

using cplx = std::complex<double>;

constexpr int kNpssSymbols = 11;
constexpr int kNpssSubcarriers = 11;
constexpr int kNsssLength = 132;
constexpr int kNumPcid = 504;

/// Fixed NPSS per-symbol sign pattern (the published code cover).
constexpr std::array<int, kNpssSymbols> kNpssCodeCover = {1, 1, 1, 1, -1, -1, 1, 1, 1, -1, 1};

struct ZcSequence {
    int length = 0;
    int root = 0;
    std::vector<cplx> values;
};

/// values[n] = exp(-j*pi*root*n*(n+1)/length). Length must be odd and
/// coprime to root.
ZcSequence generate_zc(int length, int root);

struct NpssBlock {
    std::array<int, kNpssSymbols> code_cover = kNpssCodeCover;
    ZcSequence base;  // length 11, root 5
    // symbols[l][k]: frequency-domain value of OFDM symbol l, subcarrier k
    std::array<std::array<cplx, kNpssSubcarriers>, kNpssSymbols> symbols{};
};

NpssBlock generate_npss();

struct NsssBlock {
    int nb_pcid = 0;
    int frame_number = 0;
    std::vector<cplx> values;  // 132 unit-modulus elements
};

/// NSSS for an even frame: ZC root and binary scrambling from nb_pcid,
/// quarter cyclic shift from (frame/2) mod 4.
NsssBlock generate_nsss(int nb_pcid, int frame_number);

int nsss_shift_index(int frame_number);

enum class NpuschFormat { F1, F2 };

struct DmrsSlot {
    std::vector<int> symbol_indexes;        // within the 7-symbol slot
    std::vector<std::vector<cplx>> values;  // [dmrs symbol][tone]
};

/// Format 1: middle symbol (index 3); Format 2: middle three (2,3,4).
/// Values are cell-seeded pseudorandom QPSK.
DmrsSlot generate_dmrs(NpuschFormat format, int slot, int nb_pcid, int tone_count = 1);

/// LTE-style Gold sequence (x^31+x^3+1, x^31+x^3+x^2+x+1, Nc=1600).
std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t length);

/// Unit-modulus QPSK symbols derived from a Gold sequence.
std::vector<cplx> gold_qpsk(std::uint32_t c_init, std::size_t length);

void export_sequence_csv(const std::string& path, std::span<const cplx> values);

}  // namespace nbiot
