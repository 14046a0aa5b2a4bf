#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace nbiot {

using cplx = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

enum class Channel { Npdsch, NpuschF1, Npbch, Npdcch };
enum class CodingScheme { Tbcc, Turbo, Repetition };
enum class Modulation { Qpsk, Pi2Bpsk, Pi4Qpsk };

constexpr int kMaxTbsNpdsch = 680;
constexpr int kMaxTbsNpusch = 1000;
constexpr int kDciBits = 23;
constexpr int kCrc24Bits = 24;
constexpr int kCrc16Bits = 16;
constexpr int kTurboTailBits = 12;

struct TransportBlock {
    Bits payload_bits;
    int tbs = 0;
    Channel channel = Channel::Npdsch;
};

TransportBlock make_transport_block(Bits payload, Channel channel);
TransportBlock random_transport_block(int tbs, Channel channel, std::uint64_t seed);

int max_tbs(Channel channel);
int crc_bits(Channel channel);  // 24 for transport channels, 16 for DCI

struct CodedBlock {
    Bits bits;
    CodingScheme scheme = CodingScheme::Tbcc;
    int info_bits = 0;  // payload + CRC length fed to the encoder
};

struct DecodeResult {
    TransportBlock tb;
    bool crc_ok = false;
};

// ---- CRC ----
Bits crc24(std::span<const std::uint8_t> bits);  // generator 0x1864CFB
Bits crc16(std::span<const std::uint8_t> bits);  // generator 0x11021
Bits attach_crc(std::span<const std::uint8_t> bits, int crc_len);
bool check_crc(std::span<const std::uint8_t> bits_with_crc, int crc_len);

// ---- Tail-biting convolutional code (K=7, 133/171/165 octal) ----
CodedBlock tbcc_encode(const TransportBlock& tb);
Bits tbcc_encode_bits(std::span<const std::uint8_t> bits_with_crc);

/// Wrap-around Viterbi over rate-matched soft bits (LLR > 0 means bit 0).
/// De-rate-matching to the mother codeword happens internally.
DecodeResult viterbi_decode(std::span<const double> soft_bits, int tbs, Channel channel);

/// Viterbi on mother-codeword LLRs directly (3*K values).
Bits viterbi_decode_mother(std::span<const double> llr, int num_info_bits);

// ---- LTE turbo code (13/15 octal constituents, QPP interleaver) ----
CodedBlock turbo_encode(const TransportBlock& tb);
DecodeResult turbo_decode(std::span<const double> soft_bits, int tbs, int iterations = 6);
std::vector<int> qpp_interleaver(int k);

// ---- Repetition code (NPUSCH Format 2) ----
CodedBlock repetition_encode(int bit, int factor);
int repetition_decode(std::span<const double> soft_bits);

// ---- Rate matching (single redundancy version) ----
int mother_codeword_length(CodingScheme scheme, int info_bits);
Bits rate_match(const CodedBlock& coded, int target_length);

/// Accumulate rate-matched LLRs back onto mother-codeword positions.
/// `stream_offset` is the position of soft_bits[0] in the rate-matched
/// stream (nonzero when decoding a window of a longer transmission).
std::vector<double> derate_match(std::span<const double> soft_bits, CodingScheme scheme, int info_bits,
                                 long stream_offset = 0);

// ---- Modulation ----
struct ModulatedSymbols {
    std::vector<cplx> symbols;
    Modulation scheme = Modulation::Qpsk;
};

ModulatedSymbols modulate(std::span<const std::uint8_t> bits, Modulation scheme);
std::vector<double> demodulate(std::span<const cplx> symbols, Modulation scheme, double noise_var);

int bits_per_symbol(Modulation scheme);

}  // namespace nbiot
