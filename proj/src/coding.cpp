#include "nbiot/coding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nbiot {

namespace {

constexpr std::array<int, 3> kTbccGenerators = {0133, 0171, 0165};  // octal, K=7
constexpr int kTbccStates = 64;

// LTE 32-column sub-block interleaver permutation.
constexpr std::array<int, 32> kColumnPermutation = {0, 16, 8,  24, 4,  20, 12, 28, 2,  18, 10,
                                                    26, 6,  22, 14, 30, 1,  17, 9,  25, 5,  21,
                                                    13, 29, 3,  19, 11, 27, 7,  23, 15, 31};

// QPP interleaver parameters (f1, f2) for the supported block lengths.
struct QppEntry {
    int k;
    int f1;
    int f2;
};
constexpr std::array<QppEntry, 11> kQppTable = {{{40, 3, 10},
                                                 {48, 7, 12},
                                                 {56, 19, 42},
                                                 {80, 9, 20},
                                                 {112, 41, 84},
                                                 {144, 17, 108},
                                                 {280, 103, 210},
                                                 {352, 21, 44},
                                                 {464, 247, 58},
                                                 {704, 155, 44},
                                                 {1024, 31, 64}}};

int parity(unsigned v) { return __builtin_popcount(v) & 1; }

Bits crc_generic(std::span<const std::uint8_t> bits, std::uint32_t poly, int crc_len) {
    std::uint32_t reg = 0;
    const std::uint32_t top = 1u << crc_len;
    for (const auto b : bits) {
        reg = (reg << 1) | (b & 1u);
        if (reg & top) {
            reg ^= poly;
        }
    }
    for (int i = 0; i < crc_len; ++i) {
        reg <<= 1;
        if (reg & top) {
            reg ^= poly;
        }
    }
    Bits out(crc_len);
    for (int i = 0; i < crc_len; ++i) {
        out[i] = (reg >> (crc_len - 1 - i)) & 1u;
    }
    return out;
}

}  // namespace

int max_tbs(Channel channel) {
    switch (channel) {
        case Channel::Npdsch: return kMaxTbsNpdsch;
        case Channel::NpuschF1: return kMaxTbsNpusch;
        case Channel::Npbch: return 64;  // MIB payload bound
        case Channel::Npdcch: return kDciBits;
    }
    return 0;
}

int crc_bits(Channel channel) { return channel == Channel::Npdcch ? kCrc16Bits : kCrc24Bits; }

TransportBlock make_transport_block(Bits payload, Channel channel) {
    TransportBlock tb;
    tb.tbs = static_cast<int>(payload.size());
    tb.channel = channel;
    tb.payload_bits = std::move(payload);
    if (tb.tbs <= 0 || tb.tbs > max_tbs(channel)) {
        throw std::invalid_argument("transport block size " + std::to_string(tb.tbs) +
                                    " outside the channel limit");
    }
    return tb;
}

TransportBlock random_transport_block(int tbs, Channel channel, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    Bits payload(tbs);
    for (auto& b : payload) {
        b = static_cast<std::uint8_t>(eng() & 1u);
    }
    return make_transport_block(std::move(payload), channel);
}

Bits crc24(std::span<const std::uint8_t> bits) { return crc_generic(bits, 0x1864CFBu, kCrc24Bits); }
Bits crc16(std::span<const std::uint8_t> bits) { return crc_generic(bits, 0x11021u, kCrc16Bits); }

Bits attach_crc(std::span<const std::uint8_t> bits, int crc_len) {
    Bits out(bits.begin(), bits.end());
    const Bits crc = crc_len == kCrc24Bits ? crc24(bits) : crc16(bits);
    out.insert(out.end(), crc.begin(), crc.end());
    return out;
}

bool check_crc(std::span<const std::uint8_t> bits_with_crc, int crc_len) {
    if (static_cast<int>(bits_with_crc.size()) <= crc_len) {
        return false;
    }
    const auto payload = bits_with_crc.first(bits_with_crc.size() - crc_len);
    const Bits expect = crc_len == kCrc24Bits ? crc24(payload) : crc16(payload);
    return std::equal(expect.begin(), expect.end(), bits_with_crc.end() - crc_len);
}

// ---- TBCC ----

Bits tbcc_encode_bits(std::span<const std::uint8_t> bits) {
    const auto k = bits.size();
    if (k < 6) {
        throw std::invalid_argument("TBCC input too short");
    }
    // tail-biting: initial register state holds the last six input bits
    unsigned state = 0;
    for (int i = 0; i < 6; ++i) {
        state |= static_cast<unsigned>(bits[k - 1 - i] & 1u) << (5 - i);
    }
    Bits out(3 * k);
    for (std::size_t n = 0; n < k; ++n) {
        const unsigned w = (static_cast<unsigned>(bits[n] & 1u) << 6) | state;
        for (int g = 0; g < 3; ++g) {
            out[g * k + n] = static_cast<std::uint8_t>(parity(w & static_cast<unsigned>(kTbccGenerators[g])));
        }
        state = w >> 1;
    }
    return out;
}

CodedBlock tbcc_encode(const TransportBlock& tb) {
    if (tb.channel == Channel::NpuschF1) {
        throw std::invalid_argument("TBCC applies to downlink channels only");
    }
    if (tb.tbs > max_tbs(tb.channel)) {
        throw std::invalid_argument("TBS exceeds the channel maximum");
    }
    const Bits with_crc = attach_crc(tb.payload_bits, crc_bits(tb.channel));
    CodedBlock out;
    out.scheme = CodingScheme::Tbcc;
    out.info_bits = static_cast<int>(with_crc.size());
    out.bits = tbcc_encode_bits(with_crc);
    return out;
}

Bits viterbi_decode_mother(std::span<const double> llr, int num_info_bits) {
    const int k = num_info_bits;
    if (static_cast<int>(llr.size()) != 3 * k) {
        throw std::invalid_argument("mother LLR length must be 3x the info length");
    }
    // branch metric per (state, input); stream-major LLR layout
    auto branch_metric = [&](int stage, unsigned w) {
        double m = 0.0;
        for (int g = 0; g < 3; ++g) {
            const int bit = parity(w & static_cast<unsigned>(kTbccGenerators[g]));
            const double l = llr[static_cast<std::size_t>(g) * k + stage];
            m += bit ? -l : l;
        }
        return m;
    };

    std::vector<double> metric(kTbccStates, 0.0);
    std::vector<std::uint8_t> survivor(static_cast<std::size_t>(k) * kTbccStates);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    // two wrap-around passes: the second starts from the first pass's metrics
    for (int pass = 0; pass < 2; ++pass) {
        for (int n = 0; n < k; ++n) {
            std::vector<double> next(kTbccStates, kNegInf);
            auto* surv = &survivor[static_cast<std::size_t>(n) * kTbccStates];
            for (int s_next = 0; s_next < kTbccStates; ++s_next) {
                const unsigned b = static_cast<unsigned>(s_next) >> 5;
                for (unsigned lsb = 0; lsb < 2; ++lsb) {
                    const unsigned s_prev = ((static_cast<unsigned>(s_next) & 31u) << 1) | lsb;
                    const unsigned w = (b << 6) | s_prev;
                    const double cand = metric[s_prev] + branch_metric(n, w);
                    if (cand > next[s_next]) {
                        next[s_next] = cand;
                        surv[s_next] = static_cast<std::uint8_t>(lsb);
                    }
                }
            }
            const double best = *std::max_element(next.begin(), next.end());
            for (auto& v : next) {
                v -= best;
            }
            metric = std::move(next);
        }
    }

    // traceback each end state of the final pass; prefer tail-biting paths
    auto traceback = [&](int end_state, Bits& bits_out) {
        unsigned s = static_cast<unsigned>(end_state);
        bits_out.assign(k, 0);
        for (int n = k - 1; n >= 0; --n) {
            bits_out[n] = static_cast<std::uint8_t>(s >> 5);
            const unsigned lsb = survivor[static_cast<std::size_t>(n) * kTbccStates + s];
            s = ((s & 31u) << 1) | lsb;
        }
        return s;  // start state
    };

    int best_tb = -1, best_any = 0;
    for (int s = 1; s < kTbccStates; ++s) {
        if (metric[s] > metric[best_any]) {
            best_any = s;
        }
    }
    Bits scratch;
    double best_tb_metric = kNegInf;
    for (int s = 0; s < kTbccStates; ++s) {
        if (traceback(s, scratch) == static_cast<unsigned>(s) && metric[s] > best_tb_metric) {
            best_tb_metric = metric[s];
            best_tb = s;
        }
    }
    Bits out;
    traceback(best_tb >= 0 ? best_tb : best_any, out);
    return out;
}

DecodeResult viterbi_decode(std::span<const double> soft_bits, int tbs, Channel channel) {
    if (soft_bits.empty()) {
        throw std::invalid_argument("empty soft bit input");
    }
    if (tbs <= 0 || tbs > max_tbs(channel)) {
        throw std::invalid_argument("invalid TBS for channel");
    }
    const int info = tbs + crc_bits(channel);
    const auto mother = derate_match(soft_bits, CodingScheme::Tbcc, info);
    const Bits decoded = viterbi_decode_mother(mother, info);
    DecodeResult res;
    res.crc_ok = check_crc(decoded, crc_bits(channel));
    res.tb.channel = channel;
    res.tb.tbs = tbs;
    res.tb.payload_bits.assign(decoded.begin(), decoded.begin() + tbs);
    return res;
}

// ---- Turbo ----

namespace {

// RSC constituent: feedback 1+D^2+D^3 (13 octal), forward 1+D+D^3 (15 octal).
struct RscStep {
    std::uint8_t next;
    std::uint8_t parity;
};

constexpr int kRscStates = 8;

RscStep rsc_step(unsigned state, unsigned in) {
    const unsigned s1 = (state >> 2) & 1u, s2 = (state >> 1) & 1u, s3 = state & 1u;
    const unsigned a = in ^ s2 ^ s3;
    const unsigned p = a ^ s1 ^ s3;
    const unsigned next = (a << 2) | (s1 << 1) | s2;
    return {static_cast<std::uint8_t>(next), static_cast<std::uint8_t>(p)};
}

// input that drives the feedback to zero (termination)
unsigned rsc_term_input(unsigned state) {
    const unsigned s2 = (state >> 1) & 1u, s3 = state & 1u;
    return s2 ^ s3;
}

void rsc_encode(std::span<const std::uint8_t> in, Bits& parity_out, Bits& tail_out) {
    unsigned state = 0;
    parity_out.resize(in.size());
    for (std::size_t n = 0; n < in.size(); ++n) {
        const auto st = rsc_step(state, in[n] & 1u);
        parity_out[n] = st.parity;
        state = st.next;
    }
    tail_out.clear();
    for (int t = 0; t < 3; ++t) {
        const unsigned u = rsc_term_input(state);
        const auto st = rsc_step(state, u);
        tail_out.push_back(static_cast<std::uint8_t>(u));
        tail_out.push_back(st.parity);
        state = st.next;
    }
}

// max-log BCJR over one terminated constituent.
// lls/llp have k+3 entries (info + tail); la has k entries.
void rsc_bcjr(std::span<const double> lls, std::span<const double> llp, std::span<const double> la,
              std::span<double> posterior) {
    const int total = static_cast<int>(lls.size());
    const int k = total - 3;
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    auto bit_metric = [](double llr, unsigned bit) { return bit ? -0.5 * llr : 0.5 * llr; };

    std::vector<std::array<double, kRscStates>> alpha(total + 1), beta(total + 1);
    alpha[0].fill(kNegInf);
    alpha[0][0] = 0.0;
    beta[total].fill(kNegInf);
    beta[total][0] = 0.0;

    auto gamma = [&](int n, unsigned state, unsigned u) {
        const auto st = rsc_step(state, u);
        double g = bit_metric(lls[n], u) + bit_metric(llp[n], st.parity);
        if (n < k) {
            g += bit_metric(la[n], u);
        }
        return g;
    };

    for (int n = 0; n < total; ++n) {
        alpha[n + 1].fill(kNegInf);
        for (unsigned s = 0; s < kRscStates; ++s) {
            if (alpha[n][s] == kNegInf) {
                continue;
            }
            for (unsigned u = 0; u < 2; ++u) {
                const auto st = rsc_step(s, u);
                alpha[n + 1][st.next] = std::max(alpha[n + 1][st.next], alpha[n][s] + gamma(n, s, u));
            }
        }
    }
    for (int n = total - 1; n >= 0; --n) {
        beta[n].fill(kNegInf);
        for (unsigned s = 0; s < kRscStates; ++s) {
            for (unsigned u = 0; u < 2; ++u) {
                const auto st = rsc_step(s, u);
                if (beta[n + 1][st.next] == kNegInf) {
                    continue;
                }
                beta[n][s] = std::max(beta[n][s], beta[n + 1][st.next] + gamma(n, s, u));
            }
        }
    }
    for (int n = 0; n < k; ++n) {
        double m0 = kNegInf, m1 = kNegInf;
        for (unsigned s = 0; s < kRscStates; ++s) {
            if (alpha[n][s] == kNegInf) {
                continue;
            }
            for (unsigned u = 0; u < 2; ++u) {
                const auto st = rsc_step(s, u);
                const double v = alpha[n][s] + gamma(n, s, u) + beta[n + 1][st.next];
                (u ? m1 : m0) = std::max(u ? m1 : m0, v);
            }
        }
        posterior[n] = m0 - m1;  // >0 means bit 0
    }
}

}  // namespace

std::vector<int> qpp_interleaver(int k) {
    for (const auto& e : kQppTable) {
        if (e.k == k) {
            std::vector<int> pi(k);
            for (long i = 0; i < k; ++i) {
                pi[i] = static_cast<int>((e.f1 * i + e.f2 * i * i) % k);
            }
            return pi;
        }
    }
    throw std::invalid_argument("no interleaver entry for block length " + std::to_string(k));
}

CodedBlock turbo_encode(const TransportBlock& tb) {
    if (tb.channel != Channel::NpuschF1) {
        throw std::invalid_argument("turbo coding applies to NPUSCH Format 1");
    }
    if (tb.tbs > kMaxTbsNpusch) {
        throw std::invalid_argument("TBS exceeds the NPUSCH maximum");
    }
    const Bits sys = attach_crc(tb.payload_bits, kCrc24Bits);
    const int k = static_cast<int>(sys.size());
    const auto pi = qpp_interleaver(k);
    Bits interleaved(k);
    for (int i = 0; i < k; ++i) {
        interleaved[i] = sys[pi[i]];
    }
    Bits p1, p2, tail1, tail2;
    rsc_encode(sys, p1, tail1);
    rsc_encode(interleaved, p2, tail2);

    CodedBlock out;
    out.scheme = CodingScheme::Turbo;
    out.info_bits = k;
    out.bits.reserve(3 * k + kTurboTailBits);
    out.bits.insert(out.bits.end(), sys.begin(), sys.end());
    out.bits.insert(out.bits.end(), p1.begin(), p1.end());
    out.bits.insert(out.bits.end(), p2.begin(), p2.end());
    out.bits.insert(out.bits.end(), tail1.begin(), tail1.end());
    out.bits.insert(out.bits.end(), tail2.begin(), tail2.end());
    return out;
}

DecodeResult turbo_decode(std::span<const double> soft_bits, int tbs, int iterations) {
    if (iterations < 1) {
        throw std::invalid_argument("iteration count must be at least 1");
    }
    if (soft_bits.empty()) {
        throw std::invalid_argument("empty soft bit input");
    }
    const int k = tbs + kCrc24Bits;
    const auto mother = derate_match(soft_bits, CodingScheme::Turbo, k);
    const auto pi = qpp_interleaver(k);

    std::vector<double> lls1(k + 3), llp1(k + 3), lls2(k + 3), llp2(k + 3);
    for (int n = 0; n < k; ++n) {
        lls1[n] = mother[n];
        llp1[n] = mother[k + n];
        lls2[n] = mother[pi[n]];
        llp2[n] = mother[2 * k + n];
    }
    // tails: [x1,z1]*3 then [x2,z2]*3
    for (int t = 0; t < 3; ++t) {
        lls1[k + t] = mother[3 * k + 2 * t];
        llp1[k + t] = mother[3 * k + 2 * t + 1];
        lls2[k + t] = mother[3 * k + 6 + 2 * t];
        llp2[k + t] = mother[3 * k + 6 + 2 * t + 1];
    }

    std::vector<double> la1(k, 0.0), le1(k, 0.0), post(k, 0.0);
    for (int it = 0; it < iterations; ++it) {
        rsc_bcjr(lls1, llp1, la1, post);
        for (int n = 0; n < k; ++n) {
            le1[n] = post[n] - lls1[n] - la1[n];
        }
        std::vector<double> la2_int(k);
        for (int n = 0; n < k; ++n) {
            la2_int[n] = le1[pi[n]];
        }
        rsc_bcjr(lls2, llp2, la2_int, post);
        std::vector<double> le2(k);
        for (int n = 0; n < k; ++n) {
            le2[n] = post[n] - lls2[n] - la2_int[n];
        }
        for (int n = 0; n < k; ++n) {
            la1[pi[n]] = le2[n];
        }
    }
    rsc_bcjr(lls1, llp1, la1, post);

    Bits decoded(k);
    for (int n = 0; n < k; ++n) {
        decoded[n] = post[n] > 0 ? 0 : 1;
    }
    DecodeResult res;
    res.crc_ok = check_crc(decoded, kCrc24Bits);
    res.tb.channel = Channel::NpuschF1;
    res.tb.tbs = tbs;
    res.tb.payload_bits.assign(decoded.begin(), decoded.begin() + tbs);
    return res;
}

// ---- Repetition ----

CodedBlock repetition_encode(int bit, int factor) {
    if (factor < 1) {
        throw std::invalid_argument("repetition factor must be at least 1");
    }
    CodedBlock out;
    out.scheme = CodingScheme::Repetition;
    out.info_bits = 1;
    out.bits.assign(static_cast<std::size_t>(factor), static_cast<std::uint8_t>(bit & 1));
    return out;
}

int repetition_decode(std::span<const double> soft_bits) {
    double acc = 0.0;
    for (const auto v : soft_bits) {
        acc += v;
    }
    return acc > 0 ? 0 : 1;
}

// ---- Rate matching ----

namespace {

// Sub-block interleaved read order for one stream of length d,
// as indexes into the stream (dummies skipped).
std::vector<int> subblock_order(int d) {
    const int cols = 32;
    const int rows = (d + cols - 1) / cols;
    const int pad = rows * cols - d;
    std::vector<int> order;
    order.reserve(d);
    for (int c = 0; c < cols; ++c) {
        const int col = kColumnPermutation[c];
        for (int r = 0; r < rows; ++r) {
            const int pos = r * cols + col;
            const int idx = pos - pad;
            if (idx >= 0) {
                order.push_back(idx);
            }
        }
    }
    return order;
}

// Circular-buffer read order over the full mother codeword.
std::vector<int> buffer_order(CodingScheme scheme, int info_bits) {
    std::vector<int> map;
    if (scheme == CodingScheme::Repetition) {
        map.resize(info_bits);
        for (int i = 0; i < info_bits; ++i) {
            map[i] = i;
        }
        return map;
    }
    const int d = info_bits;
    const auto order = subblock_order(d);
    const int streams = 3;
    map.reserve(static_cast<std::size_t>(streams) * d + kTurboTailBits);
    for (int s = 0; s < streams; ++s) {
        for (const int idx : order) {
            map.push_back(s * d + idx);
        }
    }
    if (scheme == CodingScheme::Turbo) {
        for (int t = 0; t < kTurboTailBits; ++t) {
            map.push_back(3 * d + t);
        }
    }
    return map;
}

}  // namespace

int mother_codeword_length(CodingScheme scheme, int info_bits) {
    switch (scheme) {
        case CodingScheme::Tbcc: return 3 * info_bits;
        case CodingScheme::Turbo: return 3 * info_bits + kTurboTailBits;
        case CodingScheme::Repetition: return info_bits;
    }
    return 0;
}

Bits rate_match(const CodedBlock& coded, int target_length) {
    if (target_length < 1) {
        throw std::invalid_argument("rate matching target must be positive");
    }
    const auto map = buffer_order(coded.scheme, coded.info_bits);
    if (map.size() != coded.bits.size()) {
        throw std::invalid_argument("coded block length inconsistent with its scheme");
    }
    Bits out(static_cast<std::size_t>(target_length));
    for (int i = 0; i < target_length; ++i) {
        out[i] = coded.bits[map[i % map.size()]];
    }
    return out;
}

std::vector<double> derate_match(std::span<const double> soft_bits, CodingScheme scheme, int info_bits,
                                 long stream_offset) {
    const auto map = buffer_order(scheme, info_bits);
    std::vector<double> mother(map.size(), 0.0);
    for (std::size_t i = 0; i < soft_bits.size(); ++i) {
        mother[map[(stream_offset + i) % map.size()]] += soft_bits[i];
    }
    return mother;
}

// ---- Modulation ----

int bits_per_symbol(Modulation scheme) { return scheme == Modulation::Pi2Bpsk ? 1 : 2; }

ModulatedSymbols modulate(std::span<const std::uint8_t> bits, Modulation scheme) {
    ModulatedSymbols out;
    out.scheme = scheme;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (scheme) {
        case Modulation::Qpsk: {
            if (bits.size() % 2 != 0) {
                throw std::invalid_argument("QPSK needs an even bit count");
            }
            out.symbols.reserve(bits.size() / 2);
            for (std::size_t i = 0; i < bits.size(); i += 2) {
                out.symbols.emplace_back(inv_sqrt2 * (1.0 - 2.0 * bits[i]),
                                         inv_sqrt2 * (1.0 - 2.0 * bits[i + 1]));
            }
            break;
        }
        case Modulation::Pi2Bpsk: {
            cplx prev(1.0, 0.0);
            out.symbols.reserve(bits.size());
            for (const auto b : bits) {
                const double d = 1.0 - 2.0 * b;
                prev = prev * cplx(0.0, d);  // +-pi/2 rotation
                out.symbols.push_back(prev);
            }
            break;
        }
        case Modulation::Pi4Qpsk: {
            if (bits.size() % 2 != 0) {
                throw std::invalid_argument("pi/4-QPSK needs an even bit count");
            }
            static const cplx kGray[4] = {{1, 0}, {0, 1}, {0, -1}, {-1, 0}};  // 00,01,10,11
            const cplx rot = std::polar(1.0, std::numbers::pi / 4.0);
            cplx prev(1.0, 0.0);
            out.symbols.reserve(bits.size() / 2);
            for (std::size_t i = 0; i < bits.size(); i += 2) {
                const int idx = bits[i] * 2 + bits[i + 1];
                prev = prev * kGray[idx] * rot;
                out.symbols.push_back(prev);
            }
            break;
        }
    }
    return out;
}

std::vector<double> demodulate(std::span<const cplx> symbols, Modulation scheme, double noise_var) {
    const double nv = std::max(noise_var, 1e-12);
    const double scale = 2.0 / nv;
    std::vector<double> llr;
    switch (scheme) {
        case Modulation::Qpsk: {
            llr.reserve(symbols.size() * 2);
            const double c = scale * std::sqrt(2.0);
            for (const auto& y : symbols) {
                llr.push_back(c * y.real());
                llr.push_back(c * y.imag());
            }
            break;
        }
        case Modulation::Pi2Bpsk: {
            llr.reserve(symbols.size());
            cplx prev(1.0, 0.0);
            for (const auto& y : symbols) {
                const cplx z = y * std::conj(prev) * cplx(0.0, -1.0);
                llr.push_back(scale * z.real());
                prev = y;
            }
            break;
        }
        case Modulation::Pi4Qpsk: {
            llr.reserve(symbols.size() * 2);
            const cplx derot = std::polar(1.0, -std::numbers::pi / 4.0);
            cplx prev(1.0, 0.0);
            for (const auto& y : symbols) {
                const cplx z = y * std::conj(prev) * derot;
                llr.push_back(scale * (z.real() + z.imag()));
                llr.push_back(scale * (z.real() - z.imag()));
                prev = y;
            }
            break;
        }
    }
    return llr;
}

}  // namespace nbiot
