#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nbiot/coding.hpp"

using namespace nbiot;

namespace {

// Independent oracle: a tail-biting convolutional code is a circular
// convolution of the input with the generator taps.
Bits circular_conv_oracle(const Bits& in, int generator_octal) {
    const int k = static_cast<int>(in.size());
    Bits out(k);
    for (int n = 0; n < k; ++n) {
        unsigned acc = 0;
        for (int j = 0; j < 7; ++j) {
            const unsigned tap = (static_cast<unsigned>(generator_octal) >> (6 - j)) & 1u;
            acc ^= tap & in[((n - j) % k + k) % k];
        }
        out[n] = static_cast<std::uint8_t>(acc & 1u);
    }
    return out;
}

std::vector<double> bits_to_llr(const Bits& bits, double magnitude = 10.0) {
    std::vector<double> llr(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        llr[i] = bits[i] ? -magnitude : magnitude;
    }
    return llr;
}

Bits xor_bits(const Bits& a, const Bits& b) {
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] ^ b[i];
    }
    return out;
}

}  // namespace

TEST_CASE("TBCC all-zero input gives all-zero codeword") {
    TransportBlock tb = make_transport_block(Bits(40, 0), Channel::Npdsch);
    const auto coded = tbcc_encode(tb);
    CHECK(coded.bits.size() == 3 * (40 + 24));
    for (const auto b : coded.bits) {
        CHECK(b == 0);
    }
}

TEST_CASE("TBCC output length is 3*(tbs+24)") {
    for (const int tbs : {16, 40, 120, 680}) {
        const auto tb = random_transport_block(tbs, Channel::Npdsch, tbs);
        CHECK(tbcc_encode(tb).bits.size() == static_cast<std::size_t>(3 * (tbs + 24)));
    }
}

TEST_CASE("TBCC equals the circular-convolution oracle (tail-biting)") {
    std::mt19937_64 eng(7);
    const int generators[3] = {0133, 0171, 0165};
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 40 + static_cast<int>(eng() % 200);
        Bits in(k);
        for (auto& b : in) {
            b = static_cast<std::uint8_t>(eng() & 1u);
        }
        const auto coded = tbcc_encode_bits(in);
        for (int g = 0; g < 3; ++g) {
            const auto expect = circular_conv_oracle(in, generators[g]);
            for (int n = 0; n < k; ++n) {
                REQUIRE(coded[g * k + n] == expect[n]);
            }
        }
    }
}

TEST_CASE("TBCC linearity") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Bits a(64), b(64);
        for (int i = 0; i < 64; ++i) {
            a[i] = static_cast<std::uint8_t>(eng() & 1u);
            b[i] = static_cast<std::uint8_t>(eng() & 1u);
        }
        const auto ca = tbcc_encode_bits(a);
        const auto cb = tbcc_encode_bits(b);
        const auto cx = tbcc_encode_bits(xor_bits(a, b));
        CHECK(cx == xor_bits(ca, cb));
    }
}

TEST_CASE("TBCC noiseless roundtrip") {
    for (const int tbs : {16, 40, 256, 680}) {
        const auto tb = random_transport_block(tbs, Channel::Npdsch, 100 + tbs);
        const auto coded = tbcc_encode(tb);
        const auto rm = rate_match(coded, static_cast<int>(coded.bits.size()));
        const auto res = viterbi_decode(bits_to_llr(rm), tbs, Channel::Npdsch);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
}

TEST_CASE("TBCC recovers from two flipped bits (length-40 payload)") {
    std::mt19937_64 eng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto tb = random_transport_block(40, Channel::Npdsch, 300 + trial);
        const auto coded = tbcc_encode(tb);
        auto rm = rate_match(coded, static_cast<int>(coded.bits.size()));
        const auto i = eng() % rm.size();
        auto j = eng() % rm.size();
        while (j == i) {
            j = eng() % rm.size();
        }
        rm[i] ^= 1;
        rm[j] ^= 1;
        const auto res = viterbi_decode(bits_to_llr(rm), 40, Channel::Npdsch);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
}

TEST_CASE("random noise never passes the CRC") {
    std::mt19937_64 eng(17);
    std::normal_distribution<double> noise(0.0, 1.0);
    int false_passes = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> llr(3 * (40 + 24));
        for (auto& v : llr) {
            v = noise(eng);
        }
        if (viterbi_decode(llr, 40, Channel::Npdsch).crc_ok) {
            ++false_passes;
        }
    }
    CHECK(false_passes == 0);
}

TEST_CASE("viterbi argument checks") {
    CHECK_THROWS_AS(viterbi_decode({}, 40, Channel::Npdsch), std::invalid_argument);
    std::vector<double> llr(10, 1.0);
    CHECK_THROWS_AS(viterbi_decode(llr, 681, Channel::Npdsch), std::invalid_argument);
    CHECK_THROWS_AS(make_transport_block(Bits(681, 0), Channel::Npdsch), std::invalid_argument);
}

TEST_CASE("turbo noiseless roundtrip for all supported uplink TBS") {
    for (const int tbs : {16, 24, 32, 56, 88, 120, 256, 328, 440, 680, 1000}) {
        const auto tb = random_transport_block(tbs, Channel::NpuschF1, 900 + tbs);
        const auto coded = turbo_encode(tb);
        CHECK(coded.bits.size() == static_cast<std::size_t>(3 * (tbs + 24) + 12));
        const auto rm = rate_match(coded, static_cast<int>(coded.bits.size()));
        const auto res = turbo_decode(bits_to_llr(rm), tbs, 6);
        CHECK(res.crc_ok);
        CHECK(res.tb.payload_bits == tb.payload_bits);
    }
}

TEST_CASE("turbo iteration count validation") {
    std::vector<double> llr(3 * 40 + 12, 1.0);
    CHECK_THROWS_AS(turbo_decode(llr, 16, 0), std::invalid_argument);
}

TEST_CASE("turbo BLER at Eb/N0 = 4 dB, TBS 256") {
    // frozen regression baseline for this decoder
    const int tbs = 256;
    const double rate = static_cast<double>(tbs + 24) / (3.0 * (tbs + 24) + 12.0);
    const double ebn0 = std::pow(10.0, 4.0 / 10.0);
    const double sigma = std::sqrt(1.0 / (2.0 * rate * ebn0));
    std::mt19937_64 eng(23);
    std::normal_distribution<double> noise(0.0, sigma);
    int errors = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto tb = random_transport_block(tbs, Channel::NpuschF1, 5000 + t);
        const auto coded = turbo_encode(tb);
        const auto rm = rate_match(coded, static_cast<int>(coded.bits.size()));
        std::vector<double> llr(rm.size());
        for (std::size_t i = 0; i < rm.size(); ++i) {
            const double y = (rm[i] ? -1.0 : 1.0) + noise(eng);
            llr[i] = 2.0 * y / (sigma * sigma);
        }
        const auto res = turbo_decode(llr, tbs, 6);
        if (!res.crc_ok || res.tb.payload_bits != tb.payload_bits) {
            ++errors;
        }
    }
    CHECK(errors < 10);  // BLER < 1e-2
}

TEST_CASE("repetition code") {
    const auto coded = repetition_encode(1, 16);
    CHECK(coded.bits == Bits(16, 1));
    CHECK(repetition_decode(bits_to_llr(coded.bits)) == 1);

    // 40% of soft values flipped: majority still wins
    auto llr = bits_to_llr(coded.bits, 1.0);
    for (int i = 0; i < 6; ++i) {
        llr[i] = -llr[i];
    }
    CHECK(repetition_decode(llr) == 1);
    CHECK_THROWS_AS(repetition_encode(1, 0), std::invalid_argument);
}

TEST_CASE("rate matching identity, doubling, determinism") {
    const auto tb = random_transport_block(40, Channel::Npdsch, 31);
    const auto coded = tbcc_encode(tb);
    const int n = static_cast<int>(coded.bits.size());

    const auto full = rate_match(coded, n);
    // a permutation of the buffer: every coded bit appears exactly once
    std::vector<int> ones_in(2, 0), ones_out(2, 0);
    for (int i = 0; i < n; ++i) {
        ones_in[coded.bits[i]]++;
        ones_out[full[i]]++;
    }
    CHECK(ones_in == ones_out);

    const auto twice = rate_match(coded, 2 * n);
    for (int i = 0; i < n; ++i) {
        CHECK(twice[i] == full[i]);
        CHECK(twice[n + i] == full[i]);
    }

    CHECK(rate_match(coded, 100) == rate_match(coded, 100));  // no RV cycling
    CHECK_THROWS_AS(rate_match(coded, 0), std::invalid_argument);
}

TEST_CASE("derate matching inverts rate matching") {
    const auto tb = random_transport_block(56, Channel::Npdsch, 37);
    const auto coded = tbcc_encode(tb);
    const auto rm = rate_match(coded, 500);  // more than the buffer: wraps
    const auto mother = derate_match(bits_to_llr(rm, 1.0), CodingScheme::Tbcc, coded.info_bits);
    REQUIRE(mother.size() == coded.bits.size());
    for (std::size_t i = 0; i < mother.size(); ++i) {
        CHECK((mother[i] > 0) == (coded.bits[i] == 0));
    }
}

TEST_CASE("QPSK roundtrip and argument checks") {
    Bits bits = {0, 1, 1, 0, 1, 1, 0, 0};
    const auto mod = modulate(bits, Modulation::Qpsk);
    CHECK(mod.symbols.size() == 4);
    for (const auto& s : mod.symbols) {
        CHECK(std::abs(s) == doctest::Approx(1.0));
    }
    const auto llr = demodulate(mod.symbols, Modulation::Qpsk, 1e-9);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        CHECK((llr[i] < 0) == (bits[i] == 1));
    }
    CHECK_THROWS_AS(modulate(Bits{1, 0, 1}, Modulation::Qpsk), std::invalid_argument);
}

TEST_CASE("pi/2-BPSK phase steps and roundtrip") {
    std::mt19937_64 eng(41);
    Bits bits(64);
    for (auto& b : bits) {
        b = static_cast<std::uint8_t>(eng() & 1u);
    }
    const auto mod = modulate(bits, Modulation::Pi2Bpsk);
    cplx prev(1.0, 0.0);
    for (const auto& s : mod.symbols) {
        CHECK(std::abs(s) == doctest::Approx(1.0));
        const double delta = std::arg(s * std::conj(prev));
        CHECK(std::abs(std::abs(delta) - std::numbers::pi / 2) < 1e-9);
        prev = s;
    }
    const auto llr = demodulate(mod.symbols, Modulation::Pi2Bpsk, 1e-9);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        CHECK((llr[i] < 0) == (bits[i] == 1));
    }
}

TEST_CASE("pi/4-QPSK phase deltas over all 2-symbol bit patterns") {
    for (int pattern = 0; pattern < 16; ++pattern) {
        Bits bits = {static_cast<std::uint8_t>((pattern >> 3) & 1), static_cast<std::uint8_t>((pattern >> 2) & 1),
                     static_cast<std::uint8_t>((pattern >> 1) & 1), static_cast<std::uint8_t>(pattern & 1)};
        const auto mod = modulate(bits, Modulation::Pi4Qpsk);
        REQUIRE(mod.symbols.size() == 2);
        cplx prev(1.0, 0.0);
        for (const auto& s : mod.symbols) {
            const double delta = std::abs(std::arg(s * std::conj(prev)));
            const bool quarter = std::abs(delta - std::numbers::pi / 4) < 1e-9;
            const bool three_quarter = std::abs(delta - 3 * std::numbers::pi / 4) < 1e-9;
            CHECK((quarter || three_quarter));
            prev = s;
        }
        const auto llr = demodulate(mod.symbols, Modulation::Pi4Qpsk, 1e-9);
        for (std::size_t i = 0; i < bits.size(); ++i) {
            CHECK((llr[i] < 0) == (bits[i] == 1));
        }
    }
}

TEST_CASE("LLR hard decisions match modulated bits as noise vanishes") {
    std::mt19937_64 eng(43);
    for (const auto scheme : {Modulation::Qpsk, Modulation::Pi2Bpsk, Modulation::Pi4Qpsk}) {
        Bits bits(128);
        for (auto& b : bits) {
            b = static_cast<std::uint8_t>(eng() & 1u);
        }
        const auto mod = modulate(bits, scheme);
        const auto llr = demodulate(mod.symbols, scheme, 1e-12);
        REQUIRE(llr.size() == bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            CHECK((llr[i] < 0) == (bits[i] == 1));
        }
    }
}
