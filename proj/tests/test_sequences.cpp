#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "nbiot/sequences.hpp"

using namespace nbiot;

namespace {

// brute-force periodic autocorrelation at a given lag
cplx periodic_autocorr(const std::vector<cplx>& v, int lag) {
    const int n = static_cast<int>(v.size());
    cplx acc(0, 0);
    for (int i = 0; i < n; ++i) {
        acc += v[i] * std::conj(v[(i + lag) % n]);
    }
    return acc;
}

double normalized_cross(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc(0, 0);
    double ea = 0, eb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * std::conj(b[i]);
        ea += std::norm(a[i]);
        eb += std::norm(b[i]);
    }
    return std::abs(acc) / std::sqrt(ea * eb);
}

}  // namespace

TEST_CASE("ZC basics") {
    const auto zc = generate_zc(11, 5);
    CHECK(zc.values.size() == 11);
    CHECK(zc.values[0].real() == doctest::Approx(1.0));
    CHECK(zc.values[0].imag() == doctest::Approx(0.0));
    for (const auto& v : zc.values) {
        CHECK(std::abs(v) == doctest::Approx(1.0));
    }
    for (int lag = 1; lag < 11; ++lag) {
        CHECK(std::abs(periodic_autocorr(zc.values, lag)) < 1e-9 * 11);
    }
}

TEST_CASE("ZC argument validation") {
    CHECK_THROWS_AS(generate_zc(12, 5), std::invalid_argument);
    CHECK_THROWS_AS(generate_zc(9, 3), std::invalid_argument);  // gcd(3,9)=3
}

TEST_CASE("NPSS block structure") {
    const auto npss = generate_npss();
    CHECK(npss.symbols.size() == 11);
    // every symbol is +/- the base sequence, never any other scaling
    for (int l = 0; l < 11; ++l) {
        for (int k = 0; k < 11; ++k) {
            const cplx expect = static_cast<double>(npss.code_cover[l]) * npss.base.values[k];
            CHECK(std::abs(npss.symbols[l][k] - expect) < 1e-12);
        }
        CHECK((npss.code_cover[l] == 1 || npss.code_cover[l] == -1));
    }
    // zero-lag energy of the whole block
    double energy = 0;
    for (const auto& row : npss.symbols) {
        for (const auto& v : row) {
            energy += std::norm(v);
        }
    }
    CHECK(energy == doctest::Approx(121.0));
    // deterministic
    const auto again = generate_npss();
    CHECK(again.code_cover == npss.code_cover);
}

TEST_CASE("NSSS structure and determinism") {
    const auto s = generate_nsss(17, 2);
    CHECK(s.values.size() == 132);
    for (const auto& v : s.values) {
        CHECK(std::abs(v) == doctest::Approx(1.0));
    }
    const auto again = generate_nsss(17, 2);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        CHECK(s.values[i] == again.values[i]);
    }
    CHECK_THROWS_AS(generate_nsss(17, 3), std::invalid_argument);
    CHECK_THROWS_AS(generate_nsss(504, 2), std::invalid_argument);
}

TEST_CASE("NSSS shift map injective over an 80 ms block") {
    // NSSS frames within 80 ms: 0, 2, 4, 6 -> distinct shifts
    CHECK(nsss_shift_index(0) == 0);
    CHECK(nsss_shift_index(2) == 1);
    CHECK(nsss_shift_index(4) == 2);
    CHECK(nsss_shift_index(6) == 3);
    CHECK(nsss_shift_index(8) == 0);  // next block repeats
}

TEST_CASE("NSSS cross-correlation between cells") {
    // brute force over the 16x16 pair matrix
    std::vector<std::vector<cplx>> seqs;
    for (int pcid = 0; pcid < 16; ++pcid) {
        seqs.push_back(generate_nsss(pcid, 0).values);
    }
    for (int a = 0; a < 16; ++a) {
        for (int b = 0; b < 16; ++b) {
            if (a == b) {
                continue;
            }
            CHECK(normalized_cross(seqs[a], seqs[b]) < 0.5);
        }
    }
}

TEST_CASE("NSSS frames related by cyclic shift of the ZC part") {
    // same pcid, frames 0 and 2: scrambling identical, ZC part shifted by 33
    const int pcid = 5;
    const auto a = generate_nsss(pcid, 0);
    const auto b = generate_nsss(pcid, 2);
    const auto scr_bits = gold_sequence(0x4E555u + pcid / 126, 132);
    auto descramble = [&](const std::vector<cplx>& v, int n) {
        return v[n] * (scr_bits[n] ? -1.0 : 1.0);
    };
    for (int n = 0; n < 132; ++n) {
        const cplx zb = descramble(b.values, n);
        const cplx za = descramble(a.values, (n + 33) % 132);
        CHECK(std::abs(zb - za) < 1e-12);
    }
    // distinct shifts produce distinct sequences
    CHECK(normalized_cross(a.values, b.values) < 0.99);
}

TEST_CASE("DMRS positions and determinism") {
    const auto f1 = generate_dmrs(NpuschFormat::F1, 0, 17);
    CHECK(f1.symbol_indexes == std::vector<int>{3});
    const auto f2 = generate_dmrs(NpuschFormat::F2, 0, 17);
    CHECK(f2.symbol_indexes == std::vector<int>{2, 3, 4});

    const auto again = generate_dmrs(NpuschFormat::F1, 0, 17);
    CHECK(f1.values == again.values);
    for (const auto& symbol : f2.values) {
        for (const auto& v : symbol) {
            CHECK(std::abs(v) == doctest::Approx(1.0));
        }
    }
    // multi-tone variant carries one value per tone
    const auto mt = generate_dmrs(NpuschFormat::F1, 3, 17, 12);
    CHECK(mt.values[0].size() == 12);
}

TEST_CASE("gold sequence is deterministic and balanced-ish") {
    const auto a = gold_sequence(12345, 1000);
    const auto b = gold_sequence(12345, 1000);
    CHECK(a == b);
    int ones = 0;
    for (const auto bit : a) {
        ones += bit;
    }
    CHECK(ones > 400);
    CHECK(ones < 600);
    const auto c = gold_sequence(12346, 1000);
    int diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += a[i] != c[i];
    }
    CHECK(diff > 400);
}
