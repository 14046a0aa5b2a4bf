#include "nbiot/waveform.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nbiot {

namespace {

constexpr char kMagic[4] = {'N', 'B', 'I', 'Q'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_iq(const std::string& path, const Waveform& wave) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    f.write(kMagic, 4);
    f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    f.write(reinterpret_cast<const char*>(&wave.sample_rate_hz), sizeof(double));
    f.write(reinterpret_cast<const char*>(&wave.carrier_offset_hz), sizeof(double));
    const std::uint64_t count = wave.samples.size();
    f.write(reinterpret_cast<const char*>(&count), sizeof(count));
    std::vector<float> buf(2 * wave.samples.size());
    for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        buf[2 * i] = static_cast<float>(wave.samples[i].real());
        buf[2 * i + 1] = static_cast<float>(wave.samples[i].imag());
    }
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Waveform read_iq(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    char magic[4];
    std::uint32_t version = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (std::memcmp(magic, kMagic, 4) != 0 || version != kVersion) {
        throw std::runtime_error(path + " is not an NBIQ v1 file");
    }
    Waveform wave;
    std::uint64_t count = 0;
    f.read(reinterpret_cast<char*>(&wave.sample_rate_hz), sizeof(double));
    f.read(reinterpret_cast<char*>(&wave.carrier_offset_hz), sizeof(double));
    f.read(reinterpret_cast<char*>(&count), sizeof(count));
    std::vector<float> buf(2 * count);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) {
        throw std::runtime_error(path + " truncated");
    }
    wave.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        wave.samples[i] = {buf[2 * i], buf[2 * i + 1]};
    }
    return wave;
}

}  // namespace nbiot
