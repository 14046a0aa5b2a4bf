#include "nbiot/numerology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nbiot {

namespace {

constexpr double kRasterHz = 100e3;
constexpr double kPrbWidthHz = 180e3;
constexpr double kAnchorLimitHz = 7.5e3;

}  // namespace

int prb_count(int lte_bandwidth_mhz) {
    switch (lte_bandwidth_mhz) {
        case 3: return 15;
        case 5: return 25;
        case 10: return 50;
        case 15: return 75;
        case 20: return 100;
        default:
            throw std::invalid_argument("unsupported LTE bandwidth: " + std::to_string(lte_bandwidth_mhz) + " MHz");
    }
}

double prb_center_offset_hz(int lte_bandwidth_mhz, int prb_index) {
    const int n = prb_count(lte_bandwidth_mhz);
    if (prb_index < 0 || prb_index >= n) {
        throw std::invalid_argument("PRB index out of range");
    }
    if (n % 2 == 0) {
        // DC subcarrier sits on the grid; PRB just above DC is centered at
        // 6.5 subcarrier spacings (97.5 kHz).
        if (prb_index >= n / 2) {
            return 97.5e3 + kPrbWidthHz * (prb_index - n / 2);
        }
        return -(97.5e3 + kPrbWidthHz * (n / 2 - 1 - prb_index));
    }
    // Odd PRB count: grid is shifted half a subcarrier, middle PRB straddles DC.
    return kPrbWidthHz * (prb_index - (n - 1) / 2) + 7.5e3;
}

double distance_to_raster_hz(double freq_hz) {
    const double nearest = std::round(freq_hz / kRasterHz) * kRasterHz;
    return freq_hz - nearest;
}

std::vector<int> anchor_prb_candidates(int lte_bandwidth_mhz) {
    const int n = prb_count(lte_bandwidth_mhz);
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        const double center = prb_center_offset_hz(lte_bandwidth_mhz, i);
        if (std::abs(center) < 3.0 * kPrbWidthHz) {
            continue;  // middle 6 PRBs carry LTE sync/broadcast
        }
        if (std::abs(distance_to_raster_hz(center)) <= kAnchorLimitHz) {
            out.push_back(i);
        }
    }
    return out;
}

void DeploymentConfig::validate() const {
    if (mode == DeploymentMode::StandAlone) {
        return;
    }
    const int n = prb_count(lte_bandwidth_mhz);  // throws on bad bandwidth
    if (mode == DeploymentMode::InBand) {
        if (prb_index < 0 || prb_index >= n) {
            throw std::invalid_argument("in-band PRB index out of range");
        }
        if (is_anchor) {
            const auto anchors = anchor_prb_candidates(lte_bandwidth_mhz);
            if (std::find(anchors.begin(), anchors.end(), prb_index) == anchors.end()) {
                throw std::invalid_argument("PRB " + std::to_string(prb_index) +
                                            " is not a valid anchor for " +
                                            std::to_string(lte_bandwidth_mhz) + " MHz");
            }
        }
    }
}

double raster_offset_hz(const DeploymentConfig& config) {
    config.validate();
    switch (config.mode) {
        case DeploymentMode::StandAlone:
            return 0.0;
        case DeploymentMode::InBand:
            return distance_to_raster_hz(prb_center_offset_hz(config.lte_bandwidth_mhz, config.prb_index));
        case DeploymentMode::GuardBand: {
            // Guard-band slots continue the in-band 180 kHz grid outward;
            // the anchor sits in the first outward slot near the raster.
            const int n = prb_count(config.lte_bandwidth_mhz);
            for (int t = 0; t < 10; ++t) {
                const double center = (n % 2 == 0) ? 97.5e3 + kPrbWidthHz * (n / 2 + t)
                                                   : kPrbWidthHz * ((n + 1) / 2 + t) + 7.5e3;
                const double d = distance_to_raster_hz(center);
                if (std::abs(d) <= kAnchorLimitHz) {
                    return d;
                }
            }
            throw std::logic_error("no raster-aligned guard-band slot found");
        }
    }
    return 0.0;
}

TimingPosition timing_advance(const TimingPosition& position, int subframes) {
    if (subframes < 0) {
        throw std::invalid_argument("cannot advance by a negative subframe count");
    }
    TimingPosition out = position;
    const long total = position.absolute_subframe() + subframes;
    const long wrapped = total % (static_cast<long>(kFrameRange) * kSubframesPerFrame);
    out.frame = static_cast<int>(wrapped / kSubframesPerFrame);
    out.subframe = static_cast<int>(wrapped % kSubframesPerFrame);
    return out;
}

}  // namespace nbiot
