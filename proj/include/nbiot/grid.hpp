#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nbiot/numerology.hpp"
#include "nbiot/sequences.hpp"

namespace nbiot {

constexpr int kSubcarriers = 12;
constexpr int kSymbolsPerSubframe = 14;
constexpr int kElementsPerSubframe = kSubcarriers * kSymbolsPerSubframe;

enum class Usage : std::uint8_t { Unused, NbData, Nrs, LteCrs, LtePdcch, Punctured };
enum class SubframeRole { Npbch, Npss, Nsss, Pool };
enum class ChannelKind { Npss, Nsss, Npbch, Npdcch, Npdsch };

const char* usage_name(Usage u);

struct CellConfig {
    int nb_pcid = 0;
    int lte_pcid = 0;  // defaults to the identity relationship
    DeploymentConfig deployment;
    int lte_crs_ports = 2;
    int lte_pdcch_symbols = 3;
    int nrs_ports = 1;

    static CellConfig standalone(int nb_pcid);
    static CellConfig inband(int nb_pcid, int lte_bandwidth_mhz, int prb_index, int crs_ports = 2,
                             int pdcch_symbols = 3);

    bool lte_reserved_active() const { return deployment.mode == DeploymentMode::InBand; }
    void validate() const;
};

struct RePos {
    int subcarrier = 0;
    int symbol = 0;
    friend bool operator==(const RePos&, const RePos&) = default;
    friend auto operator<=>(const RePos&, const RePos&) = default;
};

struct ResourceGrid {
    std::array<cplx, kElementsPerSubframe> cells{};
    std::array<Usage, kElementsPerSubframe> usage{};
    SubframeRole role = SubframeRole::Pool;

    static int index(int subcarrier, int symbol) { return symbol * kSubcarriers + subcarrier; }
    cplx& at(int subcarrier, int symbol) { return cells[index(subcarrier, symbol)]; }
    const cplx& at(int subcarrier, int symbol) const { return cells[index(subcarrier, symbol)]; }
    Usage& usage_at(int subcarrier, int symbol) { return usage[index(subcarrier, symbol)]; }
    Usage usage_at(int subcarrier, int symbol) const { return usage[index(subcarrier, symbol)]; }

    int count(Usage u) const;
};

SubframeRole subframe_role(const TimingPosition& position);

/// Resource elements reserved by the legacy LTE cell in every subframe.
/// Empty for stand-alone and guard-band deployments.
struct LteReserved {
    std::vector<RePos> crs;    // all CRS positions, including those inside the control region
    std::vector<RePos> pdcch;  // the first lte_pdcch_symbols symbols
    bool contains(int subcarrier, int symbol) const;
};

LteReserved lte_reserved_elements(const CellConfig& cell);

/// Pre-stamp a fresh grid with the reserved-element labels for this cell.
ResourceGrid make_subframe(SubframeRole role, const CellConfig& cell);

/// NB-data element positions for a channel, in frequency-first order.
/// This is the shared mapping order for map_channel and demap_channel.
std::vector<RePos> data_positions(ChannelKind kind, const CellConfig& cell);

int nb_data_capacity(ChannelKind kind, const CellConfig& cell);

/// Map channel symbols onto the grid. NPSS/NSSS use their fixed positions
/// and are punctured where LTE CRS sits; NPBCH/NPDCCH/NPDSCH are mapped
/// around all reserved elements (no symbol loss).
void map_channel(ResourceGrid& grid, std::span<const cplx> channel_symbols, ChannelKind kind,
                 const CellConfig& cell);

/// Inverse of map_channel for the data channels: returns the symbols in
/// mapping order.
std::vector<cplx> demap_channel(const ResourceGrid& grid, ChannelKind kind, const CellConfig& cell);

std::vector<RePos> nrs_positions(const CellConfig& cell, int port);

/// Insert NRS into NPBCH/NPDCCH/NPDSCH subframes (no-op elsewhere).
void insert_nrs(ResourceGrid& grid, const CellConfig& cell);

/// Cell-seeded NRS value for one position (used for channel estimation).
cplx nrs_value(const CellConfig& cell, int port, int position_index);

void dump_grid_csv(const std::string& path, std::span<const ResourceGrid> grids);

}  // namespace nbiot
