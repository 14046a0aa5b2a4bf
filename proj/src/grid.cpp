#include "nbiot/grid.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace nbiot {

const char* usage_name(Usage u) {
    switch (u) {
        case Usage::Unused: return "unused";
        case Usage::NbData: return "nbdata";
        case Usage::Nrs: return "nrs";
        case Usage::LteCrs: return "ltecrs";
        case Usage::LtePdcch: return "ltepdcch";
        case Usage::Punctured: return "punctured";
    }
    return "?";
}

CellConfig CellConfig::standalone(int nb_pcid) {
    CellConfig c;
    c.nb_pcid = nb_pcid;
    c.lte_pcid = nb_pcid;
    c.deployment.mode = DeploymentMode::StandAlone;
    c.lte_pdcch_symbols = 0;
    c.validate();
    return c;
}

CellConfig CellConfig::inband(int nb_pcid, int lte_bandwidth_mhz, int prb_index, int crs_ports,
                              int pdcch_symbols) {
    CellConfig c;
    c.nb_pcid = nb_pcid;
    c.lte_pcid = nb_pcid;
    c.deployment = {DeploymentMode::InBand, lte_bandwidth_mhz, prb_index, true};
    c.lte_crs_ports = crs_ports;
    c.lte_pdcch_symbols = pdcch_symbols;
    c.validate();
    return c;
}

void CellConfig::validate() const {
    if (nb_pcid < 0 || nb_pcid >= kNumPcid || lte_pcid < 0 || lte_pcid >= kNumPcid) {
        throw std::invalid_argument("PCID out of range");
    }
    deployment.validate();
    if (lte_crs_ports != 1 && lte_crs_ports != 2 && lte_crs_ports != 4) {
        throw std::invalid_argument("CRS ports must be 1, 2 or 4");
    }
    if (lte_pdcch_symbols < 0 || lte_pdcch_symbols > 3) {
        throw std::invalid_argument("PDCCH symbols must be 0..3");
    }
    if (nrs_ports != 1 && nrs_ports != 2) {
        throw std::invalid_argument("NRS ports must be 1 or 2");
    }
    if (deployment.mode != DeploymentMode::InBand && lte_pdcch_symbols != 0) {
        throw std::invalid_argument("only in-band cells reserve a control region");
    }
}

int ResourceGrid::count(Usage u) const {
    return static_cast<int>(std::count(usage.begin(), usage.end(), u));
}

SubframeRole subframe_role(const TimingPosition& position) {
    if (position.subframe == 0) {
        return SubframeRole::Npbch;
    }
    if (position.subframe == 5) {
        return SubframeRole::Npss;
    }
    if (position.subframe == 9 && position.frame % 2 == 0) {
        return SubframeRole::Nsss;
    }
    return SubframeRole::Pool;
}

bool LteReserved::contains(int subcarrier, int symbol) const {
    const RePos p{subcarrier, symbol};
    return std::binary_search(crs.begin(), crs.end(), p) || std::binary_search(pdcch.begin(), pdcch.end(), p);
}

LteReserved lte_reserved_elements(const CellConfig& cell) {
    LteReserved out;
    if (!cell.lte_reserved_active()) {
        return out;
    }
    const int vshift = cell.lte_pcid % 6;
    // (symbol, comb offset) pairs per port: ports 0/1 in symbols {0,4,7,11},
    // ports 2/3 in symbols {1,8}
    struct Comb {
        int symbol;
        int offset;
    };
    std::vector<Comb> combs;
    auto add_port = [&](std::initializer_list<Comb> list) {
        combs.insert(combs.end(), list.begin(), list.end());
    };
    add_port({{0, 0}, {4, 3}, {7, 0}, {11, 3}});  // port 0
    if (cell.lte_crs_ports >= 2) {
        add_port({{0, 3}, {4, 0}, {7, 3}, {11, 0}});  // port 1
    }
    if (cell.lte_crs_ports == 4) {
        add_port({{1, 0}, {8, 3}});   // port 2
        add_port({{1, 3}, {8, 0}});   // port 3
    }
    for (const auto& c : combs) {
        for (int k = (vshift + c.offset) % 6; k < kSubcarriers; k += 6) {
            out.crs.push_back({k, c.symbol});
        }
    }
    for (int l = 0; l < cell.lte_pdcch_symbols; ++l) {
        for (int k = 0; k < kSubcarriers; ++k) {
            out.pdcch.push_back({k, l});
        }
    }
    std::sort(out.crs.begin(), out.crs.end());
    out.crs.erase(std::unique(out.crs.begin(), out.crs.end()), out.crs.end());
    std::sort(out.pdcch.begin(), out.pdcch.end());
    return out;
}

ResourceGrid make_subframe(SubframeRole role, const CellConfig& cell) {
    ResourceGrid grid;
    grid.role = role;
    const auto reserved = lte_reserved_elements(cell);
    for (const auto& p : reserved.crs) {
        grid.usage_at(p.subcarrier, p.symbol) = Usage::LteCrs;
    }
    for (const auto& p : reserved.pdcch) {
        auto& u = grid.usage_at(p.subcarrier, p.symbol);
        if (u == Usage::Unused) {
            u = Usage::LtePdcch;
        }
    }
    return grid;
}

std::vector<RePos> nrs_positions(const CellConfig& cell, int port) {
    // last two symbols of each slot; comb offset from the NB-PCID, port 1
    // shifted by 3 subcarriers
    const int base = (cell.nb_pcid + 3 * port) % 6;
    std::vector<RePos> out;
    for (const int l : {5, 6, 12, 13}) {
        out.push_back({base, l});
        out.push_back({base + 6, l});
    }
    std::sort(out.begin(), out.end());
    return out;
}

cplx nrs_value(const CellConfig& cell, int port, int position_index) {
    const auto seq = gold_qpsk(static_cast<std::uint32_t>(cell.nb_pcid) * 16u + 8u + static_cast<std::uint32_t>(port),
                               8);
    return seq[static_cast<std::size_t>(position_index) % seq.size()];
}

void insert_nrs(ResourceGrid& grid, const CellConfig& cell) {
    if (grid.role == SubframeRole::Npss || grid.role == SubframeRole::Nsss) {
        return;  // NRS only accompanies NPBCH/NPDCCH/NPDSCH
    }
    for (int port = 0; port < cell.nrs_ports; ++port) {
        const auto positions = nrs_positions(cell, port);
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const auto& p = positions[i];
            grid.at(p.subcarrier, p.symbol) = nrs_value(cell, port, static_cast<int>(i));
            grid.usage_at(p.subcarrier, p.symbol) = Usage::Nrs;
        }
    }
}

namespace {

bool is_nrs_position(const CellConfig& cell, int subcarrier, int symbol) {
    for (int port = 0; port < cell.nrs_ports; ++port) {
        const int base = (cell.nb_pcid + 3 * port) % 6;
        if ((symbol == 5 || symbol == 6 || symbol == 12 || symbol == 13) &&
            (subcarrier == base || subcarrier == base + 6)) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<RePos> data_positions(ChannelKind kind, const CellConfig& cell) {
    CellConfig layout = cell;
    int first_symbol = 0;
    switch (kind) {
        case ChannelKind::Npss:
        case ChannelKind::Nsss:
            throw std::invalid_argument("sync signals use fixed positions, not data mapping");
        case ChannelKind::Npbch:
            // Decodable knowing only NB-PCID and the deployment hypothesis:
            // avoid the control region and the worst-case CRS/NRS reservation.
            first_symbol = 3;
            if (layout.lte_reserved_active()) {
                layout.lte_crs_ports = 4;
            }
            layout.nrs_ports = 2;
            break;
        case ChannelKind::Npdcch:
        case ChannelKind::Npdsch:
            first_symbol = cell.lte_pdcch_symbols;
            break;
    }
    const auto reserved = lte_reserved_elements(layout);
    std::vector<RePos> out;
    for (int l = first_symbol; l < kSymbolsPerSubframe; ++l) {
        for (int k = 0; k < kSubcarriers; ++k) {
            if (reserved.contains(k, l)) {
                continue;
            }
            if (is_nrs_position(layout, k, l)) {
                continue;
            }
            out.push_back({k, l});
        }
    }
    return out;
}

int nb_data_capacity(ChannelKind kind, const CellConfig& cell) {
    return static_cast<int>(data_positions(kind, cell).size());
}

namespace {

void map_sync_signal(ResourceGrid& grid, std::span<const cplx> symbols, ChannelKind kind,
                     const CellConfig& cell) {
    const int subcarriers = (kind == ChannelKind::Npss) ? kNpssSubcarriers : kSubcarriers;
    if (static_cast<int>(symbols.size()) != 11 * subcarriers) {
        throw std::invalid_argument("sync signal block has the wrong size");
    }
    const auto reserved = lte_reserved_elements(cell);
    std::size_t i = 0;
    for (int l = 3; l < kSymbolsPerSubframe; ++l) {
        for (int k = 0; k < subcarriers; ++k, ++i) {
            if (reserved.contains(k, l)) {
                // collision with LTE CRS: punctured at the base station
                grid.at(k, l) = 0.0;
                grid.usage_at(k, l) = Usage::Punctured;
            } else {
                grid.at(k, l) = symbols[i];
                grid.usage_at(k, l) = Usage::NbData;
            }
        }
    }
}

}  // namespace

void map_channel(ResourceGrid& grid, std::span<const cplx> channel_symbols, ChannelKind kind,
                 const CellConfig& cell) {
    switch (kind) {
        case ChannelKind::Npss:
            if (grid.role != SubframeRole::Npss) {
                throw std::invalid_argument("grid subframe role does not carry NPSS");
            }
            map_sync_signal(grid, channel_symbols, kind, cell);
            return;
        case ChannelKind::Nsss:
            if (grid.role != SubframeRole::Nsss) {
                throw std::invalid_argument("grid subframe role does not carry NSSS");
            }
            map_sync_signal(grid, channel_symbols, kind, cell);
            return;
        case ChannelKind::Npbch:
            if (grid.role != SubframeRole::Npbch) {
                throw std::invalid_argument("grid subframe role does not carry NPBCH");
            }
            break;
        case ChannelKind::Npdcch:
        case ChannelKind::Npdsch:
            if (grid.role != SubframeRole::Pool) {
                throw std::invalid_argument("data channels map onto pool subframes only");
            }
            break;
    }
    const auto positions = data_positions(kind, cell);
    if (channel_symbols.size() > positions.size()) {
        throw std::invalid_argument("channel symbols exceed the subframe capacity");
    }
    for (std::size_t i = 0; i < channel_symbols.size(); ++i) {
        grid.at(positions[i].subcarrier, positions[i].symbol) = channel_symbols[i];
        grid.usage_at(positions[i].subcarrier, positions[i].symbol) = Usage::NbData;
    }
}

std::vector<cplx> demap_channel(const ResourceGrid& grid, ChannelKind kind, const CellConfig& cell) {
    const auto positions = data_positions(kind, cell);
    std::vector<cplx> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        out.push_back(grid.at(p.subcarrier, p.symbol));
    }
    return out;
}

void dump_grid_csv(const std::string& path, std::span<const ResourceGrid> grids) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    f << "subframe,symbol,subcarrier,usage,re,im\n";
    for (std::size_t s = 0; s < grids.size(); ++s) {
        for (int l = 0; l < kSymbolsPerSubframe; ++l) {
            for (int k = 0; k < kSubcarriers; ++k) {
                const auto v = grids[s].at(k, l);
                f << s << ',' << l << ',' << k << ',' << usage_name(grids[s].usage_at(k, l)) << ','
                  << v.real() << ',' << v.imag() << '\n';
            }
        }
    }
}

}  // namespace nbiot
