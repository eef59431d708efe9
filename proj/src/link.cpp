#include "leo_madrl/link.hpp"

#include <cmath>
#include <stdexcept>

namespace leo {

void LinkBudgetParams::validate() const {
    if (!(symbol_rate_baud > 0.0)) throw std::invalid_argument("symbol_rate must be > 0");
    if (!(noise_temperature_k > 0.0)) throw std::invalid_argument("noise_temperature must be > 0");
    if (!(frequency_ghz > 0.0)) throw std::invalid_argument("frequency must be > 0");
}

ModcodTable::ModcodTable(std::vector<ModcodRow> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("MODCOD table is empty");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (!(rows_[i].spectral_efficiency > 0.0))
            throw std::invalid_argument("MODCOD row " + rows_[i].name + ": efficiency must be > 0");
        if (i == 0) continue;
        if (!(rows_[i].required_snr_db > rows_[i - 1].required_snr_db))
            throw std::invalid_argument("MODCOD rows must have strictly increasing required SNR");
        if (!(rows_[i].spectral_efficiency > rows_[i - 1].spectral_efficiency))
            throw std::invalid_argument("MODCOD rows must have strictly increasing efficiency");
    }
}

ModcodTable default_modcod_table() {
    return ModcodTable({
        {"QPSK-1/4", 0.49, -2.35},
        {"QPSK-1/2", 0.99, 1.00},
        {"QPSK-3/4", 1.49, 4.03},
        {"8PSK-2/3", 1.98, 6.62},
        {"8PSK-5/6", 2.48, 9.35},
        {"16APSK-3/4", 2.97, 10.21},
        {"16APSK-8/9", 3.52, 12.89},
        {"32APSK-3/4", 4.45, 13.05},
    });
}

double free_space_path_loss_db(double distance_km, double frequency_ghz) {
    if (!(distance_km > 0.0) || !(frequency_ghz > 0.0))
        throw std::domain_error("free-space path loss needs positive distance and frequency");
    return 92.45 + 20.0 * std::log10(distance_km) + 20.0 * std::log10(frequency_ghz);
}

double link_snr_db(const LinkBudgetParams& p, double distance_km) {
    const double noise_dbw =
        kBoltzmannDbW + 10.0 * std::log10(p.noise_temperature_k) + 10.0 * std::log10(p.symbol_rate_baud);
    return p.tx_power_dbw + p.tx_gain_dbi + p.rx_gain_dbi - free_space_path_loss_db(distance_km, p.frequency_ghz) -
           p.losses_misc_db - noise_dbw;
}

std::optional<ModcodRow> select_modcod(const ModcodTable& table, double snr_db) {
    if (table.empty()) throw std::invalid_argument("MODCOD table is empty");
    const auto& rows = table.rows();
    std::optional<ModcodRow> best;
    for (const auto& row : rows) {
        if (row.required_snr_db <= snr_db) best = row;
        else break;
    }
    return best;
}

double edge_data_rate_bps(const ModcodRow& row, double symbol_rate_baud) {
    return row.spectral_efficiency * symbol_rate_baud;
}

std::optional<double> link_data_rate_bps(const LinkBudgetParams& params, const ModcodTable& table,
                                         double distance_km) {
    const auto row = select_modcod(table, link_snr_db(params, distance_km));
    if (!row) return std::nullopt;
    return edge_data_rate_bps(*row, params.symbol_rate_baud);
}

}  // namespace leo
