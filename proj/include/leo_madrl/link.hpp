#pragma once

#include <optional>
#include <string>
#include <vector>

namespace leo {

inline constexpr double kBoltzmannDbW = -228.6;  // dBW/K/Hz

struct LinkBudgetParams {
    double tx_power_dbw = 10.0;
    double tx_gain_dbi = 38.0;
    double rx_gain_dbi = 38.0;
    double frequency_ghz = 26.0;
    double symbol_rate_baud = 20e6;
    double noise_temperature_k = 500.0;
    double losses_misc_db = 2.0;

    void validate() const;
};

struct ModcodRow {
    std::string name;
    double spectral_efficiency = 0.0;  // bits/symbol
    double required_snr_db = 0.0;      // Es/N0 threshold
};

// Rows ascending in both required SNR and spectral efficiency.
class ModcodTable {
public:
    ModcodTable() = default;
    // Throws std::invalid_argument if the rows are empty or not strictly
    // increasing in both columns.
    explicit ModcodTable(std::vector<ModcodRow> rows);

    const std::vector<ModcodRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

private:
    std::vector<ModcodRow> rows_;
};

// QPSK-1/4 .. 32APSK operating points.
ModcodTable default_modcod_table();

// Throws std::domain_error for non-positive inputs.
double free_space_path_loss_db(double distance_km, double frequency_ghz);

// Es/N0 in dB with the noise bandwidth equal to the symbol rate.
double link_snr_db(const LinkBudgetParams& params, double distance_km);

// Highest-efficiency row whose threshold is <= snr (inclusive); nullopt when
// the link is infeasible. Throws std::invalid_argument on an empty table.
std::optional<ModcodRow> select_modcod(const ModcodTable& table, double snr_db);

double edge_data_rate_bps(const ModcodRow& row, double symbol_rate_baud);

// select_modcod(link_snr_db(...)) composed; nullopt for an infeasible link.
std::optional<double> link_data_rate_bps(const LinkBudgetParams& params, const ModcodTable& table,
                                         double distance_km);

}  // namespace leo
