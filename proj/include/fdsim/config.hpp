// SPDX-License-Identifier: Apache-2.0
//
// System configuration. All powers are stored as entered (dB/dBm) and
// converted by the accessor helpers; W into 1 Ohm is the linear unit.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fdsim
{
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

struct SystemConfig
{
    std::string waveform = "wifi20";

    // Antennas and streams
    int n_tx_b = 4;
    int n_rx_b = 4;
    int n_rx_m1 = 4;
    int n_tx_m2 = 4;
    int d_b = 4;
    int d_m2 = 4;

    // OFDM numerology; subcarrier indices are signed (-Nc/2 .. Nc/2-1)
    int Nc = 64;
    std::vector<int> data_subcarriers;
    int cp_len = 16;
    double bandwidth_hz = 20e6;
    double subcarrier_spacing_hz = 312.5e3;

    // Powers
    double p_b_dbm = 40.0;
    double p_m2_dbm = 40.0;
    double noise_floor_b_dbm = -100.0;
    double noise_floor_m1_dbm = -90.0;
    double lambda_b_dbm = -40.0;

    // DL/UL Rayleigh channels
    double pathloss_dl_db = 100.0;
    double pathloss_ul_db = 100.0;
    int l_dl = 4;
    int l_ul = 4;
    std::string tap_profile = "uniform"; // or "exponential"
    double tap_decay_db = 3.0;           // per tap, exponential profile only

    // SI channel
    std::vector<double> si_path_delays_ns{0.0, 50.0, 100.0, 150.0};
    std::vector<double> si_path_losses_db{40.0, 50.0, 60.0, 70.0};
    double si_direct_k_db = 30.0;
    double si_reflected_k_db = 17.0;
    bool si_direct_phase_random = false;

    // Channel estimation; nullopt means ideal knowledge
    std::optional<double> channel_mse_db;

    // Analog canceller
    int n_taps = 32;
    std::string tap_allocation = "orderly"; // or "greedy"
    bool tap_quantization = true;
    double tap_atten_step_db = 0.02;
    double tap_phase_step_deg = 0.13;

    // TX impairments
    double irr_db = 30.0;
    double iip3_dbm = 15.0;
    double pa_drive_ref_dbm = 0.0; // PA input power of unit-power baseband

    // ADC
    int adc_bits = 14;
    double adc_dynamic_range_db = 60.0;
    double adc_papr_db = 10.0;

    // Frame and experiment
    int training_symbols = 4;
    int frame_symbols = 50; // payload symbols
    int mc_runs = 100;
    std::uint64_t seed = 1;
    bool linear_baseline = true;

    double sample_period() const { return 1.0 / (Nc * subcarrier_spacing_hz); }
    int L_si() const { return int(si_path_delays_ns.size()); }
    /// FFT bin (0..Nc-1) of every data subcarrier, in the order of data_subcarriers.
    std::vector<int> data_bins() const;
    /// Sample delay of SI path l under nearest-sample placement.
    int si_delay_samples(int l) const;
    int max_delay_spread() const;

    double p_b_w() const;
    double p_m2_w() const;
    double sigma2_b() const;
    double sigma2_m1() const;
    double lambda_b_w() const;
    double adc_full_scale_dbm() const { return lambda_b_dbm + adc_papr_db; }

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// Table values (wifi20 preset).
SystemConfig default_config();

/// Named waveform preset: "wifi20", "lte20", "nr100".
SystemConfig preset_config(const std::string &name);
void apply_waveform_preset(SystemConfig &cfg, const std::string &name);
std::vector<std::string> waveform_presets();

nlohmann::json to_json(const SystemConfig &cfg);
/// Start from `base` (default_config if omitted) and apply keys of `j`; unknown keys are errors.
SystemConfig config_from_json(const nlohmann::json &j, const SystemConfig &base = default_config());
SystemConfig load_config(const std::string &path);
} // namespace fdsim
