// SPDX-License-Identifier: Apache-2.0

#include "fdsim/config.hpp"
#include "fdsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace fdsim
{
namespace
{
std::vector<int> symmetric_band(int half)
{
    std::vector<int> v;
    for (int k = -half; k <= half; ++k)
        if (k != 0)
            v.push_back(k);
    return v;
}
} // namespace

std::vector<int> SystemConfig::data_bins() const
{
    std::vector<int> b;
    b.reserve(data_subcarriers.size());
    for (int k : data_subcarriers)
        b.push_back(((k % Nc) + Nc) % Nc);
    return b;
}

int SystemConfig::si_delay_samples(int l) const
{
    return int(std::lround(si_path_delays_ns.at(l) * 1e-9 / sample_period()));
}

int SystemConfig::max_delay_spread() const
{
    int m = std::max(l_dl, l_ul) - 1;
    for (int l = 0; l < L_si(); ++l)
        m = std::max(m, si_delay_samples(l));
    return m;
}

double SystemConfig::p_b_w() const { return dbm_to_linear(p_b_dbm); }
double SystemConfig::p_m2_w() const { return dbm_to_linear(p_m2_dbm); }
double SystemConfig::sigma2_b() const { return dbm_to_linear(noise_floor_b_dbm); }
double SystemConfig::sigma2_m1() const { return dbm_to_linear(noise_floor_m1_dbm); }
double SystemConfig::lambda_b_w() const { return dbm_to_linear(lambda_b_dbm); }

void SystemConfig::validate() const
{
    auto req = [](bool ok, const std::string &msg)
    {
        if (!ok)
            throw ConfigError(msg);
    };
    req(n_tx_b >= 1 && n_rx_b >= 1 && n_rx_m1 >= 1 && n_tx_m2 >= 1, "antenna counts must be >= 1");
    req(d_b >= 1 && d_b <= std::min(n_tx_b, n_rx_m1), "d_b must be in [1, min(n_tx_b, n_rx_m1)]");
    req(d_m2 >= 1 && d_m2 <= std::min(n_tx_m2, n_rx_b), "d_m2 must be in [1, min(n_tx_m2, n_rx_b)]");
    req(Nc >= 2, "Nc must be >= 2");
    req(!data_subcarriers.empty() && int(data_subcarriers.size()) <= Nc, "data_subcarriers size must be in [1, Nc]");
    std::set<int> bins;
    for (int k : data_subcarriers)
    {
        req(k >= -Nc / 2 && k < Nc / 2, "data subcarrier index out of range");
        req(bins.insert(((k % Nc) + Nc) % Nc).second, "duplicate data subcarrier");
    }
    req(cp_len >= 0, "cp_len must be >= 0");
    req(bandwidth_hz > 0 && subcarrier_spacing_hz > 0, "bandwidth and spacing must be positive");
    req(si_path_delays_ns.size() == si_path_losses_db.size() && !si_path_delays_ns.empty(),
        "si_path_delays_ns and si_path_losses_db must have equal nonzero length");
    for (double d : si_path_delays_ns)
        req(d >= 0.0, "SI delays must be nonnegative");
    req(l_dl >= 1 && l_ul >= 1, "l_dl and l_ul must be >= 1");
    req(cp_len >= max_delay_spread(), "cp_len must cover the maximum channel delay spread");
    req(tap_profile == "uniform" || tap_profile == "exponential", "tap_profile must be uniform or exponential");
    req(n_taps >= 1, "n_taps must be >= 1");
    req(n_taps <= n_rx_b * n_tx_b * L_si(), "n_taps exceeds the full-tap count n_rx_b*n_tx_b*L_SI");
    req(tap_allocation == "orderly" || tap_allocation == "greedy", "tap_allocation must be orderly or greedy");
    req(tap_atten_step_db >= 0 && tap_phase_step_deg >= 0, "tap steps must be nonnegative");
    req(irr_db > 0.0, "irr_db must be > 0");
    req(adc_bits >= 1 && adc_bits <= 30, "adc_bits must be in [1, 30]");
    req(training_symbols >= 1 && frame_symbols >= 1, "training_symbols and frame_symbols must be >= 1");
    req(mc_runs >= 1, "mc_runs must be >= 1");
    if (channel_mse_db)
        req(std::isfinite(*channel_mse_db), "channel_mse_db must be finite or \"ideal\"");
    for (double v : {p_b_dbm, p_m2_dbm, noise_floor_b_dbm, noise_floor_m1_dbm, lambda_b_dbm, pathloss_dl_db,
                     pathloss_ul_db, si_direct_k_db, iip3_dbm, pa_drive_ref_dbm, adc_papr_db})
        req(std::isfinite(v), "non-finite numeric field");
    req(!std::isnan(si_reflected_k_db) && si_reflected_k_db < INFINITY, "si_reflected_k_db must be finite or -inf");
}

void apply_waveform_preset(SystemConfig &c, const std::string &name)
{
    if (name == "wifi20")
    {
        c.Nc = 64;
        c.cp_len = 16;
        c.bandwidth_hz = 20e6;
        c.subcarrier_spacing_hz = 312.5e3;
        c.data_subcarriers = symmetric_band(26);
    }
    else if (name == "lte20")
    {
        c.Nc = 2048;
        c.cp_len = 144;
        c.bandwidth_hz = 20e6;
        c.subcarrier_spacing_hz = 15e3;
        c.data_subcarriers = symmetric_band(600);
    }
    else if (name == "nr100")
    {
        c.Nc = 4096;
        c.cp_len = 288;
        c.bandwidth_hz = 100e6;
        c.subcarrier_spacing_hz = 60e3;
        c.data_subcarriers = symmetric_band(1638);
    }
    else
        throw ConfigError("unknown waveform preset: " + name);
    c.waveform = name;
}

std::vector<std::string> waveform_presets()
{
    return {"wifi20", "lte20", "nr100"};
}

SystemConfig default_config()
{
    SystemConfig c;
    apply_waveform_preset(c, "wifi20");
    return c;
}

SystemConfig preset_config(const std::string &name)
{
    SystemConfig c;
    apply_waveform_preset(c, name);
    return c;
}

nlohmann::json to_json(const SystemConfig &c)
{
    nlohmann::json j;
    j["waveform"] = c.waveform;
    j["n_tx_b"] = c.n_tx_b;
    j["n_rx_b"] = c.n_rx_b;
    j["n_rx_m1"] = c.n_rx_m1;
    j["n_tx_m2"] = c.n_tx_m2;
    j["d_b"] = c.d_b;
    j["d_m2"] = c.d_m2;
    j["Nc"] = c.Nc;
    j["data_subcarriers"] = c.data_subcarriers;
    j["cp_len"] = c.cp_len;
    j["bandwidth_hz"] = c.bandwidth_hz;
    j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
    j["p_b_dbm"] = c.p_b_dbm;
    j["p_m2_dbm"] = c.p_m2_dbm;
    j["noise_floor_b_dbm"] = c.noise_floor_b_dbm;
    j["noise_floor_m1_dbm"] = c.noise_floor_m1_dbm;
    j["lambda_b_dbm"] = c.lambda_b_dbm;
    j["pathloss_dl_db"] = c.pathloss_dl_db;
    j["pathloss_ul_db"] = c.pathloss_ul_db;
    j["l_dl"] = c.l_dl;
    j["l_ul"] = c.l_ul;
    j["tap_profile"] = c.tap_profile;
    j["tap_decay_db"] = c.tap_decay_db;
    j["si_path_delays_ns"] = c.si_path_delays_ns;
    j["si_path_losses_db"] = c.si_path_losses_db;
    j["si_direct_k_db"] = c.si_direct_k_db;
    if (std::isinf(c.si_reflected_k_db) && c.si_reflected_k_db < 0)
        j["si_reflected_k_db"] = "rayleigh";
    else
        j["si_reflected_k_db"] = c.si_reflected_k_db;
    j["si_direct_phase_random"] = c.si_direct_phase_random;
    if (c.channel_mse_db)
        j["channel_mse_db"] = *c.channel_mse_db;
    else
        j["channel_mse_db"] = "ideal";
    j["n_taps"] = c.n_taps;
    j["tap_allocation"] = c.tap_allocation;
    j["tap_quantization"] = c.tap_quantization;
    j["tap_atten_step_db"] = c.tap_atten_step_db;
    j["tap_phase_step_deg"] = c.tap_phase_step_deg;
    j["irr_db"] = c.irr_db;
    j["iip3_dbm"] = c.iip3_dbm;
    j["pa_drive_ref_dbm"] = c.pa_drive_ref_dbm;
    j["adc_bits"] = c.adc_bits;
    j["adc_dynamic_range_db"] = c.adc_dynamic_range_db;
    j["adc_papr_db"] = c.adc_papr_db;
    j["training_symbols"] = c.training_symbols;
    j["frame_symbols"] = c.frame_symbols;
    j["mc_runs"] = c.mc_runs;
    j["seed"] = c.seed;
    j["linear_baseline"] = c.linear_baseline;
    return j;
}

SystemConfig config_from_json(const nlohmann::json &j, const SystemConfig &base)
{
    if (!j.is_object())
        throw ConfigError("configuration must be a JSON object");
    SystemConfig c = base;
    try
    {
        // the preset resets numerology, explicit keys then override it
        if (j.contains("waveform"))
            apply_waveform_preset(c, j.at("waveform").get<std::string>());

        auto get = [&](const char *key, auto &field)
        {
            if (j.contains(key))
                field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        const std::set<std::string> known = {
            "waveform", "n_tx_b", "n_rx_b", "n_rx_m1", "n_tx_m2", "d_b", "d_m2", "Nc", "data_subcarriers",
            "cp_len", "bandwidth_hz", "subcarrier_spacing_hz", "p_b_dbm", "p_m2_dbm", "noise_floor_b_dbm",
            "noise_floor_m1_dbm", "lambda_b_dbm", "pathloss_dl_db", "pathloss_ul_db", "l_dl", "l_ul",
            "tap_profile", "tap_decay_db", "si_path_delays_ns", "si_path_losses_db", "si_direct_k_db",
            "si_reflected_k_db", "si_direct_phase_random", "channel_mse_db", "n_taps", "tap_allocation",
            "tap_quantization", "tap_atten_step_db", "tap_phase_step_deg", "irr_db", "iip3_dbm",
            "pa_drive_ref_dbm", "adc_bits", "adc_dynamic_range_db", "adc_papr_db", "training_symbols",
            "frame_symbols", "mc_runs", "seed", "linear_baseline"};
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known.count(it.key()))
                throw ConfigError("unknown configuration key: " + it.key());

        get("n_tx_b", c.n_tx_b);
        get("n_rx_b", c.n_rx_b);
        get("n_rx_m1", c.n_rx_m1);
        get("n_tx_m2", c.n_tx_m2);
        get("d_b", c.d_b);
        get("d_m2", c.d_m2);
        get("Nc", c.Nc);
        get("data_subcarriers", c.data_subcarriers);
        get("cp_len", c.cp_len);
        get("bandwidth_hz", c.bandwidth_hz);
        get("subcarrier_spacing_hz", c.subcarrier_spacing_hz);
        get("p_b_dbm", c.p_b_dbm);
        get("p_m2_dbm", c.p_m2_dbm);
        get("noise_floor_b_dbm", c.noise_floor_b_dbm);
        get("noise_floor_m1_dbm", c.noise_floor_m1_dbm);
        get("lambda_b_dbm", c.lambda_b_dbm);
        get("pathloss_dl_db", c.pathloss_dl_db);
        get("pathloss_ul_db", c.pathloss_ul_db);
        get("l_dl", c.l_dl);
        get("l_ul", c.l_ul);
        get("tap_profile", c.tap_profile);
        get("tap_decay_db", c.tap_decay_db);
        get("si_path_delays_ns", c.si_path_delays_ns);
        get("si_path_losses_db", c.si_path_losses_db);
        get("si_direct_k_db", c.si_direct_k_db);
        if (j.contains("si_reflected_k_db"))
        {
            const auto &k = j.at("si_reflected_k_db");
            if (k.is_string())
            {
                if (k.get<std::string>() != "rayleigh")
                    throw ConfigError("si_reflected_k_db must be a number or \"rayleigh\"");
                c.si_reflected_k_db = -INFINITY;
            }
            else
                c.si_reflected_k_db = k.get<double>();
        }
        get("si_direct_phase_random", c.si_direct_phase_random);
        if (j.contains("channel_mse_db"))
        {
            const auto &m = j.at("channel_mse_db");
            if (m.is_string())
            {
                if (m.get<std::string>() != "ideal")
                    throw ConfigError("channel_mse_db must be a number or \"ideal\"");
                c.channel_mse_db.reset();
            }
            else if (m.is_null())
                c.channel_mse_db.reset();
            else
                c.channel_mse_db = m.get<double>();
        }
        get("n_taps", c.n_taps);
        get("tap_allocation", c.tap_allocation);
        get("tap_quantization", c.tap_quantization);
        get("tap_atten_step_db", c.tap_atten_step_db);
        get("tap_phase_step_deg", c.tap_phase_step_deg);
        get("irr_db", c.irr_db);
        get("iip3_dbm", c.iip3_dbm);
        get("pa_drive_ref_dbm", c.pa_drive_ref_dbm);
        get("adc_bits", c.adc_bits);
        get("adc_dynamic_range_db", c.adc_dynamic_range_db);
        get("adc_papr_db", c.adc_papr_db);
        get("training_symbols", c.training_symbols);
        get("frame_symbols", c.frame_symbols);
        get("mc_runs", c.mc_runs);
        get("seed", c.seed);
        get("linear_baseline", c.linear_baseline);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigError(std::string("configuration type error: ") + e.what());
    }
    c.validate();
    return c;
}

SystemConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file: " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ConfigError(std::string("configuration parse error: ") + e.what());
    }
    return config_from_json(j);
}
} // namespace fdsim
