// SPDX-License-Identifier: Apache-2.0
//
// End-to-end frame pipeline, Monte Carlo runner, PSD estimation and CSV output.

#pragma once

#include "fdsim/config.hpp"
#include "fdsim/numerics.hpp"
#include "fdsim/rng.hpp"
#include "fdsim/waveform.hpp"

#include <json.hpp>
#include <string>
#include <vector>

namespace fdsim
{
struct RunOptions
{
    bool want_psd = false;
    bool want_dumps = false; // channels, canceller config, TSVD diagnostics
    bool zero_si = false;    // remove the SI channel entirely
};

/// Per-bin PSD in W of the SI-only signal at each cancellation stage.
struct PsdSeries
{
    RVec isolation; // RX input, before analog cancellation
    RVec analog;    // after analog cancellation and ADC
    RVec digital;   // after digital cancellation
    double noise_floor_w = 0.0; // per bin
};

struct MetricsRecord
{
    int run_id = 0;
    std::string sweep_point;
    bool failed = false;
    std::string error;

    double p_saturation = 0.0; // 0 or 1 for a single run, fraction in aggregates
    double dl_rate = 0.0;      // bits/s/Hz, mean over data subcarriers
    double ul_rate = 0.0;
    double fd_rate = 0.0;
    double hd_rate = 0.0;
    double dl_rate_hd = 0.0;
    double ul_rate_hd = 0.0;
    double analog_supp_db = 0.0;
    double digital_supp_db = 0.0;
    double digital_supp_linear_db = 0.0;
    double total_supp_db = 0.0;
    double isr_db = 0.0;
    double tsvd_rank = 0.0;
    double tsvd_rank_linear = 0.0;
    double mean_alpha = 0.0;
    double alg1_infeasible_frac = 0.0;
    double residual_si_dbm_max = 0.0; // true residual after analog cancellation, worst antenna

    PsdSeries psd;
    nlohmann::json dumps;
};

/// Names of the numeric MetricsRecord fields, in CSV column order.
const std::vector<std::string> &metric_names();
double metric_value(const MetricsRecord &r, const std::string &name);

/// One Monte Carlo realization.
MetricsRecord run_frame(const SystemConfig &cfg, Rng &rng, int run_id = 0, const RunOptions &opt = {});

/// Welch-style periodogram over the OFDM-symbol windows of samples [start, end); W per bin.
RVec compute_psd(const CMat &frames, int Nc, int cp_len, arma::uword start = 0);
RVec psd_to_dbm(const RVec &psd_w);

struct SweepPoint
{
    std::string label;
    nlohmann::json overrides = nlohmann::json::object();
};

struct ScenarioSpec
{
    std::string name = "scenario";
    SystemConfig config = default_config();
    std::vector<SweepPoint> points; // empty: a single point with the base config
    int runs = 100;
    std::uint64_t seed = 1;
    bool want_psd = false;
    bool want_dumps = false;
    int workers = 0; // 0: hardware concurrency
};

struct Aggregate
{
    std::string sweep_point;
    int runs = 0;
    int failures = 0;
    std::vector<double> mean;   // per metric_names()
    std::vector<double> stderr_; // standard error of the mean
    PsdSeries psd;              // run-averaged, when requested

    double get(const std::string &metric) const;
    double get_stderr(const std::string &metric) const;
};

struct MonteCarloResult
{
    std::vector<MetricsRecord> records; // point-major, run-minor
    std::vector<Aggregate> aggregates;  // one per sweep point
    int total_runs() const { return int(records.size()); }
    int total_failures() const;
};

/// Resolved configuration of each sweep point.
std::vector<SystemConfig> resolve_points(const ScenarioSpec &spec);

MonteCarloResult monte_carlo(const ScenarioSpec &spec);

/// Parses a scenario: {"name", "config", "runs", "seed", "psd", "dumps", "workers",
/// "sweep": {key: [values...]}, "points": [{"label", "overrides"}], "link_powers"}.
ScenarioSpec scenario_from_json(const nlohmann::json &j);
ScenarioSpec load_scenario(const std::string &path);

/// 9 significant digits.
std::string fmt_num(double v);

void write_runs_csv(const std::string &path, const MonteCarloResult &r);
void write_aggregate_csv(const std::string &path, const MonteCarloResult &r);
void write_psd_csv(const std::string &path, const RVec &psd_w, const SystemConfig &cfg);
/// Writes runs.csv, aggregate.csv, PSD series and dumps into `dir`.
void write_outputs(const std::string &dir, const ScenarioSpec &spec, const MonteCarloResult &r);

struct ReproduceResult
{
    std::vector<std::string> files;
    int runs = 0;
    int failures = 0;
};

/// Figure presets at desk scale.
std::vector<std::string> figure_ids();
/// The scenario behind a figure preset.
ScenarioSpec figure_scenario(const std::string &figure_id, int runs, std::uint64_t seed = 1, int workers = 0);
ReproduceResult reproduce(const std::string &figure_id, int runs, const std::string &out_dir,
                          std::uint64_t seed = 1, int workers = 0);
} // namespace fdsim
