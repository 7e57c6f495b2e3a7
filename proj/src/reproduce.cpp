// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale presets for the performance figures.

#include "fdsim/simulator.hpp"
#include "fdsim/units.hpp"

#include <filesystem>
#include <fstream>

namespace fdsim
{
namespace
{
const std::vector<double> kPowers = {20, 25, 30, 35, 40};

nlohmann::json users(int n)
{
    return {{"n_rx_m1", n}, {"n_tx_m2", n}, {"d_b", n}, {"d_m2", n}};
}

nlohmann::json merge(nlohmann::json a, const nlohmann::json &b)
{
    for (auto it = b.begin(); it != b.end(); ++it)
        a[it.key()] = it.value();
    return a;
}

nlohmann::json power(double p)
{
    return {{"p_b_dbm", p}, {"p_m2_dbm", p}};
}

std::string num(double v)
{
    return fmt_num(v);
}

// A curve is a set of sweep points sharing everything but the x value.
struct Curve
{
    std::string name;
    std::string metric;
    std::vector<std::size_t> points;
    std::vector<double> x;
    std::string x_label;
};

struct Figure
{
    ScenarioSpec spec;
    std::vector<Curve> curves;
};

void add_point(Figure &f, Curve &c, const std::string &label, const nlohmann::json &ov, double x)
{
    c.points.push_back(f.spec.points.size());
    c.x.push_back(x);
    f.spec.points.push_back({label, ov});
}

Figure build_figure(const std::string &id, int runs, std::uint64_t seed, int workers)
{
    Figure f;
    f.spec.name = id;
    f.spec.runs = runs;
    f.spec.seed = seed;
    f.spec.workers = workers;
    f.spec.config = default_config();

    auto power_sweep = [&](const std::string &curve, const std::string &metric, const nlohmann::json &base)
    {
        Curve c{curve, metric, {}, {}, "tx_power_dbm"};
        for (double p : kPowers)
            add_point(f, c, curve + ";p=" + num(p), merge(base, power(p)), p);
        f.curves.push_back(c);
    };

    if (id == "fig3" || id == "fig4")
    {
        const int u = id == "fig3" ? 1 : 4;
        for (int lc = 1; lc <= 3; ++lc)
            power_sweep("LC" + std::to_string(lc), "p_saturation", merge(users(u), {{"n_taps", 16 * lc}}));
    }
    else if (id == "fig5")
    {
        for (int u : {1, 4})
            for (int taps : {32, 48})
                power_sweep("users" + std::to_string(u) + "_taps" + std::to_string(taps), "dl_rate",
                            merge(users(u), {{"n_taps", taps}}));
    }
    else if (id == "fig6")
    {
        Curve tsvd{"tsvd", "digital_supp_db", {}, {}, "training_symbols"};
        Curve lin{"linear", "digital_supp_linear_db", {}, {}, "training_symbols"};
        for (int t : {1, 2, 3, 4, 6, 8})
        {
            const auto ov = merge(merge(users(4), power(40)), {{"n_taps", 32}, {"training_symbols", t}});
            lin.points.push_back(f.spec.points.size());
            lin.x.push_back(t);
            add_point(f, tsvd, "T=" + std::to_string(t), ov, t);
        }
        f.curves = {tsvd, lin};
    }
    else if (id == "fig7")
    {
        f.spec.want_psd = true;
        Curve c{"total", "total_supp_db", {}, {}, "tx_power_dbm"};
        add_point(f, c, "p=40", merge(merge(users(4), power(40)), {{"n_taps", 32}}), 40);
        f.curves.push_back(c);
    }
    else if (id == "fig8")
    {
        for (int u : {1, 4})
        {
            const std::string tag = "users" + std::to_string(u);
            power_sweep(tag + "_fd", "fd_rate", merge(users(u), {{"n_taps", 32}}));
            Curve hd = f.curves.back();
            hd.name = tag + "_hd";
            hd.metric = "hd_rate";
            f.curves.push_back(hd);
        }
    }
    else if (id == "fig9")
    {
        for (const nlohmann::json &mse : {nlohmann::json("ideal"), nlohmann::json(-30.0), nlohmann::json(-20.0),
                                          nlohmann::json(-10.0)})
            power_sweep(std::string("mse_") + (mse.is_string() ? "ideal" : num(mse.get<double>())), "fd_rate",
                        merge(users(4), {{"n_taps", 32}, {"channel_mse_db", mse}}));
    }
    else if (id == "fig10")
    {
        for (const std::string wf : {"wifi20", "lte20", "nr100"})
            power_sweep(wf, "isr_db", merge(users(4), {{"n_taps", 32}, {"waveform", wf}}));
    }
    else
        throw ConfigError("unknown figure id: " + id);
    return f;
}
} // namespace

std::vector<std::string> figure_ids()
{
    return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"};
}

ScenarioSpec figure_scenario(const std::string &figure_id, int runs, std::uint64_t seed, int workers)
{
    return build_figure(figure_id, runs, seed, workers).spec;
}

ReproduceResult reproduce(const std::string &figure_id, int runs, const std::string &out_dir, std::uint64_t seed,
                          int workers)
{
    namespace fs = std::filesystem;
    const Figure fig = build_figure(figure_id, runs, seed, workers);
    const MonteCarloResult r = monte_carlo(fig.spec);
    const fs::path dir = fs::path(out_dir) / figure_id;
    write_outputs(dir.string(), fig.spec, r);

    ReproduceResult out;
    out.runs = r.total_runs();
    out.failures = r.total_failures();
    out.files = {(dir / "runs.csv").string(), (dir / "aggregate.csv").string()};
    for (const auto &c : fig.curves)
    {
        const fs::path p = dir / (figure_id + "_" + c.name + ".csv");
        std::ofstream f(p, std::ios::binary);
        f << c.x_label << "," << c.metric << "_mean," << c.metric << "_stderr\n";
        for (std::size_t i = 0; i < c.points.size(); ++i)
        {
            const auto &a = r.aggregates[c.points[i]];
            f << fmt_num(c.x[i]) << "," << fmt_num(a.get(c.metric)) << "," << fmt_num(a.get_stderr(c.metric)) << "\n";
        }
        out.files.push_back(p.string());
    }
    if (fig.spec.want_psd)
    {
        const auto cfgs = resolve_points(fig.spec);
        const auto &a = r.aggregates.at(0);
        if (a.psd.isolation.n_elem)
        {
            const std::pair<const char *, RVec> series[] = {
                {"isolation", a.psd.isolation},
                {"analog", a.psd.analog},
                {"digital", a.psd.digital},
                {"noise_floor", RVec(cfgs[0].Nc, arma::fill::value(a.psd.noise_floor_w))}};
            for (const auto &[name, psd] : series)
            {
                const fs::path p = dir / (figure_id + "_psd_" + name + ".csv");
                write_psd_csv(p.string(), psd, cfgs[0]);
                out.files.push_back(p.string());
            }
        }
    }
    return out;
}
} // namespace fdsim
