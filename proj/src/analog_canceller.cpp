// SPDX-License-Identifier: Apache-2.0

#include "fdsim/analog_canceller.hpp"
#include "fdsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdsim
{
int AnalogCancellerConfig::n_taps() const
{
    int n = 0;
    for (const auto &t : L2)
        n += int(t.n_elem);
    return n;
}

WidebandChannel CancellerMatrices::as_channel() const
{
    WidebandChannel H;
    H.taps = C;
    H.delays = delays;
    H.pathloss_db.assign(C.size(), 0.0);
    H.delay_error_s.assign(C.size(), 0.0);
    return H;
}

AnalogCancellerConfig build_canceller(const WidebandChannel &H_hat, int N, TapAllocation alloc)
{
    if (N < 1)
        throw std::invalid_argument("build_canceller: N must be >= 1");
    const arma::uword n_rx = H_hat.rx(), n_tx = H_hat.tx();
    const int per_delay = int(n_rx * n_tx);
    if (N > per_delay * int(H_hat.n_taps()))
        throw std::invalid_argument("build_canceller: N exceeds the full-tap count");

    // delay lines follow the SI taps in increasing delay
    std::vector<std::size_t> order(H_hat.n_taps());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return H_hat.delays[a] < H_hat.delays[b]; });

    AnalogCancellerConfig cfg;
    cfg.L_C = (N + per_delay - 1) / per_delay;
    cfg.n_tx = n_tx;
    cfg.n_rx = n_rx;
    for (int l = 0; l < cfg.L_C; ++l)
    {
        const CMat &H = H_hat.taps[order[l]];
        const int budget = N / cfg.L_C + (l < N % cfg.L_C ? 1 : 0);

        // column-major entry list: index e -> (rx = e % n_rx, tx = e / n_rx)
        std::vector<int> entries(per_delay);
        std::iota(entries.begin(), entries.end(), 0);
        if (alloc == TapAllocation::Greedy)
        {
            std::stable_sort(entries.begin(), entries.end(),
                             [&](int a, int b) { return std::abs(H(a)) > std::abs(H(b)); });
            entries.resize(budget);
            std::sort(entries.begin(), entries.end());
        }
        else
            entries.resize(budget);

        RMat L1(budget, n_tx, arma::fill::zeros);
        CVec L2(budget);
        RMat L3(n_rx, budget, arma::fill::zeros);
        for (int t = 0; t < budget; ++t)
        {
            const int j = entries[t] % int(n_rx), i = entries[t] / int(n_rx);
            L1(t, i) = 1.0;
            L3(j, t) = 1.0;
            L2(t) = -H(j, i);
        }
        cfg.delays.push_back(H_hat.delays[order[l]]);
        cfg.L1.push_back(L1);
        cfg.L2.push_back(L2);
        cfg.L3.push_back(L3);
    }
    return cfg;
}

AnalogCancellerConfig quantize_taps(const AnalogCancellerConfig &cfg, Rng &rng)
{
    AnalogCancellerConfig q = cfg;
    const double a_step = cfg.atten_step_db;
    const double p_step = deg_to_rad(cfg.phase_step_deg);
    for (auto &taps : q.L2)
        for (auto &t : taps)
        {
            const double jitter = rng.uniform(-0.5, 0.5) * p_step;
            double mag = std::abs(t);
            if (mag == 0.0)
                continue;
            double ph = std::arg(t);
            if (a_step > 0.0)
            {
                const double db = 20.0 * std::log10(mag);
                mag = std::pow(10.0, std::round(db / a_step) * a_step / 20.0);
            }
            if (p_step > 0.0)
                ph += jitter;
            t = std::polar(mag, ph);
        }
    return q;
}

CancellerMatrices canceller_matrices(const AnalogCancellerConfig &cfg)
{
    CancellerMatrices C;
    for (std::size_t l = 0; l < cfg.L2.size(); ++l)
    {
        C.C.push_back(arma::conv_to<CMat>::from(cfg.L3[l]) * arma::diagmat(cfg.L2[l]) *
                      arma::conv_to<CMat>::from(cfg.L1[l]));
        C.delays.push_back(cfg.delays[l]);
    }
    return C;
}

void validate_routing(const AnalogCancellerConfig &cfg)
{
    for (std::size_t l = 0; l < cfg.L1.size(); ++l)
    {
        const RMat &L1 = cfg.L1[l], &L3 = cfg.L3[l];
        if (L1.n_rows != cfg.L2[l].n_elem || L3.n_cols != cfg.L2[l].n_elem)
            throw std::logic_error("routing: tap count mismatch");
        if (arma::any(arma::vectorise((L1 != 0.0) % (L1 != 1.0))) ||
            arma::any(arma::vectorise((L3 != 0.0) % (L3 != 1.0))))
            throw std::logic_error("routing: MUX/DEMUX entries must be binary");
        if (arma::any(arma::sum(L1, 1) != 1.0))
            throw std::logic_error("routing: each MUX row must select exactly one TX");
        if (arma::any(arma::sum(L3, 0) != 1.0))
            throw std::logic_error("routing: each DEMUX column must feed exactly one RX");
    }
}

TimeFrame apply_canceller(const TimeFrame &x_tilde, const CancellerMatrices &C)
{
    if (C.C.empty())
        return {CMat(0, x_tilde.length()), x_tilde.sample_period};
    return apply_channel(x_tilde, C.as_channel());
}

RVec frame_power(const TimeFrame &y)
{
    if (y.length() == 0)
        throw std::invalid_argument("frame_power: empty frame");
    return arma::mean(arma::square(arma::abs(y.samples)), 1);
}

RVec residual_si_power(const TimeFrame &y_res)
{
    RVec p = frame_power(y_res);
    for (auto &v : p)
        v = linear_to_dbm(v);
    return p;
}

nlohmann::json canceller_to_json(const AnalogCancellerConfig &cfg)
{
    nlohmann::json j;
    j["L_C"] = cfg.L_C;
    j["n_tx"] = cfg.n_tx;
    j["n_rx"] = cfg.n_rx;
    j["atten_step_db"] = cfg.atten_step_db;
    j["phase_step_deg"] = cfg.phase_step_deg;
    j["delay_lines"] = nlohmann::json::array();
    for (std::size_t l = 0; l < cfg.L2.size(); ++l)
    {
        nlohmann::json d;
        d["delay"] = cfg.delays[l];
        d["taps"] = nlohmann::json::array();
        for (arma::uword t = 0; t < cfg.L2[l].n_elem; ++t)
        {
            const arma::uword tx = cfg.L1[l].row(t).index_max();
            const arma::uword rx = cfg.L3[l].col(t).index_max();
            d["taps"].push_back({{"tx", tx}, {"rx", rx}, {"re", cfg.L2[l](t).real()}, {"im", cfg.L2[l](t).imag()}});
        }
        j["delay_lines"].push_back(d);
    }
    return j;
}
} // namespace fdsim
