// SPDX-License-Identifier: Apache-2.0

#include "fdsim/channel.hpp"
#include "fdsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace fdsim
{
int WidebandChannel::span() const
{
    int m = 0;
    for (int d : delays)
        m = std::max(m, d + 1);
    return m;
}

WidebandChannel gen_rayleigh(Rng &rng, arma::uword rx, arma::uword tx, int L, double pathloss_db,
                             TapProfile profile, double decay_db)
{
    if (L < 1)
        throw std::invalid_argument("gen_rayleigh: L must be >= 1");
    std::vector<double> w(L, 1.0);
    if (profile == TapProfile::Exponential)
        for (int l = 0; l < L; ++l)
            w[l] = db_to_linear(-decay_db * l);
    double sum = 0.0;
    for (double v : w)
        sum += v;

    WidebandChannel H;
    const double total = db_to_linear(-pathloss_db);
    for (int l = 0; l < L; ++l)
    {
        const double p = total * w[l] / sum;
        H.taps.push_back(rng.complex_normal(rx, tx, p));
        H.delays.push_back(l);
        H.pathloss_db.push_back(-linear_to_db(p));
        H.delay_error_s.push_back(0.0);
    }
    return H;
}

CVec ula_response(arma::uword n, double angle)
{
    CVec a(n);
    for (arma::uword m = 0; m < n; ++m)
        a(m) = std::exp(cx(0.0, std::numbers::pi * double(m) * std::sin(angle)));
    return a;
}

WidebandChannel gen_rician_si(Rng &rng, arma::uword rx, arma::uword tx, const RicianSiParams &p)
{
    if (p.delays_ns.size() != p.losses_db.size() || p.delays_ns.empty())
        throw std::invalid_argument("gen_rician_si: delay and loss lists must have equal nonzero length");
    if (!(p.sample_period > 0.0))
        throw std::invalid_argument("gen_rician_si: sample period must be positive");

    WidebandChannel H;
    for (std::size_t l = 0; l < p.delays_ns.size(); ++l)
    {
        const double exact = p.delays_ns[l] * 1e-9 / p.sample_period;
        const int idx = int(std::lround(exact));
        const double k_db = l == 0 ? p.direct_k_db : p.reflected_k_db;
        const double K = std::isinf(k_db) ? (k_db > 0 ? INFINITY : 0.0) : db_to_linear(k_db);
        const double los_w = std::isinf(K) ? 1.0 : K / (K + 1.0);
        const double nlos_w = std::isinf(K) ? 0.0 : 1.0 / (K + 1.0);

        double aoa, aod, phase;
        if (l == 0)
        {
            aoa = std::numbers::pi / 6.0;
            aod = -std::numbers::pi / 6.0;
            phase = p.direct_phase_random ? rng.uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
        }
        else
        {
            aoa = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
            aod = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
            phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        const CMat los = std::exp(cx(0.0, phase)) * ula_response(rx, aoa) * ula_response(tx, aod).t();
        CMat nlos = rng.complex_normal(rx, tx, 1.0);

        const double amp = std::sqrt(db_to_linear(-p.losses_db[l]));
        H.taps.push_back(amp * (std::sqrt(los_w) * los + std::sqrt(nlos_w) * nlos));
        H.delays.push_back(idx);
        H.pathloss_db.push_back(p.losses_db[l]);
        H.delay_error_s.push_back((exact - idx) * p.sample_period);
    }
    return H;
}

TimeFrame apply_channel(const TimeFrame &x, const WidebandChannel &H)
{
    if (H.n_taps() == 0)
        throw std::invalid_argument("apply_channel: empty channel");
    if (H.tx() != x.n_antennas())
        throw std::invalid_argument("apply_channel: channel TX count differs from frame antennas");
    const arma::uword T = x.length();
    TimeFrame y{CMat(H.rx(), T, arma::fill::zeros), x.sample_period};
    for (std::size_t l = 0; l < H.n_taps(); ++l)
    {
        const arma::uword d = H.delays[l];
        if (d >= T)
            continue;
        y.samples.cols(d, T - 1) += H.taps[l] * x.samples.cols(0, T - 1 - d);
    }
    return y;
}

FreqChannel to_freq(const WidebandChannel &H, int Nc)
{
    if (H.span() > Nc)
        throw std::invalid_argument("to_freq: delay spread exceeds Nc");
    FreqChannel F(Nc, CMat(H.rx(), H.tx(), arma::fill::zeros));
    for (int n = 0; n < Nc; ++n)
        for (std::size_t l = 0; l < H.n_taps(); ++l)
        {
            // reduce the exponent first so large Nc keeps full phase accuracy
            const long long e = (static_cast<long long>(H.delays[l]) * n) % Nc;
            F[n] += H.taps[l] * std::exp(cx(0.0, -2.0 * std::numbers::pi * double(e) / Nc));
        }
    return F;
}

WidebandChannel estimate_with_mse(const WidebandChannel &H, std::optional<double> mse_db, Rng &rng)
{
    if (!mse_db)
        return H;
    WidebandChannel E = H;
    const double rel = db_to_linear(*mse_db);
    for (std::size_t l = 0; l < H.n_taps(); ++l)
    {
        const double var = rel * db_to_linear(-H.pathloss_db[l]);
        E.taps[l] += rng.complex_normal(H.rx(), H.tx(), var);
    }
    return E;
}

WidebandChannel add_channels(const WidebandChannel &a, const WidebandChannel &b)
{
    if (a.n_taps() && b.n_taps() && (a.rx() != b.rx() || a.tx() != b.tx()))
        throw std::invalid_argument("add_channels: dimension mismatch");
    std::map<int, std::size_t> pos;
    WidebandChannel s = a;
    for (std::size_t l = 0; l < s.n_taps(); ++l)
        pos.emplace(s.delays[l], l);
    for (std::size_t l = 0; l < b.n_taps(); ++l)
    {
        auto it = pos.find(b.delays[l]);
        if (it != pos.end())
            s.taps[it->second] += b.taps[l];
        else
        {
            pos.emplace(b.delays[l], s.n_taps());
            s.taps.push_back(b.taps[l]);
            s.delays.push_back(b.delays[l]);
            s.pathloss_db.push_back(b.pathloss_db.empty() ? 0.0 : b.pathloss_db[l]);
            s.delay_error_s.push_back(b.delay_error_s.empty() ? 0.0 : b.delay_error_s[l]);
        }
    }
    return s;
}

WidebandChannel zero_channel(arma::uword rx, arma::uword tx)
{
    WidebandChannel H;
    H.taps.push_back(CMat(rx, tx, arma::fill::zeros));
    H.delays.push_back(0);
    H.pathloss_db.push_back(INFINITY);
    H.delay_error_s.push_back(0.0);
    return H;
}

nlohmann::json cmat_to_json(const CMat &A)
{
    nlohmann::json rows = nlohmann::json::array();
    for (arma::uword r = 0; r < A.n_rows; ++r)
    {
        nlohmann::json row = nlohmann::json::array();
        for (arma::uword c = 0; c < A.n_cols; ++c)
            row.push_back({A(r, c).real(), A(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

CMat cmat_from_json(const nlohmann::json &j)
{
    const arma::uword R = j.size();
    const arma::uword C = R ? j[0].size() : 0;
    CMat A(R, C);
    for (arma::uword r = 0; r < R; ++r)
    {
        if (j[r].size() != C)
            throw std::invalid_argument("cmat_from_json: ragged matrix");
        for (arma::uword c = 0; c < C; ++c)
            A(r, c) = cx(j[r][c][0].get<double>(), j[r][c][1].get<double>());
    }
    return A;
}

nlohmann::json channel_to_json(const WidebandChannel &H)
{
    nlohmann::json j;
    j["rx"] = H.rx();
    j["tx"] = H.tx();
    j["taps"] = nlohmann::json::array();
    for (std::size_t l = 0; l < H.n_taps(); ++l)
    {
        nlohmann::json t;
        t["delay"] = H.delays[l];
        t["pathloss_db"] = H.pathloss_db[l];
        t["delay_error_s"] = H.delay_error_s[l];
        t["matrix"] = cmat_to_json(H.taps[l]);
        j["taps"].push_back(t);
    }
    return j;
}

WidebandChannel channel_from_json(const nlohmann::json &j)
{
    WidebandChannel H;
    for (const auto &t : j.at("taps"))
    {
        H.taps.push_back(cmat_from_json(t.at("matrix")));
        H.delays.push_back(t.at("delay").get<int>());
        // infinite loss serializes as null
        const auto pl = t.find("pathloss_db");
        H.pathloss_db.push_back(pl == t.end() ? 0.0 : pl->is_null() ? INFINITY : pl->get<double>());
        H.delay_error_s.push_back(t.value("delay_error_s", 0.0));
    }
    return H;
}
} // namespace fdsim
