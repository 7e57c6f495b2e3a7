// SPDX-License-Identifier: Apache-2.0

#include "fdsim/waveform.hpp"

#include <stdexcept>

namespace fdsim
{
std::vector<cx> qam16_constellation()
{
    static const double lv[4] = {-3.0, -1.0, 1.0, 3.0};
    const double s = 1.0 / std::sqrt(10.0);
    std::vector<cx> pts;
    for (double i : lv)
        for (double q : lv)
            pts.emplace_back(i * s, q * s);
    return pts;
}

SubcarrierSymbols map_qam16(Rng &rng, const std::vector<int> &dims)
{
    const auto pts = qam16_constellation();
    SubcarrierSymbols S(dims.size());
    for (std::size_t n = 0; n < dims.size(); ++n)
    {
        S[n].set_size(dims[n]);
        for (int i = 0; i < dims[n]; ++i)
            S[n](i) = pts[rng.uniform_int(16)];
    }
    return S;
}

namespace
{
CMat precoded_grid(const SubcarrierSymbols &S, const PerSubcarrier &V, arma::uword n_tx)
{
    if (S.size() != V.size())
        throw std::invalid_argument("ofdm_modulate: symbol and precoder grids differ in size");
    CMat X(n_tx, S.size(), arma::fill::zeros);
    for (std::size_t n = 0; n < S.size(); ++n)
    {
        if (S[n].n_elem == 0)
            continue;
        if (V[n].n_rows != n_tx || V[n].n_cols != S[n].n_elem)
            throw std::invalid_argument("ofdm_modulate: precoder dimension mismatch on subcarrier " +
                                        std::to_string(n));
        X.col(n) = V[n] * S[n];
    }
    return X;
}

CMat add_cp(const CMat &body, int cp_len)
{
    if (cp_len == 0)
        return body;
    return arma::join_rows(body.tail_cols(cp_len), body);
}
} // namespace

TimeFrame ofdm_modulate(const SubcarrierSymbols &S, const PerSubcarrier &V, arma::uword n_tx, int cp_len,
                        double sample_period)
{
    if (cp_len < 0 || cp_len > int(S.size()))
        throw std::invalid_argument("ofdm_modulate: cp_len out of range");
    return {add_cp(ifft_rows(precoded_grid(S, V, n_tx)), cp_len), sample_period};
}

TimeFrame ofdm_modulate(const std::vector<SubcarrierSymbols> &S, const PerSubcarrier &V, arma::uword n_tx,
                        int cp_len, double sample_period)
{
    const arma::uword Nc = V.size();
    TimeFrame f{CMat(n_tx, S.size() * (Nc + cp_len)), sample_period};
    for (std::size_t m = 0; m < S.size(); ++m)
        f.samples.cols(m * (Nc + cp_len), (m + 1) * (Nc + cp_len) - 1) =
            ofdm_modulate(S[m], V, n_tx, cp_len).samples;
    return f;
}

CMat ofdm_demodulate(const TimeFrame &y, int Nc, int cp_len, arma::uword symbol)
{
    const arma::uword sym_len = Nc + cp_len;
    const arma::uword start = symbol * sym_len;
    if (y.length() < start + sym_len)
        throw std::invalid_argument("ofdm_demodulate: frame shorter than Nc + cp_len");
    return fft_rows(y.samples.cols(start + cp_len, start + sym_len - 1));
}

std::vector<CMat> ofdm_demodulate_all(const TimeFrame &y, int Nc, int cp_len)
{
    const arma::uword n = y.length() / (Nc + cp_len);
    std::vector<CMat> out;
    out.reserve(n);
    for (arma::uword m = 0; m < n; ++m)
        out.push_back(ofdm_demodulate(y, Nc, cp_len, m));
    return out;
}

TimeFrame concat(const TimeFrame &a, const TimeFrame &b)
{
    if (a.length() == 0)
        return b;
    if (b.length() == 0)
        return a;
    if (a.n_antennas() != b.n_antennas())
        throw std::invalid_argument("concat: antenna count mismatch");
    return {arma::join_rows(a.samples, b.samples), a.sample_period};
}
} // namespace fdsim
