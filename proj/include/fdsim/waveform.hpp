// SPDX-License-Identifier: Apache-2.0
//
// OFDM symbol construction and recovery.

#pragma once

#include "fdsim/numerics.hpp"
#include "fdsim/rng.hpp"

#include <vector>

namespace fdsim
{
/// Time-domain samples, antennas x time.
struct TimeFrame
{
    CMat samples;
    double sample_period = 0.0;

    arma::uword n_antennas() const { return samples.n_rows; }
    arma::uword length() const { return samples.n_cols; }
};

/// Per-subcarrier symbol vectors, indexed by FFT bin 0..Nc-1; an empty vector marks a null subcarrier.
using SubcarrierSymbols = std::vector<CVec>;

/// Per-subcarrier matrices (precoders, channels), indexed by FFT bin.
using PerSubcarrier = std::vector<CMat>;

/// The 16 unit-average-power constellation points, I-major order.
std::vector<cx> qam16_constellation();

/// Draws 16-QAM symbols; dims[n] is the stream count on bin n (0 = null).
SubcarrierSymbols map_qam16(Rng &rng, const std::vector<int> &dims);

/// One OFDM symbol: body[k] = 1/sqrt(Nc) sum_n V_n s_n e^{j 2 pi n k / Nc}, CP prepended.
TimeFrame ofdm_modulate(const SubcarrierSymbols &S, const PerSubcarrier &V, arma::uword n_tx, int cp_len,
                        double sample_period = 0.0);

/// Concatenation of several OFDM symbols with the same precoders.
TimeFrame ofdm_modulate(const std::vector<SubcarrierSymbols> &S, const PerSubcarrier &V, arma::uword n_tx,
                        int cp_len, double sample_period = 0.0);

/// Demodulates OFDM symbol `symbol` of a frame; column n of the result is r_n.
CMat ofdm_demodulate(const TimeFrame &y, int Nc, int cp_len, arma::uword symbol = 0);

/// Demodulates all complete OFDM symbols of a frame.
std::vector<CMat> ofdm_demodulate_all(const TimeFrame &y, int Nc, int cp_len);

/// Horizontal concatenation of frames with equal antenna count.
TimeFrame concat(const TimeFrame &a, const TimeFrame &b);
} // namespace fdsim
