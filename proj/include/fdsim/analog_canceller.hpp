// SPDX-License-Identifier: Apache-2.0
//
// N-tap wideband analog SI canceller: MUX (L1), attenuator/phase-shifter
// taps (L2) and DEMUX (L3) per delay line.

#pragma once

#include "fdsim/channel.hpp"
#include "fdsim/numerics.hpp"
#include "fdsim/rng.hpp"

#include <json.hpp>
#include <vector>

namespace fdsim
{
struct AnalogCancellerConfig
{
    int L_C = 0;
    arma::uword n_tx = 0;
    arma::uword n_rx = 0;
    std::vector<int> delays; // sample delay of each delay line
    std::vector<RMat> L1;    // taps_l x n_tx, binary, rows sum to 1
    std::vector<CVec> L2;    // tap coefficients (diagonal)
    std::vector<RMat> L3;    // n_rx x taps_l, binary, columns sum to 1
    double atten_step_db = 0.02;
    double phase_step_deg = 0.13;

    int n_taps() const;
};

struct CancellerMatrices
{
    std::vector<CMat> C; // n_rx x n_tx per delay line
    std::vector<int> delays;

    WidebandChannel as_channel() const;
};

enum class TapAllocation
{
    Orderly, // delay-major, column (TX) then row (RX)
    Greedy,  // strongest |H| entries of each delay first
};

/// L_C = ceil(N / (n_tx n_rx)); each covered tap is -H_hat[l](j, i).
AnalogCancellerConfig build_canceller(const WidebandChannel &H_hat, int N,
                                      TapAllocation alloc = TapAllocation::Orderly);

/// Magnitude rounded to the attenuation grid (dB), phase jittered uniformly within +-step/2.
AnalogCancellerConfig quantize_taps(const AnalogCancellerConfig &cfg, Rng &rng);

/// C[l] = L3[l] diag(L2[l]) L1[l]
CancellerMatrices canceller_matrices(const AnalogCancellerConfig &cfg);

/// Throws std::logic_error if the L1/L3 routing constraints are violated.
void validate_routing(const AnalogCancellerConfig &cfg);

/// Cancellation signal sum_l C[l] x_tilde[k - d_l], to be added at the RX inputs.
TimeFrame apply_canceller(const TimeFrame &x_tilde, const CancellerMatrices &C);

/// Time-average power per antenna, W.
RVec frame_power(const TimeFrame &y);
/// Time-average power per antenna in dBm; zero power maps to the -400 dBm floor.
RVec residual_si_power(const TimeFrame &y_res);

nlohmann::json canceller_to_json(const AnalogCancellerConfig &cfg);
} // namespace fdsim
