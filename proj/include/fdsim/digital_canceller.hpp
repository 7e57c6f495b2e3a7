// SPDX-License-Identifier: Apache-2.0
//
// Truncated-SVD estimation of the augmented residual SI channel and
// reconstruction of the digital cancellation signal.

#pragma once

#include "fdsim/numerics.hpp"

#include <json.hpp>
#include <optional>
#include <vector>

namespace fdsim
{
enum class Basis
{
    Full,   // all six blocks of psi
    Linear, // x only
};

struct AugmentedDesignMatrix
{
    CMat Psi; // (blocks * n_tx * |lags|) x T
    std::vector<int> lags;
    Basis basis = Basis::Full;
    arma::uword n_tx = 0;
};

/// Column c holds col{psi[k - lags[0]], psi[k - lags[1]], ...} with k = start + c;
/// samples before the start of X are zero.
AugmentedDesignMatrix build_design_matrix(const CMat &X, const std::vector<int> &lags, arma::uword start,
                                          arma::uword T, Basis basis = Basis::Full);

/// Contiguous lags 0..L-1 over all columns of X.
AugmentedDesignMatrix build_design_matrix(const CMat &X, int L);

std::vector<int> contiguous_lags(int L);

struct TsvdOptions
{
    std::optional<int> force_rank; // skip the stopping test and use this rank
    double zero_tol = 1e-12;       // singular values below zero_tol * s_max are skipped
};

struct DigitalCancellerState
{
    CMat Theta; // n_rx x rows(Psi)
    int p = 0;  // rank used
    RVec residual_power;    // per RX antenna, training average
    RVec singular_values;
    RVec residual_by_rank;  // total per-antenna-average residual after each p (index p-1)
    std::vector<int> lags;
    Basis basis = Basis::Full;
};

DigitalCancellerState tsvd_estimate(const AugmentedDesignMatrix &Psi, const CMat &Y_res, double sigma2_b,
                                    const TsvdOptions &opt = {});

/// d = -Theta Psi
CMat cancel_signal(const DigitalCancellerState &state, const CMat &Psi);

/// Per-antenna 10 log10(P_before / P_after), averaged over antennas.
double digital_cancellation_db(const CMat &before, const CMat &after);

nlohmann::json tsvd_diagnostics(const DigitalCancellerState &state);
} // namespace fdsim
