// SPDX-License-Identifier: Apache-2.0
//
// Per-subcarrier rate and interference-plus-noise evaluation, and the
// decoupled DL (saturation-constrained) and UL beamformer solvers.
// Combiners U are stored with one beam per row.

#pragma once

#include "fdsim/numerics.hpp"

#include <vector>

namespace fdsim
{
struct BeamformerSet
{
    std::vector<CMat> V_b;  // n_tx_b x d_b
    std::vector<CMat> U_m1; // d_b x n_rx_m1
    std::vector<CMat> V_m2; // n_tx_m2 x d_m2
    std::vector<CMat> U_b;  // d_m2 x n_rx_b
    RVec g1_b;
    RVec g1_m2;
};

struct RatePair
{
    RVec r_ul; // per data subcarrier, bits/s/Hz
    RVec r_dl;
    double ul_mean() const { return r_ul.n_elem ? arma::mean(r_ul) : 0.0; }
    double dl_mean() const { return r_dl.n_elem ? arma::mean(r_dl) : 0.0; }
};

/// Instantaneous quantities of one subcarrier entering the IpN covariances.
struct IpnInputs
{
    CMat U_b, U_m1;
    CMat H_si_tilde; // H_SI_hat + C
    CMat H_ul, H_dl;
    CMat G1_b;
    CMat V_b;
    CVec s_b;
    CVec z_b, z_m2;
    CVec d; // digital cancellation signal
    double sigma2_b = 0.0;
    double sigma2_m1 = 0.0;
};

struct IpnCovariances
{
    CMat Q_b;
    CMat Q_m1;
};

/// || U (interference) ||^2 + sigma^2 ||U||^2 with ||X||^2 read as X X^H.
IpnCovariances ipn_covariances(const IpnInputs &in);

/// Covariance form: U R U^H + sigma^2 U U^H, with R the interference covariance.
CMat ipn_from_covariance(const CMat &U, const CMat &R, double sigma2);

/// log2 det(I + ||U H_eff||^2 Q^{-1}), H_eff = H G1 V.
double rate(const CMat &U, const CMat &H_eff, const CMat &Q);

/// Throws NumericalError unless Q is Hermitian PSD within tolerance.
void check_psd(const CMat &Q, const char *what);

struct DlSolution
{
    CMat V;            // n_tx x alpha
    CMat U;            // alpha x n_rx_m1
    int alpha = 0;
    bool feasible = true;
    int worst_antenna = -1; // RX antenna with the largest residual
    double margin_db = 0.0; // worst residual over lambda_b, dB (negative when feasible)
    RVec si_power;          // per RX antenna, linear + nonlinear terms
};

/// DL beamforming under the per-antenna residual-SI constraint.
/// g1: diagonal of G1_b; Rz: covariance of the nonlinear TX part on this subcarrier
/// (empty for none).
DlSolution solve_dl(const CMat &H_dl, const CMat &H_si_tilde, const RVec &g1, const CMat &Rz, double lambda_b);

/// Residual SI power per RX antenna for a candidate precoder.
RVec dl_si_power(const CMat &H_si_tilde, const RVec &g1, const CMat &V, const CMat &Rz);

struct UlSolution
{
    CMat V_m2;       // n_tx_m2 x d_m2
    CMat U_b;        // d_m2 x n_rx_b
    RVec eigenvalues; // of Sigma^{-1} S, descending
};

/// Sigma_b = R_res + H_ul R_zm2 H_ul^H + sigma^2 I, with R_res the covariance of the
/// SI remaining after digital cancellation.
CMat assemble_sigma_b(const CMat &R_res, const CMat &H_ul, const CMat &R_zm2, double sigma2_b);

/// UL beamforming: V_m2 = top right singular vectors of H_ul, U_b rows are the top
/// eigenvectors of A_b^H = Sigma^{-1} S (left eigenvectors of A_b = S Sigma^{-1}).
UlSolution solve_ul(const CMat &H_ul, const RVec &g1_m2, int d_m2, const CMat &Sigma_b);
} // namespace fdsim
