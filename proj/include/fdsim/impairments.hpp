// SPDX-License-Identifier: Apache-2.0
//
// Baseband TX RF chain (IQ mixer image, memoryless third-order PA) and the
// RX ADC model.

#pragma once

#include "fdsim/numerics.hpp"
#include "fdsim/waveform.hpp"

#include <array>
#include <vector>

namespace fdsim
{
struct TxImpairmentModel
{
    double irr_db = 0.0; // +inf for an ideal mixer
    double g = 1.0;      // gain imbalance
    double theta = 0.0;  // phase imbalance, rad
    cx mu1{1.0, 0.0};
    cx mu2{0.0, 0.0};
    cx nu1{1.0, 0.0};
    double iip3_dbm = 0.0; // +inf for a linear PA
    /// PA input power that unit baseband power corresponds to. 30 dBm makes
    /// baseband power numerically equal to W.
    double drive_ref_dbm = 30.0;

    /// IIP3 as a baseband power ratio relative to unit drive.
    double iip3_linear() const;
    cx nu3() const { return nu3_for(nu1); }
    cx nu3_for(cx nu1_value) const;
};

enum class IrrSplit
{
    GainOnly,  // theta = 0, g < 1
    PhaseOnly, // g = 1
};

TxImpairmentModel make_impairment_model(double irr_db, double iip3_dbm, cx nu1 = 1.0,
                                        IrrSplit split = IrrSplit::GainOnly, double drive_ref_dbm = 30.0);

/// Explicit (g, theta) pair.
TxImpairmentModel make_impairment_model_gt(double g, double theta, double iip3_dbm, cx nu1 = 1.0,
                                           double drive_ref_dbm = 30.0);

/// Diagonals g_{j,i} of G_1..G_6, one entry per antenna.
struct GainMatrices
{
    std::array<CVec, 6> diag;
    CVec nu1; // back-solved per antenna
    CVec nu3;

    arma::uword n_tx() const { return diag[0].n_elem; }
    CMat G(int j) const; // j = 1..6
    CMat augmented() const; // [G1 ... G6], n_tx x 6 n_tx
};

GainMatrices derive_gain_matrices(const TxImpairmentModel &model, const RVec &g1_target);

/// psi = col{x, x*, x.^3, x.^2 .* x*, x .* (x*).^2, (x*).^3}
CVec build_augmented_vector(const CVec &x);
/// Column-wise psi of an (antennas x time) block.
CMat build_augmented_frame(const CMat &X);

struct TxOutput
{
    TimeFrame x_tilde; // G1 x + z
    TimeFrame z;       // nonlinear (non-G1) part
};

TxOutput tx_chain(const TimeFrame &x, const GainMatrices &G);

/// Reference scalar chain: IQ mixer then PA, x_pa = nu1 x_iq + nu3 |x_iq|^2 x_iq.
cx iq_mixer(cx x, cx mu1, cx mu2);
cx pa(cx x_iq, cx nu1, cx nu3);

struct AdcModel
{
    int bits = 14;
    double dynamic_range_db = 60.0;
    double full_scale_dbm = -30.0; // per-rail clip level is sqrt(full-scale power)
    double papr_db = 10.0;

    double clip_amplitude() const;
    double lsb() const;
};

/// full_scale_dbm = lambda_b_dbm + papr_db
AdcModel make_adc_model(int bits, double dynamic_range_db, double lambda_b_dbm, double papr_db);

CMat adc_quantize(const CMat &y, const AdcModel &adc);
TimeFrame adc_quantize(const TimeFrame &y, const AdcModel &adc);

/// Per antenna: saturated iff power >= lambda_b.
std::vector<bool> check_saturation(const RVec &residual_power_w, double lambda_b_w);
bool any_saturated(const std::vector<bool> &flags);
} // namespace fdsim
