// SPDX-License-Identifier: Apache-2.0

#include "fdsim/impairments.hpp"
#include "fdsim/units.hpp"

#include <cmath>
#include <stdexcept>

namespace fdsim
{
double TxImpairmentModel::iip3_linear() const
{
    if (std::isinf(iip3_dbm) && iip3_dbm > 0)
        return INFINITY;
    return db_to_linear(iip3_dbm - drive_ref_dbm);
}

cx TxImpairmentModel::nu3_for(cx nu1_value) const
{
    const double ip = iip3_linear();
    if (std::isinf(ip))
        return 0.0;
    return nu1_value / ip;
}

TxImpairmentModel make_impairment_model_gt(double g, double theta, double iip3_dbm, cx nu1, double drive_ref_dbm)
{
    TxImpairmentModel m;
    m.g = g;
    m.theta = theta;
    m.mu1 = 0.5 * (1.0 + g * std::exp(cx(0.0, -theta)));
    m.mu2 = 0.5 * (1.0 - g * std::exp(cx(0.0, theta)));
    m.irr_db = std::abs(m.mu2) == 0.0 ? INFINITY : 10.0 * std::log10(std::norm(m.mu1 / m.mu2));
    m.nu1 = nu1;
    m.iip3_dbm = iip3_dbm;
    m.drive_ref_dbm = drive_ref_dbm;
    return m;
}

TxImpairmentModel make_impairment_model(double irr_db, double iip3_dbm, cx nu1, IrrSplit split,
                                        double drive_ref_dbm)
{
    if (!(irr_db > 0.0))
        throw std::invalid_argument("make_impairment_model: IRR must be > 0 dB");
    if (std::isinf(irr_db))
        return make_impairment_model_gt(1.0, 0.0, iip3_dbm, nu1, drive_ref_dbm);
    const double r = std::sqrt(db_to_linear(irr_db));
    if (split == IrrSplit::GainOnly)
        // ((1+g)/(1-g))^2 = IRR
        return make_impairment_model_gt((r - 1.0) / (r + 1.0), 0.0, iip3_dbm, nu1, drive_ref_dbm);
    // cot^2(theta/2) = IRR
    return make_impairment_model_gt(1.0, 2.0 * std::atan(1.0 / r), iip3_dbm, nu1, drive_ref_dbm);
}

CMat GainMatrices::G(int j) const
{
    if (j < 1 || j > 6)
        throw std::out_of_range("GainMatrices::G: index must be 1..6");
    return arma::diagmat(diag[j - 1]);
}

CMat GainMatrices::augmented() const
{
    const arma::uword n = n_tx();
    CMat A(n, 6 * n, arma::fill::zeros);
    for (int j = 0; j < 6; ++j)
        A.cols(j * n, (j + 1) * n - 1) = arma::diagmat(diag[j]);
    return A;
}

GainMatrices derive_gain_matrices(const TxImpairmentModel &m, const RVec &g1_target)
{
    if (std::abs(m.mu1) == 0.0)
        throw std::invalid_argument("derive_gain_matrices: mu1 = 0");
    const arma::uword n = g1_target.n_elem;
    GainMatrices G;
    for (auto &d : G.diag)
        d.zeros(n);
    G.nu1.set_size(n);
    G.nu3.set_size(n);

    const cx mu1 = m.mu1, mu2 = m.mu2;
    const double a1 = std::norm(mu1), a2 = std::norm(mu2);
    for (arma::uword i = 0; i < n; ++i)
    {
        if (!(g1_target(i) > 0.0))
            throw std::invalid_argument("derive_gain_matrices: g1 target must be > 0");
        const cx nu1 = g1_target(i) / mu1;
        const cx nu3 = m.nu3_for(nu1);
        G.nu1(i) = nu1;
        G.nu3(i) = nu3;
        G.diag[0](i) = mu1 * nu1;
        G.diag[1](i) = mu2 * nu1;
        G.diag[2](i) = mu1 * mu1 * std::conj(mu2) * nu3;
        G.diag[3](i) = (a1 + 2.0 * a2) * mu1 * nu3;
        G.diag[4](i) = (2.0 * a1 + a2) * mu2 * nu3;
        G.diag[5](i) = std::conj(mu1) * mu2 * mu2 * nu3;
    }
    return G;
}

CVec build_augmented_vector(const CVec &x)
{
    return build_augmented_frame(CMat(x)).col(0);
}

CMat build_augmented_frame(const CMat &X)
{
    const arma::uword n = X.n_rows;
    const CMat Xc = arma::conj(X);
    const CMat X2 = X % X;
    const CMat Xc2 = Xc % Xc;
    CMat P(6 * n, X.n_cols);
    if (n == 0)
        return P;
    P.rows(0, n - 1) = X;
    P.rows(n, 2 * n - 1) = Xc;
    P.rows(2 * n, 3 * n - 1) = X2 % X;
    P.rows(3 * n, 4 * n - 1) = X2 % Xc;
    P.rows(4 * n, 5 * n - 1) = X % Xc2;
    P.rows(5 * n, 6 * n - 1) = Xc2 % Xc;
    return P;
}

TxOutput tx_chain(const TimeFrame &x, const GainMatrices &G)
{
    const arma::uword n = x.n_antennas();
    if (G.n_tx() != n)
        throw std::invalid_argument("tx_chain: gain matrix size differs from antenna count");
    const CMat P = build_augmented_frame(x.samples);
    CMat z(n, x.length(), arma::fill::zeros);
    for (int j = 1; j < 6; ++j)
        z += arma::diagmat(G.diag[j]) * P.rows(j * n, (j + 1) * n - 1);
    TxOutput out;
    out.z = {z, x.sample_period};
    out.x_tilde = {arma::diagmat(G.diag[0]) * x.samples + z, x.sample_period};
    return out;
}

cx iq_mixer(cx x, cx mu1, cx mu2)
{
    return mu1 * x + mu2 * std::conj(x);
}

cx pa(cx x_iq, cx nu1, cx nu3)
{
    return nu1 * x_iq + nu3 * std::norm(x_iq) * x_iq;
}

double AdcModel::clip_amplitude() const
{
    return std::sqrt(dbm_to_linear(full_scale_dbm));
}

double AdcModel::lsb() const
{
    return 2.0 * clip_amplitude() / std::ldexp(1.0, bits);
}

AdcModel make_adc_model(int bits, double dynamic_range_db, double lambda_b_dbm, double papr_db)
{
    if (bits < 1)
        throw std::invalid_argument("make_adc_model: bits must be >= 1");
    if (dynamic_range_db > 6.02 * bits + 1.76 + 1e-9)
        throw std::invalid_argument("make_adc_model: dynamic range exceeds the ideal quantizer bound");
    AdcModel a;
    a.bits = bits;
    a.dynamic_range_db = dynamic_range_db;
    a.papr_db = papr_db;
    a.full_scale_dbm = lambda_b_dbm + papr_db;
    return a;
}

namespace
{
// mid-rise uniform quantizer with 2^bits levels over [-A, A]
double quantize_rail(double v, double lsb, double max_index)
{
    double idx = std::floor(v / lsb);
    idx = std::clamp(idx, -max_index - 1.0, max_index);
    return (idx + 0.5) * lsb;
}
} // namespace

CMat adc_quantize(const CMat &y, const AdcModel &adc)
{
    const double lsb = adc.lsb();
    const double max_index = std::ldexp(1.0, adc.bits - 1) - 1.0;
    CMat q(y.n_rows, y.n_cols);
    for (arma::uword i = 0; i < y.n_elem; ++i)
        q(i) = cx(quantize_rail(y(i).real(), lsb, max_index), quantize_rail(y(i).imag(), lsb, max_index));
    return q;
}

TimeFrame adc_quantize(const TimeFrame &y, const AdcModel &adc)
{
    return {adc_quantize(y.samples, adc), y.sample_period};
}

std::vector<bool> check_saturation(const RVec &p, double lambda_b_w)
{
    std::vector<bool> s(p.n_elem);
    for (arma::uword i = 0; i < p.n_elem; ++i)
    {
        if (p(i) < 0.0)
            throw std::invalid_argument("check_saturation: negative power");
        s[i] = p(i) >= lambda_b_w;
    }
    return s;
}

bool any_saturated(const std::vector<bool> &flags)
{
    for (bool f : flags)
        if (f)
            return true;
    return false;
}
} // namespace fdsim
