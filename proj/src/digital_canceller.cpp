// SPDX-License-Identifier: Apache-2.0

#include "fdsim/digital_canceller.hpp"
#include "fdsim/impairments.hpp"
#include "fdsim/units.hpp"

#include <stdexcept>

namespace fdsim
{
std::vector<int> contiguous_lags(int L)
{
    std::vector<int> v(L);
    for (int l = 0; l < L; ++l)
        v[l] = l;
    return v;
}

AugmentedDesignMatrix build_design_matrix(const CMat &X, const std::vector<int> &lags, arma::uword start,
                                          arma::uword T, Basis basis)
{
    if (T < 1)
        throw std::invalid_argument("build_design_matrix: T must be >= 1");
    if (start + T > X.n_cols)
        throw std::invalid_argument("build_design_matrix: window exceeds available samples");
    const arma::uword n = X.n_rows;
    const arma::uword blk = (basis == Basis::Full ? 6 : 1) * n;

    AugmentedDesignMatrix D;
    D.lags = lags;
    D.basis = basis;
    D.n_tx = n;
    D.Psi.zeros(blk * lags.size(), T);

    for (std::size_t b = 0; b < lags.size(); ++b)
    {
        const long long lag = lags[b];
        if (lag < 0)
            throw std::invalid_argument("build_design_matrix: negative lag");
        // first column whose delayed sample exists
        const long long first = std::max<long long>(0, lag - (long long)start);
        if (first >= (long long)T)
            continue;
        const CMat Xs = X.cols(start + first - lag, start + T - 1 - lag);
        const CMat P = basis == Basis::Full ? build_augmented_frame(Xs) : Xs;
        D.Psi.submat(b * blk, first, (b + 1) * blk - 1, T - 1) = P;
    }
    return D;
}

AugmentedDesignMatrix build_design_matrix(const CMat &X, int L)
{
    return build_design_matrix(X, contiguous_lags(L), 0, X.n_cols);
}

DigitalCancellerState tsvd_estimate(const AugmentedDesignMatrix &D, const CMat &Y, double sigma2_b,
                                    const TsvdOptions &opt)
{
    const CMat &Psi = D.Psi;
    if (Y.n_cols != Psi.n_cols)
        throw std::invalid_argument("tsvd_estimate: Y and Psi differ in sample count");
    const double T = double(Psi.n_cols);
    const Svd s = svd_econ(Psi);
    const arma::uword r = s.s.n_elem;

    DigitalCancellerState st;
    st.lags = D.lags;
    st.basis = D.basis;
    st.singular_values = s.s;
    st.Theta.zeros(Y.n_rows, Psi.n_rows);

    // residual rows: ||y_r||^2 - sum_i |y_r v_i|^2 since the v_i are orthonormal
    RVec res = arma::sum(arma::square(arma::abs(Y)), 1);
    const CMat YV = Y * s.V; // n_rx x r
    const double s_max = r ? s.s(0) : 0.0;
    const int target = opt.force_rank ? std::min<int>(*opt.force_rank, int(r)) : int(r);
    st.residual_by_rank.zeros(r);

    int p = 0;
    for (arma::uword i = 0; i < r && int(i) < target; ++i)
    {
        p = int(i) + 1;
        if (s.s(i) > opt.zero_tol * s_max && s.s(i) > 0.0)
        {
            st.Theta += YV.col(i) * s.U.col(i).t() / s.s(i);
            res -= arma::square(arma::abs(YV.col(i)));
        }
        res.transform([](double v) { return std::max(v, 0.0); });
        st.residual_by_rank(i) = arma::mean(res) / T;
        if (!opt.force_rank && arma::all(res / T <= sigma2_b))
            break;
    }
    st.p = p;
    st.residual_by_rank.resize(std::max(p, 0));
    // exact recomputation guards the running update against cancellation error
    st.residual_power = arma::mean(arma::square(arma::abs(Y - st.Theta * Psi)), 1);
    return st;
}

CMat cancel_signal(const DigitalCancellerState &state, const CMat &Psi)
{
    if (Psi.n_rows != state.Theta.n_cols)
        throw std::invalid_argument("cancel_signal: design matrix does not match the fitted state");
    return -state.Theta * Psi;
}

double digital_cancellation_db(const CMat &before, const CMat &after)
{
    if (before.n_rows != after.n_rows)
        throw std::invalid_argument("digital_cancellation_db: antenna count differs");
    if (before.n_rows == 0)
        return 0.0;
    double acc = 0.0;
    for (arma::uword r = 0; r < before.n_rows; ++r)
        acc += linear_to_db(fro2(CMat(before.row(r)))) - linear_to_db(fro2(CMat(after.row(r))));
    return acc / double(before.n_rows);
}

nlohmann::json tsvd_diagnostics(const DigitalCancellerState &st)
{
    nlohmann::json j;
    j["p"] = st.p;
    j["singular_values"] = arma::conv_to<std::vector<double>>::from(st.singular_values);
    j["residual_power_w"] = arma::conv_to<std::vector<double>>::from(st.residual_power);
    j["residual_by_rank_w"] = arma::conv_to<std::vector<double>>::from(st.residual_by_rank);
    j["lags"] = st.lags;
    j["basis"] = st.basis == Basis::Full ? "full" : "linear";
    return j;
}
} // namespace fdsim
