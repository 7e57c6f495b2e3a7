// SPDX-License-Identifier: Apache-2.0

#include "fdsim/beamforming.hpp"
#include "fdsim/units.hpp"

#include <algorithm>
#include <cmath>

namespace fdsim
{
void check_psd(const CMat &Q, const char *what)
{
    if (!Q.is_finite())
        throw NumericalError(std::string(what) + ": non-finite covariance");
    const double scale = std::max(arma::norm(Q, "fro"), 1e-300);
    if (arma::norm(Q - Q.t(), "fro") > 1e-9 * scale)
        throw NumericalError(std::string(what) + ": covariance not Hermitian");
    if (Q.n_rows == 0)
        return;
    RVec ev = arma::eig_sym(herm(Q));
    if (ev.min() < -1e-9 * scale)
        throw NumericalError(std::string(what) + ": covariance not positive semidefinite");
}

CMat ipn_from_covariance(const CMat &U, const CMat &R, double sigma2)
{
    CMat Q = U * R * U.t() + sigma2 * gram(U);
    return herm(Q);
}

IpnCovariances ipn_covariances(const IpnInputs &in)
{
    const arma::uword nrb = in.H_si_tilde.n_rows;
    CVec e_b(nrb, arma::fill::zeros);
    if (in.V_b.n_cols)
        e_b += in.H_si_tilde * (in.G1_b * in.V_b * in.s_b);
    if (in.z_b.n_elem)
        e_b += in.H_si_tilde * in.z_b;
    if (in.z_m2.n_elem)
        e_b += in.H_ul * in.z_m2;
    if (in.d.n_elem)
        e_b += in.d;

    IpnCovariances q;
    q.Q_b = ipn_from_covariance(in.U_b, e_b * e_b.t(), in.sigma2_b);
    CVec e_m1 = in.z_b.n_elem ? CVec(in.H_dl * in.z_b) : CVec(in.H_dl.n_rows, arma::fill::zeros);
    q.Q_m1 = ipn_from_covariance(in.U_m1, e_m1 * e_m1.t(), in.sigma2_m1);
    check_psd(q.Q_b, "ipn_covariances(Q_b)");
    check_psd(q.Q_m1, "ipn_covariances(Q_m1)");
    return q;
}

double rate(const CMat &U, const CMat &H_eff, const CMat &Q)
{
    if (U.n_rows == 0)
        return 0.0;
    const CMat S = gram(U * H_eff);
    // det(I + S Q^-1) = det(Q + S) / det(Q)
    const double r = log2det_hpd(herm(Q + S)) - log2det_hpd(Q);
    return std::max(r, 0.0);
}

RVec dl_si_power(const CMat &H_si_tilde, const RVec &g1, const CMat &V, const CMat &Rz)
{
    const CMat A = H_si_tilde * arma::diagmat(arma::conv_to<CVec>::from(g1)) * V;
    RVec p = arma::sum(arma::square(arma::abs(A)), 1);
    if (Rz.n_elem)
        p += arma::real(arma::diagvec(H_si_tilde * Rz * H_si_tilde.t()));
    return p;
}

DlSolution solve_dl(const CMat &H_dl, const CMat &H_si_tilde, const RVec &g1, const CMat &Rz, double lambda_b)
{
    const arma::uword n_tx = H_dl.n_cols;
    if (H_si_tilde.n_cols != n_tx || g1.n_elem != n_tx)
        throw std::invalid_argument("solve_dl: dimension mismatch");
    const int alpha_max = int(std::min(H_dl.n_rows, n_tx));
    const Svd Dsi = svd(H_si_tilde);

    DlSolution sol;
    Svd Feff;
    // single-antenna users have alpha_max = 1, the loop then runs once
    const int alpha_min = std::min(2, alpha_max);
    for (int alpha = alpha_max; alpha >= alpha_min; --alpha)
    {
        const CMat E = Dsi.V.cols(n_tx - alpha, n_tx - 1);
        Feff = svd(CMat(H_dl * E));
        sol.V = E * Feff.V;
        sol.alpha = alpha;
        sol.si_power = dl_si_power(H_si_tilde, g1, sol.V, Rz);
        if (sol.si_power.max() < lambda_b)
            break;
    }
    sol.U = Feff.U.cols(0, sol.alpha - 1).t();
    sol.worst_antenna = int(sol.si_power.index_max());
    sol.margin_db = linear_to_db(sol.si_power.max()) - linear_to_db(lambda_b);
    sol.feasible = sol.si_power.max() < lambda_b;
    return sol;
}

CMat assemble_sigma_b(const CMat &R_res, const CMat &H_ul, const CMat &R_zm2, double sigma2_b)
{
    const arma::uword n = H_ul.n_rows;
    CMat S = sigma2_b * arma::eye<CMat>(n, n);
    if (R_res.n_elem)
        S += R_res;
    if (R_zm2.n_elem)
        S += H_ul * R_zm2 * H_ul.t();
    return herm(S);
}

UlSolution solve_ul(const CMat &H_ul, const RVec &g1_m2, int d_m2, const CMat &Sigma_b)
{
    const arma::uword n_tx = H_ul.n_cols;
    if (g1_m2.n_elem != n_tx || d_m2 < 1 || d_m2 > int(std::min(n_tx, H_ul.n_rows)))
        throw std::invalid_argument("solve_ul: dimension mismatch");
    UlSolution sol;
    const Svd D = svd(H_ul);
    sol.V_m2 = D.V.cols(0, d_m2 - 1);

    const CMat Heff = H_ul * arma::diagmat(arma::conv_to<CVec>::from(g1_m2)) * sol.V_m2;
    const CMat S = gram(Heff);
    CMat SigInvS;
    if (!arma::solve(SigInvS, herm(Sigma_b), S, arma::solve_opts::likely_sympd))
        throw NumericalError("solve_ul: singular interference covariance");
    const Eig e = eig_general(SigInvS);
    sol.eigenvalues = arma::real(e.values);
    sol.U_b.set_size(d_m2, H_ul.n_rows);
    for (int i = 0; i < d_m2; ++i)
        sol.U_b.row(i) = e.vectors.col(i).t();
    return sol;
}
} // namespace fdsim
