// SPDX-License-Identifier: Apache-2.0

#include "fdsim/numerics.hpp"

#include <algorithm>
#include <numeric>

namespace fdsim
{

Svd svd(const CMat &A)
{
    Svd r;
    if (A.n_rows == 0 || A.n_cols == 0)
    {
        r.U = arma::eye<CMat>(A.n_rows, A.n_rows);
        r.V = arma::eye<CMat>(A.n_cols, A.n_cols);
        return r;
    }
    if (!A.is_finite())
        throw NumericalError("svd: non-finite input");
    if (!arma::svd(r.U, r.s, r.V, A, "std"))
        throw NumericalError("svd: decomposition failed");
    return r;
}

Svd svd_econ(const CMat &A)
{
    Svd r;
    if (A.n_rows == 0 || A.n_cols == 0)
        return r;
    if (!A.is_finite())
        throw NumericalError("svd_econ: non-finite input");
    if (!arma::svd_econ(r.U, r.s, r.V, A, "both", "dc") &&
        !arma::svd_econ(r.U, r.s, r.V, A, "both", "std"))
        throw NumericalError("svd_econ: decomposition failed");
    return r;
}

Eig eig_general(const CMat &A)
{
    if (A.n_rows != A.n_cols)
        throw std::invalid_argument("eig_general: matrix must be square");
    if (!A.is_finite())
        throw NumericalError("eig_general: non-finite input");
    CVec val;
    CMat vec;
    if (!arma::eig_gen(val, vec, A))
        throw NumericalError("eig_general: decomposition failed");

    std::vector<arma::uword> idx(val.n_elem);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](arma::uword a, arma::uword b)
                     { return std::abs(val(a)) > std::abs(val(b)); });
    Eig r;
    r.values.set_size(val.n_elem);
    r.vectors.set_size(A.n_rows, val.n_elem);
    for (arma::uword i = 0; i < idx.size(); ++i)
    {
        r.values(i) = val(idx[i]);
        CVec v = vec.col(idx[i]);
        double n = arma::norm(v);
        r.vectors.col(i) = n > 0.0 ? CVec(v / n) : v;
    }
    return r;
}

CVec fft(const CVec &x)
{
    if (x.n_elem == 0)
        return x;
    return arma::fft(x) / std::sqrt(double(x.n_elem));
}

CVec ifft(const CVec &X)
{
    if (X.n_elem == 0)
        return X;
    return arma::ifft(X) * std::sqrt(double(X.n_elem));
}

CMat fft_rows(const CMat &x)
{
    if (x.n_elem == 0)
        return x;
    // arma::fft works column-wise
    return CMat(arma::fft(CMat(x.st())).st()) / std::sqrt(double(x.n_cols));
}

CMat ifft_rows(const CMat &X)
{
    if (X.n_elem == 0)
        return X;
    return CMat(arma::ifft(CMat(X.st())).st()) * std::sqrt(double(X.n_cols));
}

CMat gram(const CMat &X)
{
    return X * X.t();
}

double log2det_hpd(const CMat &A)
{
    CMat R;
    if (!arma::chol(R, herm(A)))
        throw NumericalError("log2det_hpd: matrix not positive definite");
    double acc = 0.0;
    for (arma::uword i = 0; i < R.n_rows; ++i)
        acc += std::log2(std::real(R(i, i)));
    return 2.0 * acc;
}

CMat pinv(const CMat &A)
{
    CMat P;
    if (!arma::pinv(P, A))
        throw NumericalError("pinv: decomposition failed");
    return P;
}

double fro2(const CMat &A)
{
    return arma::accu(arma::square(arma::abs(A)));
}

CMat herm(const CMat &A)
{
    return 0.5 * (A + A.t());
}

} // namespace fdsim
