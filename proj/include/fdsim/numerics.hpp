// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra helpers used across the simulator.

#pragma once

#include <armadillo>
#include <stdexcept>
#include <string>

namespace fdsim
{
using cx = std::complex<double>;
using CMat = arma::cx_mat;
using CVec = arma::cx_vec;
using RMat = arma::mat;
using RVec = arma::vec;

/// Thrown when a decomposition fails or a matrix that must be PD is not.
class NumericalError : public std::runtime_error
{
public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

/// Full SVD, A = U diag(s) V^H, singular values descending.
struct Svd
{
    CMat U; // m x m
    RVec s; // min(m, n)
    CMat V; // n x n
};
Svd svd(const CMat &A);

/// Economy SVD (U is m x r, V is n x r, r = min(m, n)).
Svd svd_econ(const CMat &A);

/// Eigen-decomposition of a general square matrix, sorted by |lambda| descending.
/// Columns of `vectors` are right eigenvectors with unit norm.
struct Eig
{
    CVec values;
    CMat vectors;
};
Eig eig_general(const CMat &A);

/// Unitary DFT: X[n] = 1/sqrt(N) sum_k x[k] e^{-j 2 pi n k / N}.
CVec fft(const CVec &x);
CVec ifft(const CVec &X);

/// Row-wise unitary transforms of an (antennas x samples) block.
CMat fft_rows(const CMat &x);
CMat ifft_rows(const CMat &X);

/// X X^H
CMat gram(const CMat &X);

/// log2 det of a Hermitian positive definite matrix.
double log2det_hpd(const CMat &A);

/// Moore-Penrose pseudoinverse.
CMat pinv(const CMat &A);

/// Frobenius norm squared.
double fro2(const CMat &A);

/// Hermitian part (A + A^H) / 2.
CMat herm(const CMat &A);

} // namespace fdsim
