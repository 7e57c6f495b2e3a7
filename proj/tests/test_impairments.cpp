// SPDX-License-Identifier: Apache-2.0
#include "catch_amalgamated.hpp"

#include "fdsim/impairments.hpp"
#include "fdsim/rng.hpp"
#include "fdsim/units.hpp"

#include <cmath>

using namespace fdsim;
using Catch::Approx;

namespace
{
double bin_power(const CVec &X, long bin)
{
    const long N = long(X.n_elem);
    return std::norm(X(arma::uword(((bin % N) + N) % N)));
}

// plain O(N) single-bin DFT, avoids relying on the library FFT
double tone_power(const CVec &x, double cycles)
{
    cx acc = 0.0;
    for (arma::uword k = 0; k < x.n_elem; ++k)
        acc += x(k) * std::polar(1.0, -2.0 * M_PI * cycles * double(k) / double(x.n_elem));
    return std::norm(acc / double(x.n_elem));
}
} // namespace

TEST_CASE("impairment model construction")
{
    const auto ideal = make_impairment_model_gt(1.0, 0.0, INFINITY);
    CHECK(std::abs(ideal.mu1 - 1.0) < 1e-15);
    CHECK(std::abs(ideal.mu2) < 1e-15);
    CHECK(std::isinf(ideal.irr_db));
    CHECK(std::abs(ideal.nu3()) == 0.0);

    for (IrrSplit split : {IrrSplit::GainOnly, IrrSplit::PhaseOnly})
    {
        const auto m = make_impairment_model(30.0, 15.0, 1.0, split);
        CHECK(std::norm(m.mu1 / m.mu2) == Approx(1000.0).epsilon(1e-9));
    }

    // gain-only split: g solves |(1+g)/(1-g)|^2 = 1000, found here by bisection
    const auto m = make_impairment_model(30.0, 15.0);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i)
    {
        const double g = 0.5 * (lo + hi);
        (std::pow((1 + g) / (1 - g), 2) < 1000.0 ? lo : hi) = g;
    }
    CHECK(m.theta == 0.0);
    CHECK(m.g == Approx(lo).epsilon(1e-12));
    CHECK(m.g < 1.0);

    CHECK_THROWS(make_impairment_model(0.0, 15.0));
    CHECK_THROWS(make_impairment_model(-3.0, 15.0));

    // IIP3 = 15 dBm with samples in sqrt(W): nu3 = nu1 / 10^(-1.5)
    const auto w = make_impairment_model(30.0, 15.0, 1.0, IrrSplit::GainOnly, 30.0);
    CHECK(std::abs(w.nu3_for(1.0)) == Approx(1.0 / dbm_to_linear(15.0)).epsilon(1e-12));
    CHECK(std::abs(w.nu3_for(1.0)) == Approx(std::pow(10.0, 1.5)).epsilon(1e-12));
    const auto d0 = make_impairment_model(30.0, 15.0, 1.0, IrrSplit::GainOnly, 0.0);
    CHECK(d0.iip3_linear() == Approx(std::pow(10.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("gain matrices")
{
    const RVec g1 = {0.5, 1.0, 2.0};

    const auto lin = make_impairment_model(30.0, INFINITY);
    const GainMatrices L = derive_gain_matrices(lin, g1);
    for (int j = 3; j <= 6; ++j)
        CHECK(arma::norm(L.G(j)) == 0.0);
    for (arma::uword i = 0; i < 3; ++i)
    {
        CHECK(std::abs(L.diag[0](i) - g1(i)) < 1e-15);
        CHECK(std::abs(L.diag[1](i) / L.diag[0](i) - lin.mu2 / lin.mu1) < 1e-14);
    }

    // ideal mixer: only the x|x|^2 block survives, with weight nu3
    const auto ideal = make_impairment_model_gt(1.0, 0.0, 15.0, 1.0, 0.0);
    const GainMatrices I = derive_gain_matrices(ideal, RVec{1.0});
    CHECK(std::abs(I.diag[1](0)) == 0.0);
    CHECK(std::abs(I.diag[2](0)) == 0.0);
    CHECK(std::abs(I.diag[4](0)) == 0.0);
    CHECK(std::abs(I.diag[5](0)) == 0.0);
    CHECK(std::abs(I.diag[3](0) - I.nu3(0)) < 1e-15);

    const GainMatrices G = derive_gain_matrices(make_impairment_model(30.0, 15.0), g1);
    CHECK(G.augmented().n_rows == 3);
    CHECK(G.augmented().n_cols == 18);
    CHECK_THROWS(derive_gain_matrices(lin, RVec{1.0, 0.0}));
}

TEST_CASE("augmented vector layout")
{
    const CVec p = build_augmented_vector(CVec{cx(1.0, 1.0)});
    const cx ref[6] = {{1, 1}, {1, -1}, {-2, 2}, {2, 2}, {2, -2}, {-2, -2}};
    for (int i = 0; i < 6; ++i)
        CHECK(std::abs(p(i) - ref[i]) < 1e-15);

    CHECK(arma::norm(build_augmented_vector(CVec(3, arma::fill::zeros))) == 0.0);

    const CVec r = {cx(0.3, 0.0), cx(-1.2, 0.0)};
    const CVec q = build_augmented_vector(r);
    CHECK(arma::norm(q.subvec(0, 1) - q.subvec(2, 3)) < 1e-15);
    for (int b = 3; b < 6; ++b)
        CHECK(arma::norm(q.subvec(2 * b, 2 * b + 1) - q.subvec(4, 5)) < 1e-15);
}

TEST_CASE("tx chain dual forms and scalar oracle")
{
    Rng rng(31);
    const RVec g1 = {0.7, 1.3, 2.1, 0.4};
    for (IrrSplit split : {IrrSplit::GainOnly, IrrSplit::PhaseOnly})
    {
        const auto m = make_impairment_model(25.0, 12.0, 1.0, split, 10.0);
        const GainMatrices G = derive_gain_matrices(m, g1);
        const TimeFrame x{rng.complex_normal(4, 500), 1e-9};
        const TxOutput o = tx_chain(x, G);
        const CMat dual = G.augmented() * build_augmented_frame(x.samples);
        CHECK(arma::norm(o.x_tilde.samples - dual) < 1e-12 * arma::norm(dual));
        CHECK(arma::norm(o.x_tilde.samples - G.G(1) * x.samples - o.z.samples) < 1e-12 * arma::norm(dual));
        for (arma::uword i = 0; i < 4; ++i)
            for (arma::uword k = 0; k < 500; ++k)
            {
                const cx ref = pa(iq_mixer(x.samples(i, k), m.mu1, m.mu2), G.nu1(i), G.nu3(i));
                CHECK(std::abs(o.x_tilde.samples(i, k) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
            }
    }

    const GainMatrices id = derive_gain_matrices(make_impairment_model_gt(1.0, 0.0, INFINITY), RVec{1.0, 1.0});
    const TimeFrame x{rng.complex_normal(2, 64), 1e-9};
    const TxOutput o = tx_chain(x, id);
    CHECK(arma::norm(o.x_tilde.samples - x.samples) < 1e-15);
    CHECK(arma::norm(o.z.samples) == 0.0);
}

TEST_CASE("linear output power follows g1")
{
    Rng rng(8);
    const double P = dbm_to_linear(40.0);
    const RVec g1(4, arma::fill::value(std::sqrt(P / 4)));
    const GainMatrices G = derive_gain_matrices(make_impairment_model(30.0, INFINITY), g1);
    const TimeFrame x{rng.complex_normal(4, 10000, 1.0), 1e-9};
    const TxOutput o = tx_chain(x, G);
    const double Pout = fro2(o.x_tilde.samples) / 10000.0;
    // image term adds 1/IRR on top of the linear power
    CHECK(Pout == Approx(P * (1.0 + 1e-3)).epsilon(0.03));
}

TEST_CASE("single-tone IQ image sits IRR below the tone")
{
    const auto m = make_impairment_model(30.0, INFINITY);
    const arma::uword N = 100000;
    const double f = 1234.0;
    CVec y(N);
    for (arma::uword k = 0; k < N; ++k)
        y(k) = iq_mixer(std::polar(1.0, 2.0 * M_PI * f * double(k) / double(N)), m.mu1, m.mu2);
    const double tone = tone_power(y, f), image = tone_power(y, -f);
    CHECK(10.0 * std::log10(tone / image) == Approx(30.0).margin(0.1));
}

TEST_CASE("two-tone IM3 intercept equals IIP3")
{
    const double iip3_dbm = 15.0, drive = 0.0;
    const auto m = make_impairment_model_gt(1.0, 0.0, iip3_dbm, 1.0, drive);
    const cx nu3 = m.nu3_for(1.0);
    const arma::uword N = 4096;
    const long f1 = 100, f2 = 110;
    const double pin_dbm = iip3_dbm - 20.0; // per tone
    const double A = std::sqrt(std::pow(10.0, (pin_dbm - drive) / 10.0));
    CVec y(N);
    for (arma::uword k = 0; k < N; ++k)
    {
        const double t = 2.0 * M_PI * double(k) / double(N);
        const cx x = A * (std::polar(1.0, f1 * t) + std::polar(1.0, f2 * t));
        y(k) = pa(x, 1.0, nu3);
    }
    CVec Y(N, arma::fill::zeros);
    for (long b : {f1, 2 * f1 - f2})
    {
        cx acc = 0.0;
        for (arma::uword k = 0; k < N; ++k)
            acc += y(k) * std::polar(1.0, -2.0 * M_PI * double(b) * double(k) / double(N));
        Y(arma::uword(((b % long(N)) + long(N)) % long(N))) = acc / double(N);
    }
    const double p1 = 10.0 * std::log10(bin_power(Y, f1));
    const double p3 = 10.0 * std::log10(bin_power(Y, 2 * f1 - f2));
    const double intercept = pin_dbm + (p1 - p3) / 2.0;
    CHECK(intercept == Approx(iip3_dbm).margin(0.5));
}

TEST_CASE("ADC quantizer")
{
    const AdcModel adc = make_adc_model(14, 60.0, -40.0, 10.0);
    CHECK(adc.full_scale_dbm == -30.0);
    const double A = adc.clip_amplitude();
    CHECK(A == Approx(std::sqrt(1e-6)));
    CHECK(adc.lsb() == Approx(2.0 * A / 16384.0));
    CHECK_THROWS(make_adc_model(8, 60.0, -40.0, 10.0));

    CMat tiny(1, 1);
    tiny(0, 0) = cx(1e-3 * adc.lsb(), -1e-3 * adc.lsb());
    const CMat qt = adc_quantize(tiny, adc);
    CHECK(std::abs(qt(0, 0).real()) <= adc.lsb() / 2 + 1e-18);
    CHECK(std::abs(qt(0, 0).imag()) <= adc.lsb() / 2 + 1e-18);

    CMat edge(1, 2);
    edge(0, 0) = cx(A, -A);
    edge(0, 1) = cx(10 * A, -10 * A);
    const CMat qe = adc_quantize(edge, adc);
    const double top = (8191 + 0.5) * adc.lsb(), bottom = -(8192 - 0.5) * adc.lsb();
    CHECK(qe(0, 0).real() == Approx(top));
    CHECK(qe(0, 1).real() == Approx(top));
    CHECK(qe(0, 0).imag() == Approx(bottom));
    CHECK(qe(0, 1).imag() == Approx(bottom));

    Rng rng(2);
    const CMat r = rng.complex_normal(3, 1000, 1e-7);
    const CMat q1 = adc_quantize(r, adc);
    CHECK(arma::norm(adc_quantize(q1, adc) - q1) == 0.0);

    // full-scale sine on each rail
    const arma::uword N = 1000000;
    CMat s(1, N);
    for (arma::uword k = 0; k < N; ++k)
        s(0, k) = (A * (1.0 - 1e-9)) * std::polar(1.0, 2.0 * M_PI * 0.1234567 * double(k));
    const CMat qs = adc_quantize(s, adc);
    const double sqnr = 10.0 * std::log10(fro2(s) / fro2(CMat(qs - s)));
    CHECK(sqnr == Approx(6.02 * 14 + 1.76).margin(1.0));
}

TEST_CASE("saturation check")
{
    const double lam = dbm_to_linear(-40.0);
    CHECK_FALSE(any_saturated(check_saturation(RVec(4, arma::fill::zeros), lam)));
    RVec p(4, arma::fill::zeros);
    p(2) = lam;
    const auto f = check_saturation(p, lam);
    CHECK(f[2]);
    CHECK_FALSE(f[0]);
    CHECK(any_saturated(f));
    CHECK_FALSE(any_saturated(check_saturation(RVec(4, arma::fill::value(dbm_to_linear(-41.0))), lam)));
}
