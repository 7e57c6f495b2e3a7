// SPDX-License-Identifier: Apache-2.0
#include "catch_amalgamated.hpp"

#include "fdsim/rng.hpp"
#include "fdsim/waveform.hpp"

#include <cmath>

using namespace fdsim;
using Catch::Approx;

namespace
{
PerSubcarrier random_precoders(Rng &rng, int Nc, arma::uword n_tx, const std::vector<int> &dims)
{
    PerSubcarrier V(Nc);
    for (int n = 0; n < Nc; ++n)
        V[n] = dims[n] ? CMat(rng.complex_normal(n_tx, dims[n])) : CMat(n_tx, 0);
    return V;
}
} // namespace

TEST_CASE("16-QAM constellation")
{
    const auto pts = qam16_constellation();
    REQUIRE(pts.size() == 16);
    double p = 0.0, corner = 0.0;
    for (const cx &s : pts)
    {
        p += std::norm(s);
        corner = std::max(corner, std::norm(s));
    }
    CHECK(p / 16.0 == Approx(1.0).epsilon(1e-15));
    CHECK(corner == Approx(18.0 / 10.0));
    bool has_corner = false;
    for (const cx &s : pts)
        has_corner |= std::abs(s - cx(3.0, 3.0) / std::sqrt(10.0)) < 1e-15;
    CHECK(has_corner);

    std::vector<int> dims(64, 2);
    dims[0] = 0;
    Rng a(5), b(5);
    const auto Sa = map_qam16(a, dims), Sb = map_qam16(b, dims);
    CHECK(Sa[0].n_elem == 0);
    double acc = 0.0;
    for (int n = 1; n < 64; ++n)
    {
        CHECK(arma::norm(Sa[n] - Sb[n]) == 0.0);
        acc += std::pow(arma::norm(Sa[n]), 2);
    }
    Rng c(6);
    std::vector<int> big(4096, 1);
    double pw = 0.0;
    for (const auto &s : map_qam16(c, big))
        pw += std::norm(s(0));
    CHECK(pw / 4096.0 == Approx(1.0).epsilon(0.05));
}

TEST_CASE("OFDM modulation basics")
{
    const int Nc = 64, cp = 16;
    std::vector<int> dims(Nc, 0);
    dims[0] = 1;
    PerSubcarrier V(Nc, CMat(1, 0));
    V[0] = CMat(1, 1, arma::fill::ones);
    SubcarrierSymbols S(Nc);
    for (int n = 0; n < Nc; ++n)
        S[n].set_size(dims[n]);
    S[0](0) = 1.0;
    const TimeFrame dc = ofdm_modulate(S, V, 1, cp);
    REQUIRE(dc.length() == Nc + cp);
    for (arma::uword k = 0; k < dc.length(); ++k)
        CHECK(std::abs(dc.samples(0, k) - 1.0 / 8.0) < 1e-15);

    S[0](0) = 0.0;
    CHECK(arma::norm(ofdm_modulate(S, V, 1, cp).samples) == 0.0);
}

TEST_CASE("OFDM modulation matches the direct double sum")
{
    const int Nc = 32, cp = 8;
    const arma::uword n_tx = 3;
    Rng rng(17);
    std::vector<int> dims(Nc, 2);
    dims[0] = 0;
    dims[Nc / 2] = 0;
    const PerSubcarrier V = random_precoders(rng, Nc, n_tx, dims);
    const SubcarrierSymbols S = map_qam16(rng, dims);
    const TimeFrame f = ofdm_modulate(S, V, n_tx, cp);

    CMat ref(n_tx, Nc, arma::fill::zeros);
    for (int k = 0; k < Nc; ++k)
        for (int n = 0; n < Nc; ++n)
            if (dims[n])
                ref.col(k) += V[n] * S[n] * std::polar(1.0, 2.0 * M_PI * n * k / Nc) / std::sqrt(double(Nc));
    CHECK(arma::norm(f.samples.cols(cp, cp + Nc - 1) - ref) < 1e-12 * arma::norm(ref));
    CHECK(arma::norm(f.samples.cols(0, cp - 1) - ref.tail_cols(cp)) < 1e-12 * arma::norm(ref));

    // Parseval: body power equals precoded subcarrier power
    double pf = 0.0;
    for (int n = 0; n < Nc; ++n)
        if (dims[n])
            pf += std::pow(arma::norm(V[n] * S[n]), 2);
    CHECK(std::pow(arma::norm(ref, "fro"), 2) == Approx(pf).epsilon(1e-10));
}

TEST_CASE("OFDM demodulation round trip and delay ramp")
{
    const int Nc = 64, cp = 16;
    Rng rng(23);
    std::vector<int> dims(Nc, 1);
    const PerSubcarrier V = random_precoders(rng, Nc, 2, dims);
    std::vector<SubcarrierSymbols> Ss;
    for (int m = 0; m < 3; ++m)
        Ss.push_back(map_qam16(rng, dims));
    const TimeFrame f = ofdm_modulate(Ss, V, 2, cp);
    REQUIRE(f.length() == 3 * (Nc + cp));

    const auto R = ofdm_demodulate_all(f, Nc, cp);
    REQUIRE(R.size() == 3);
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < Nc; ++n)
            CHECK(arma::norm(R[m].col(n) - V[n] * Ss[m][n]) < 1e-12);

    // one-sample delay (cp absorbs it): r_n picks up e^{-j 2 pi n / Nc}
    TimeFrame d{CMat(2, f.length(), arma::fill::zeros), 0.0};
    d.samples.cols(1, f.length() - 1) = f.samples.cols(0, f.length() - 2);
    const CMat r = ofdm_demodulate(d, Nc, cp, 1);
    for (int n = 0; n < Nc; ++n)
        CHECK(arma::norm(r.col(n) - V[n] * Ss[1][n] * std::polar(1.0, -2.0 * M_PI * n / Nc)) < 1e-12);

    CHECK(arma::norm(ofdm_demodulate(TimeFrame{CMat(2, Nc + cp, arma::fill::zeros), 0.0}, Nc, cp)) == 0.0);
    CHECK_THROWS(ofdm_demodulate(f, Nc, cp, 3));
}

TEST_CASE("concat")
{
    TimeFrame a{CMat(2, 3, arma::fill::ones), 1e-9}, b{CMat(2, 2, arma::fill::zeros), 1e-9};
    const TimeFrame c = concat(a, b);
    CHECK(c.length() == 5);
    CHECK(concat(TimeFrame{}, b).length() == 2);
    CHECK_THROWS(concat(a, TimeFrame{CMat(3, 1), 1e-9}));
}
