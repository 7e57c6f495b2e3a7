// SPDX-License-Identifier: Apache-2.0
#include "catch_amalgamated.hpp"

#include "fdsim/channel.hpp"
#include "fdsim/rng.hpp"
#include "fdsim/units.hpp"
#include "fdsim/waveform.hpp"

#include <cmath>

using namespace fdsim;
using Catch::Approx;

namespace
{
RicianSiParams default_si()
{
    RicianSiParams p;
    p.delays_ns = {0, 50, 100, 150};
    p.losses_db = {40, 50, 60, 70};
    p.sample_period = 50e-9;
    return p;
}

double tap_power(const CMat &A)
{
    return fro2(A) / double(A.n_elem);
}
} // namespace

TEST_CASE("rayleigh generation")
{
    Rng rng(1, "ray");
    double acc = 0.0;
    const int D = 10000;
    for (int i = 0; i < D; ++i)
    {
        const WidebandChannel H = gen_rayleigh(rng, 2, 2, 4, 100.0);
        for (const auto &t : H.taps)
            acc += tap_power(t);
    }
    CHECK(acc / D == Approx(1e-10).epsilon(0.05));

    Rng a(3), b(3);
    const WidebandChannel Ha = gen_rayleigh(a, 4, 4, 4, 100.0), Hb = gen_rayleigh(b, 4, 4, 4, 100.0);
    for (int l = 0; l < 4; ++l)
    {
        CHECK(arma::norm(Ha.taps[l] - Hb.taps[l]) == 0.0);
        CHECK(Ha.delays[l] == l);
        CHECK(Ha.pathloss_db[l] == Approx(106.0206).margin(1e-3));
    }

    Rng c(4);
    const FreqChannel F = to_freq(gen_rayleigh(c, 2, 3, 1, 100.0), 64);
    for (int n = 1; n < 64; ++n)
        CHECK(arma::norm(F[n] - F[0]) == 0.0);

    Rng e(5);
    const WidebandChannel X = gen_rayleigh(e, 1, 1, 3, 0.0, TapProfile::Exponential, 3.0);
    REQUIRE(X.pathloss_db.size() == 3);
    CHECK(X.pathloss_db[1] - X.pathloss_db[0] == Approx(3.0).margin(1e-9));
    double tot = 0.0;
    for (double pl : X.pathloss_db)
        tot += db_to_linear(-pl);
    CHECK(tot == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rician SI generation")
{
    Rng rng(7, "si");
    const RicianSiParams p = default_si();
    std::vector<double> acc(4, 0.0);
    const int D = 4000;
    for (int i = 0; i < D; ++i)
    {
        const WidebandChannel H = gen_rician_si(rng, 4, 4, p);
        for (int l = 0; l < 4; ++l)
        {
            acc[l] += tap_power(H.taps[l]);
            CHECK(H.delays[l] == l);
            CHECK(H.delay_error_s[l] == Approx(0.0).margin(1e-18));
        }
    }
    const double ref[4] = {1e-4, 1e-5, 1e-6, 1e-7};
    for (int l = 0; l < 4; ++l)
        CHECK(acc[l] / D == Approx(ref[l]).epsilon(0.05));

    // LoS limit on the direct tap
    RicianSiParams q = p;
    q.direct_k_db = INFINITY;
    Rng r1(1), r2(2);
    const WidebandChannel A = gen_rician_si(r1, 4, 4, q), B = gen_rician_si(r2, 4, 4, q);
    CHECK(arma::norm(A.taps[0] - B.taps[0]) < 1e-18);
    CHECK(arma::norm(A.taps[1] - B.taps[1]) > 0.0);

    // off-grid delay: nearest sample plus recorded error
    RicianSiParams o = p;
    o.delays_ns = {0, 60, 100, 140};
    Rng r3(3);
    const WidebandChannel C = gen_rician_si(r3, 2, 2, o);
    CHECK(C.delays[1] == 1);
    CHECK(C.delay_error_s[1] == Approx(10e-9));
    CHECK(C.delays[3] == 3);
    CHECK(C.delay_error_s[3] == Approx(-10e-9));

    // 40 dBm link budget: about 0 dBm per RX antenna, -30 dBm from the 70 dB path
    const double ptx = dbm_to_linear(40.0);
    CHECK(linear_to_dbm(ptx * db_to_linear(-70.0)) == Approx(-30.0));
    double rx = 0.0;
    Rng r4(4);
    for (int i = 0; i < 200; ++i)
    {
        const WidebandChannel H = gen_rician_si(r4, 4, 4, p);
        for (const auto &t : H.taps)
            rx += fro2(t) * ptx / 4.0 / 4.0; // per RX, TX power split over 4 antennas
    }
    CHECK(linear_to_dbm(rx / 200) == Approx(0.0).margin(0.5));

    CHECK(std::abs(ula_response(4, 0.0)(3) - 1.0) < 1e-15);
    CHECK(std::abs(ula_response(2, M_PI / 6)(1) - std::polar(1.0, M_PI / 2)) < 1e-15);
}

TEST_CASE("apply_channel against a direct convolution")
{
    Rng rng(11);
    WidebandChannel I;
    I.taps = {CMat(2, 2, arma::fill::eye)};
    I.delays = {0};
    const TimeFrame x{rng.complex_normal(2, 20), 1e-9};
    CHECK(arma::norm(apply_channel(x, I).samples - x.samples) == 0.0);

    I.delays = {1};
    const TimeFrame s = apply_channel(x, I);
    CHECK(arma::norm(s.samples.col(0)) == 0.0);
    CHECK(arma::norm(s.samples.cols(1, 19) - x.samples.cols(0, 18)) == 0.0);

    const WidebandChannel H = gen_rayleigh(rng, 2, 2, 3, 0.0);
    const TimeFrame y = apply_channel(x, H);
    for (arma::uword k = 0; k < 20; ++k)
        for (arma::uword r = 0; r < 2; ++r)
        {
            cx ref = 0.0;
            for (int l = 0; l < 3; ++l)
                for (arma::uword t = 0; t < 2; ++t)
                    if (k >= arma::uword(l))
                        ref += H.taps[l](r, t) * x.samples(t, k - l);
            CHECK(std::abs(y.samples(r, k) - ref) < 1e-12);
        }
    CHECK_THROWS(apply_channel(TimeFrame{CMat(3, 5), 1e-9}, H));
}

TEST_CASE("to_freq definition, ramp, linearity")
{
    WidebandChannel D;
    D.taps = {CMat(2, 2, arma::fill::eye)};
    D.delays = {1};
    const FreqChannel F = to_freq(D, 64);
    for (int n = 0; n < 64; ++n)
        CHECK(arma::norm(F[n] - std::polar(1.0, -2 * M_PI * n / 64) * CMat(2, 2, arma::fill::eye)) < 1e-14);

    Rng rng(13);
    const WidebandChannel A = gen_rayleigh(rng, 3, 2, 4, 0.0), B = gen_rayleigh(rng, 3, 2, 4, 0.0);
    const FreqChannel FA = to_freq(A, 16), FB = to_freq(B, 16), FS = to_freq(add_channels(A, B), 16);
    for (int n = 0; n < 16; ++n)
    {
        CMat ref(3, 2, arma::fill::zeros);
        for (int l = 0; l < 4; ++l)
            ref += A.taps[l] * std::polar(1.0, -2 * M_PI * l * n / 16.0);
        CHECK(arma::norm(FA[n] - ref) < 1e-13);
        CHECK(arma::norm(FS[n] - FA[n] - FB[n]) < 1e-13);
    }
    CHECK_THROWS(to_freq(A, 2));
}

TEST_CASE("frequency-domain model matches the time-domain pipeline")
{
    Rng rng(17, "appendix");
    const int Nc = 64, cp = 16;
    double worst = 0.0;
    for (int draw = 0; draw < 200; ++draw)
    {
        const arma::uword tx = 1 + rng.uniform_int(4), rx = 1 + rng.uniform_int(4);
        const int L = 1 + int(rng.uniform_int(cp + 1));
        const WidebandChannel H = gen_rayleigh(rng, rx, tx, L, 0.0);
        std::vector<int> dims(Nc, 0);
        PerSubcarrier V(Nc, CMat(tx, 0));
        for (int n = 1; n < Nc; ++n)
        {
            dims[n] = 1 + int(rng.uniform_int(tx));
            V[n] = rng.complex_normal(tx, dims[n]);
        }
        std::vector<SubcarrierSymbols> S{map_qam16(rng, dims), map_qam16(rng, dims)};
        const TimeFrame y = apply_channel(ofdm_modulate(S, V, tx, cp), H);
        const FreqChannel F = to_freq(H, Nc);
        // second symbol: its CP absorbs the tail of the first
        const CMat R = ofdm_demodulate(y, Nc, cp, 1);
        for (int n = 1; n < Nc; ++n)
        {
            const CVec ref = F[n] * V[n] * S[1][n];
            worst = std::max(worst, arma::norm(R.col(n) - ref) / arma::norm(ref));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("received power equals TX power minus path loss")
{
    Rng rng(19);
    const int Nc = 64, cp = 16;
    std::vector<int> dims(Nc, 1);
    PerSubcarrier V(Nc, CMat(1, 1, arma::fill::ones));
    double acc = 0.0, ptx = 0.0;
    const int frames = 2000;
    for (int f = 0; f < frames; ++f)
    {
        const WidebandChannel H = gen_rayleigh(rng, 1, 1, 4, 30.0);
        const TimeFrame x = ofdm_modulate(std::vector<SubcarrierSymbols>{map_qam16(rng, dims)}, V, 1, cp);
        const TimeFrame y = apply_channel(x, H);
        acc += fro2(y.samples.cols(cp, Nc + cp - 1));
        ptx += fro2(x.samples.cols(cp, Nc + cp - 1));
    }
    CHECK(10 * std::log10(acc / ptx) == Approx(-30.0).margin(0.5));
}

TEST_CASE("estimation error and serialization")
{
    Rng rng(23);
    const WidebandChannel H = gen_rayleigh(rng, 4, 4, 4, 100.0);
    Rng e0(1);
    const WidebandChannel I = estimate_with_mse(H, std::nullopt, e0);
    for (int l = 0; l < 4; ++l)
        CHECK(arma::norm(I.taps[l] - H.taps[l]) == 0.0);

    double err = 0.0, ref = 0.0;
    Rng e1(2);
    for (int d = 0; d < 10000; ++d)
    {
        const WidebandChannel G = gen_rayleigh(rng, 2, 2, 4, 100.0);
        const WidebandChannel Ge = estimate_with_mse(G, -30.0, e1);
        for (int l = 0; l < 4; ++l)
        {
            err += fro2(Ge.taps[l] - G.taps[l]);
            ref += fro2(G.taps[l]);
        }
    }
    CHECK(err / ref == Approx(1e-3).epsilon(0.1));

    Rng e2(3);
    const WidebandChannel T = estimate_with_mse(H, -400.0, e2);
    for (int l = 0; l < 4; ++l)
        CHECK(arma::norm(T.taps[l] - H.taps[l]) < 1e-200);

    const WidebandChannel R = channel_from_json(channel_to_json(H));
    REQUIRE(R.n_taps() == 4);
    for (int l = 0; l < 4; ++l)
    {
        CHECK(arma::norm(R.taps[l] - H.taps[l]) == 0.0);
        CHECK(R.delays[l] == H.delays[l]);
        CHECK(R.pathloss_db[l] == H.pathloss_db[l]);
    }
    const WidebandChannel Z = channel_from_json(nlohmann::json::parse(channel_to_json(zero_channel(2, 3)).dump()));
    CHECK(std::isinf(Z.pathloss_db[0]));
    CHECK(Z.rx() == 2);
    CHECK(Z.tx() == 3);
}
