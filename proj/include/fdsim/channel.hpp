// SPDX-License-Identifier: Apache-2.0
//
// Wideband multipath MIMO channels: generation, application, frequency
// response and controlled-MSE estimates.

#pragma once

#include "fdsim/numerics.hpp"
#include "fdsim/rng.hpp"
#include "fdsim/waveform.hpp"

#include <json.hpp>
#include <optional>
#include <vector>

namespace fdsim
{
struct WidebandChannel
{
    std::vector<CMat> taps;          // rx x tx each
    std::vector<int> delays;         // sample index per tap
    std::vector<double> pathloss_db; // nominal per-tap loss, E|h|^2 = 10^(-PL/10)
    std::vector<double> delay_error_s; // nearest-sample placement error per tap

    arma::uword rx() const { return taps.empty() ? 0 : taps[0].n_rows; }
    arma::uword tx() const { return taps.empty() ? 0 : taps[0].n_cols; }
    std::size_t n_taps() const { return taps.size(); }
    int span() const; // max delay + 1
};

using FreqChannel = PerSubcarrier;

enum class TapProfile
{
    Uniform,
    Exponential,
};

/// i.i.d. CN taps at delays 0..L-1; total power over taps = 10^(-PL/10).
WidebandChannel gen_rayleigh(Rng &rng, arma::uword rx, arma::uword tx, int L, double pathloss_db,
                             TapProfile profile = TapProfile::Uniform, double decay_db = 3.0);

struct RicianSiParams
{
    std::vector<double> delays_ns;
    std::vector<double> losses_db;
    double sample_period = 50e-9;
    double direct_k_db = 30.0;
    double reflected_k_db = 17.0; // -inf gives Rayleigh reflections
    bool direct_phase_random = false;
};

/// Each tap: sqrt(P) (sqrt(K/(K+1)) e^{j phi} a_rx a_tx^H + sqrt(1/(K+1)) W), unit-modulus ULA
/// steering vectors. The direct tap uses a fixed coupling geometry, reflections random angles.
WidebandChannel gen_rician_si(Rng &rng, arma::uword rx, arma::uword tx, const RicianSiParams &p);

/// Half-wavelength ULA response, entries e^{j pi m sin(angle)}.
CVec ula_response(arma::uword n, double angle);

/// y[k] = sum_l H[l] x[k - d_l], zero history before the frame.
TimeFrame apply_channel(const TimeFrame &x, const WidebandChannel &H);

/// H_n = sum_l H[l] e^{-j 2 pi d_l n / Nc}
FreqChannel to_freq(const WidebandChannel &H, int Nc);

/// Relative-MSE perturbation; nullopt returns H unchanged.
WidebandChannel estimate_with_mse(const WidebandChannel &H, std::optional<double> mse_db, Rng &rng);

/// Tap-wise sum; taps sharing a delay are added.
WidebandChannel add_channels(const WidebandChannel &a, const WidebandChannel &b);

WidebandChannel zero_channel(arma::uword rx, arma::uword tx);

nlohmann::json channel_to_json(const WidebandChannel &H);
WidebandChannel channel_from_json(const nlohmann::json &j);

nlohmann::json cmat_to_json(const CMat &A);
CMat cmat_from_json(const nlohmann::json &j);
} // namespace fdsim
