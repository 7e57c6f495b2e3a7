// SPDX-License-Identifier: Apache-2.0

#include "fdsim/simulator.hpp"
#include "fdsim/analog_canceller.hpp"
#include "fdsim/beamforming.hpp"
#include "fdsim/channel.hpp"
#include "fdsim/digital_canceller.hpp"
#include "fdsim/impairments.hpp"
#include "fdsim/units.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace fdsim
{
namespace
{
double total_power(const CMat &y)
{
    return y.n_elem ? fro2(y) / double(y.n_cols) : 0.0;
}

// Empirical per-subcarrier covariance of (received - desired) over payload symbols.
struct LinkEval
{
    std::vector<CMat> R_e; // indexed by data-bin position
};

LinkEval error_covariances(const TimeFrame &rx, const std::vector<CMat> &desired_per_symbol,
                           const std::vector<int> &bins, int Nc, int cp, arma::uword first_symbol)
{
    LinkEval ev;
    ev.R_e.assign(bins.size(), CMat(rx.n_antennas(), rx.n_antennas(), arma::fill::zeros));
    const std::size_t S = desired_per_symbol.size();
    for (std::size_t m = 0; m < S; ++m)
    {
        const CMat R = ofdm_demodulate(rx, Nc, cp, first_symbol + m);
        const CMat E = R.cols(arma::conv_to<arma::uvec>::from(bins)) - desired_per_symbol[m];
        for (std::size_t b = 0; b < bins.size(); ++b)
            ev.R_e[b] += E.col(b) * E.col(b).t();
    }
    for (auto &R : ev.R_e)
        R = herm(R / double(S));
    return ev;
}

// desired[m].col(b) = H_n G1 V_n s_n for payload symbol m
std::vector<CMat> desired_signal(const FreqChannel &H, const RVec &g1, const PerSubcarrier &V,
                                 const std::vector<SubcarrierSymbols> &S, const std::vector<int> &bins,
                                 arma::uword first_symbol, arma::uword n_rx)
{
    const CMat G1 = arma::diagmat(arma::conv_to<CVec>::from(g1));
    std::vector<CMat> out;
    for (std::size_t m = first_symbol; m < S.size(); ++m)
    {
        CMat D(n_rx, bins.size(), arma::fill::zeros);
        for (std::size_t b = 0; b < bins.size(); ++b)
        {
            const int n = bins[b];
            if (S[m][n].n_elem)
                D.col(b) = H[n] * G1 * V[n] * S[m][n];
        }
        out.push_back(D);
    }
    return out;
}

std::vector<CMat> per_bin_covariance(const TimeFrame &x, const std::vector<int> &bins, int Nc, int cp,
                                     arma::uword first_symbol, arma::uword n_symbols)
{
    std::vector<CMat> R(bins.size(), CMat(x.n_antennas(), x.n_antennas(), arma::fill::zeros));
    for (arma::uword m = 0; m < n_symbols; ++m)
    {
        const CMat X = ofdm_demodulate(x, Nc, cp, first_symbol + m);
        for (std::size_t b = 0; b < bins.size(); ++b)
            R[b] += X.col(bins[b]) * X.col(bins[b]).t();
    }
    for (auto &r : R)
        r = herm(r / double(n_symbols));
    return R;
}

std::vector<int> stream_dims(const std::vector<int> &bins, int Nc, const PerSubcarrier &V)
{
    std::vector<int> dims(Nc, 0);
    for (int n : bins)
        dims[n] = int(V[n].n_cols);
    return dims;
}

std::vector<SubcarrierSymbols> draw_symbols(Rng rng, const std::vector<int> &dims, int n_symbols)
{
    std::vector<SubcarrierSymbols> S;
    for (int m = 0; m < n_symbols; ++m)
        S.push_back(map_qam16(rng, dims));
    return S;
}

TimeFrame noise_frame(Rng rng, arma::uword n, arma::uword T, double var, double ts)
{
    return {rng.complex_normal(n, T, var), ts};
}

TimeFrame add(const TimeFrame &a, const TimeFrame &b)
{
    return {a.samples + b.samples, a.sample_period};
}

// Digital cancellation signal over the whole frame, one OFDM symbol at a time.
CMat digital_signal(const DigitalCancellerState &st, const CMat &X, arma::uword sym_len)
{
    CMat d(st.Theta.n_rows, X.n_cols);
    for (arma::uword s0 = 0; s0 < X.n_cols; s0 += sym_len)
    {
        const arma::uword T = std::min(sym_len, X.n_cols - s0);
        const auto D = build_design_matrix(X, st.lags, s0, T, st.basis);
        d.cols(s0, s0 + T - 1) = cancel_signal(st, D.Psi);
    }
    return d;
}

struct DlBand
{
    PerSubcarrier V, U;
    double mean_alpha = 0.0;
    double infeasible_frac = 0.0;
};

DlBand solve_dl_band(const SystemConfig &cfg, const FreqChannel &Hdl, const FreqChannel &Hsi_tilde,
                     const RVec &g1, const std::vector<CMat> *Rz, const std::vector<int> &bins, double lambda)
{
    DlBand out;
    out.V.assign(cfg.Nc, CMat());
    out.U.assign(cfg.Nc, CMat());
    int infeasible = 0;
    double alpha_sum = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b)
    {
        const int n = bins[b];
        const DlSolution s = solve_dl(Hdl[n], Hsi_tilde[n], g1, Rz ? (*Rz)[b] : CMat(), lambda);
        // d_b caps the stream count
        const int a = std::min(s.alpha, cfg.d_b);
        out.V[n] = s.V.cols(0, a - 1);
        out.U[n] = s.U.rows(0, a - 1);
        alpha_sum += a;
        infeasible += s.feasible ? 0 : 1;
    }
    out.mean_alpha = alpha_sum / double(bins.size());
    out.infeasible_frac = double(infeasible) / double(bins.size());
    return out;
}

RVec link_rates(const std::vector<CMat> &R_e, const PerSubcarrier &U, const FreqChannel &H, const RVec &g1,
                const PerSubcarrier &V, const std::vector<int> &bins)
{
    const CMat G1 = arma::diagmat(arma::conv_to<CVec>::from(g1));
    RVec r(bins.size());
    for (std::size_t b = 0; b < bins.size(); ++b)
    {
        const int n = bins[b];
        const CMat Q = herm(U[n] * R_e[b] * U[n].t());
        r(b) = rate(U[n], H[n] * G1 * V[n], Q);
    }
    return r;
}
} // namespace

const std::vector<std::string> &metric_names()
{
    static const std::vector<std::string> names = {
        "p_saturation",    "dl_rate",         "ul_rate",          "fd_rate",
        "hd_rate",         "dl_rate_hd",      "ul_rate_hd",       "analog_supp_db",
        "digital_supp_db", "digital_supp_linear_db", "total_supp_db", "isr_db",
        "tsvd_rank",       "tsvd_rank_linear", "mean_alpha",      "alg1_infeasible_frac",
        "residual_si_dbm_max"};
    return names;
}

double metric_value(const MetricsRecord &r, const std::string &name)
{
    static const std::map<std::string, double MetricsRecord::*> fields = {
        {"p_saturation", &MetricsRecord::p_saturation},
        {"dl_rate", &MetricsRecord::dl_rate},
        {"ul_rate", &MetricsRecord::ul_rate},
        {"fd_rate", &MetricsRecord::fd_rate},
        {"hd_rate", &MetricsRecord::hd_rate},
        {"dl_rate_hd", &MetricsRecord::dl_rate_hd},
        {"ul_rate_hd", &MetricsRecord::ul_rate_hd},
        {"analog_supp_db", &MetricsRecord::analog_supp_db},
        {"digital_supp_db", &MetricsRecord::digital_supp_db},
        {"digital_supp_linear_db", &MetricsRecord::digital_supp_linear_db},
        {"total_supp_db", &MetricsRecord::total_supp_db},
        {"isr_db", &MetricsRecord::isr_db},
        {"tsvd_rank", &MetricsRecord::tsvd_rank},
        {"tsvd_rank_linear", &MetricsRecord::tsvd_rank_linear},
        {"mean_alpha", &MetricsRecord::mean_alpha},
        {"alg1_infeasible_frac", &MetricsRecord::alg1_infeasible_frac},
        {"residual_si_dbm_max", &MetricsRecord::residual_si_dbm_max}};
    auto it = fields.find(name);
    if (it == fields.end())
        throw std::invalid_argument("unknown metric: " + name);
    return r.*(it->second);
}

MetricsRecord run_frame(const SystemConfig &cfg, Rng &rng, int run_id, const RunOptions &opt)
{
    MetricsRecord rec;
    rec.run_id = run_id;
    try
    {
        cfg.validate();
        const int Nc = cfg.Nc, cp = cfg.cp_len;
        const arma::uword sym_len = Nc + cp;
        const int n_train = cfg.training_symbols, n_pay = cfg.frame_symbols;
        const int n_sym = n_train + n_pay;
        const arma::uword K = sym_len * n_sym;
        const arma::uword k_pay = sym_len * n_train; // first payload sample
        const double ts = cfg.sample_period();
        const std::vector<int> bins = cfg.data_bins();
        const double lambda = cfg.lambda_b_w();
        const double s2b = cfg.sigma2_b(), s2m1 = cfg.sigma2_m1();

        // channels
        Rng r_ch = rng.child("channel");
        Rng r_dl = r_ch.child("dl"), r_ul = r_ch.child("ul"), r_si = r_ch.child("si");
        const TapProfile prof = cfg.tap_profile == "exponential" ? TapProfile::Exponential : TapProfile::Uniform;
        const WidebandChannel H_dl = gen_rayleigh(r_dl, cfg.n_rx_m1, cfg.n_tx_b, cfg.l_dl, cfg.pathloss_dl_db, prof,
                                                  cfg.tap_decay_db);
        const WidebandChannel H_ul = gen_rayleigh(r_ul, cfg.n_rx_b, cfg.n_tx_m2, cfg.l_ul, cfg.pathloss_ul_db, prof,
                                                  cfg.tap_decay_db);
        RicianSiParams sp;
        sp.delays_ns = cfg.si_path_delays_ns;
        sp.losses_db = cfg.si_path_losses_db;
        sp.sample_period = ts;
        sp.direct_k_db = cfg.si_direct_k_db;
        sp.reflected_k_db = cfg.si_reflected_k_db;
        sp.direct_phase_random = cfg.si_direct_phase_random;
        WidebandChannel H_si = gen_rician_si(r_si, cfg.n_rx_b, cfg.n_tx_b, sp);
        if (opt.zero_si)
            for (auto &t : H_si.taps)
                t.zeros();

        // estimates
        Rng r_est = rng.child("estimate");
        Rng re_dl = r_est.child("dl"), re_ul = r_est.child("ul"), re_si = r_est.child("si");
        const WidebandChannel Hh_dl = estimate_with_mse(H_dl, cfg.channel_mse_db, re_dl);
        const WidebandChannel Hh_ul = estimate_with_mse(H_ul, cfg.channel_mse_db, re_ul);
        const WidebandChannel Hh_si =
            opt.zero_si ? H_si : estimate_with_mse(H_si, cfg.channel_mse_db, re_si);

        // analog canceller
        AnalogCancellerConfig acfg = build_canceller(
            Hh_si, cfg.n_taps, cfg.tap_allocation == "greedy" ? TapAllocation::Greedy : TapAllocation::Orderly);
        acfg.atten_step_db = cfg.tap_atten_step_db;
        acfg.phase_step_deg = cfg.tap_phase_step_deg;
        if (cfg.tap_quantization)
        {
            Rng r_tap = rng.child("taps");
            acfg = quantize_taps(acfg, r_tap);
        }
        const CancellerMatrices C = canceller_matrices(acfg);

        const FreqChannel Fh_dl = to_freq(Hh_dl, Nc), Fh_ul = to_freq(Hh_ul, Nc);
        const FreqChannel F_dl = to_freq(H_dl, Nc), F_ul = to_freq(H_ul, Nc);
        const WidebandChannel Ht_si = add_channels(Hh_si, C.as_channel());
        const FreqChannel Ft_si = to_freq(Ht_si, Nc);

        // impairments
        const TxImpairmentModel model =
            make_impairment_model(cfg.irr_db, cfg.iip3_dbm, 1.0, IrrSplit::GainOnly, cfg.pa_drive_ref_dbm);
        const RVec g1_b(cfg.n_tx_b, arma::fill::value(std::sqrt(cfg.p_b_w() / cfg.n_tx_b)));
        const RVec g1_m2(cfg.n_tx_m2, arma::fill::value(std::sqrt(cfg.p_m2_w() / cfg.n_tx_m2)));
        const GainMatrices G_b = derive_gain_matrices(model, g1_b);
        const GainMatrices G_m2 = derive_gain_matrices(model, g1_m2);

        // DL beamforming: a first pass without the nonlinear term sizes a probe frame
        // whose distortion covariance then enters the saturation check
        Rng r_sym = rng.child("symbols");
        DlBand dl = solve_dl_band(cfg, Fh_dl, Ft_si, g1_b, nullptr, bins, lambda);
        {
            const auto Sp = draw_symbols(r_sym.child("probe"), stream_dims(bins, Nc, dl.V), n_train);
            const TimeFrame xp = ofdm_modulate(Sp, dl.V, cfg.n_tx_b, cp, ts);
            const TxOutput tp = tx_chain(xp, G_b);
            const std::vector<CMat> Rz = per_bin_covariance(tp.z, bins, Nc, cp, 0, n_train);
            dl = solve_dl_band(cfg, Fh_dl, Ft_si, g1_b, &Rz, bins, lambda);
        }
        rec.mean_alpha = dl.mean_alpha;
        rec.alg1_infeasible_frac = dl.infeasible_frac;

        // UL precoders depend only on the UL estimate
        PerSubcarrier V_m2(Nc);
        for (int n : bins)
            V_m2[n] = svd(Fh_ul[n]).V.cols(0, cfg.d_m2 - 1);

        // frames
        const auto S_b = draw_symbols(r_sym.child("dl"), stream_dims(bins, Nc, dl.V), n_sym);
        const TimeFrame x_b = ofdm_modulate(S_b, dl.V, cfg.n_tx_b, cp, ts);
        const TxOutput tx_b = tx_chain(x_b, G_b);

        // UL muted during training
        auto S_m2 = draw_symbols(r_sym.child("ul"), stream_dims(bins, Nc, V_m2), n_sym);
        for (int m = 0; m < n_train; ++m)
            for (auto &s : S_m2[m])
                s.zeros();
        const TimeFrame x_m2 = ofdm_modulate(S_m2, V_m2, cfg.n_tx_m2, cp, ts);
        const TxOutput tx_m2 = tx_chain(x_m2, G_m2);

        Rng r_noise = rng.child("noise");
        const TimeFrame w_b = noise_frame(r_noise.child("b"), cfg.n_rx_b, K, s2b, ts);
        const TimeFrame w_m1 = noise_frame(r_noise.child("m1"), cfg.n_rx_m1, K, s2m1, ts);

        // node b receive chain
        const TimeFrame y_si = apply_channel(tx_b.x_tilde, H_si);
        const TimeFrame y_res = add(y_si, apply_canceller(tx_b.x_tilde, C));
        const TimeFrame y_ul = apply_channel(tx_m2.x_tilde, H_ul);

        const RVec p_res = frame_power(y_res);
        rec.p_saturation = any_saturated(check_saturation(p_res, lambda)) ? 1.0 : 0.0;
        rec.residual_si_dbm_max = linear_to_dbm(p_res.max());

        const AdcModel adc = make_adc_model(cfg.adc_bits, cfg.adc_dynamic_range_db, cfg.lambda_b_dbm, cfg.adc_papr_db);
        const CMat y_b_adc = adc_quantize(y_res.samples + y_ul.samples + w_b.samples, adc);
        const CMat y_si_adc = adc_quantize(y_res.samples + w_b.samples, adc);

        // digital cancellation: training on the first n_train symbols, UL muted
        std::vector<int> lags;
        for (std::size_t l = 0; l < H_si.n_taps(); ++l)
            lags.push_back(H_si.delays[l]);
        std::sort(lags.begin(), lags.end());
        lags.erase(std::unique(lags.begin(), lags.end()), lags.end());

        const auto D_train = build_design_matrix(x_b.samples, lags, 0, k_pay, Basis::Full);
        const DigitalCancellerState st = tsvd_estimate(D_train, y_b_adc.cols(0, k_pay - 1), s2b);
        const CMat d = digital_signal(st, x_b.samples, sym_len);
        rec.tsvd_rank = st.p;

        // SI-only held-out payload for the suppression metrics
        const arma::span pay(k_pay, K - 1);
        const CMat iso = y_si.samples.cols(pay) + w_b.samples.cols(pay);
        const CMat after_analog = y_si_adc.cols(pay);
        const CMat after_digital = after_analog + d.cols(pay);
        rec.analog_supp_db = digital_cancellation_db(iso, after_analog);
        rec.digital_supp_db = digital_cancellation_db(after_analog, after_digital);
        rec.total_supp_db = digital_cancellation_db(iso, after_digital);
        rec.isr_db = linear_to_db(total_power(after_digital)) - linear_to_db(total_power(iso));

        if (cfg.linear_baseline)
        {
            const auto D_lin = build_design_matrix(x_b.samples, lags, 0, k_pay, Basis::Linear);
            const DigitalCancellerState st_lin = tsvd_estimate(D_lin, y_b_adc.cols(0, k_pay - 1), s2b);
            const CMat d_lin = digital_signal(st_lin, x_b.samples, sym_len);
            rec.digital_supp_linear_db = digital_cancellation_db(after_analog, after_analog + d_lin.cols(pay));
            rec.tsvd_rank_linear = st_lin.p;
        }
        else
            rec.digital_supp_linear_db = NAN;

        if (opt.want_psd)
        {
            rec.psd.isolation = compute_psd(iso, Nc, cp);
            rec.psd.analog = compute_psd(after_analog, Nc, cp);
            rec.psd.digital = compute_psd(after_digital, Nc, cp);
            rec.psd.noise_floor_w = s2b / Nc;
        }

        // FD DL rate at m1 (true channel, empirical impairment-plus-noise covariance)
        const TimeFrame y_m1 = add(apply_channel(tx_b.x_tilde, H_dl), w_m1);
        {
            const auto des = desired_signal(F_dl, g1_b, dl.V, S_b, bins, n_train, cfg.n_rx_m1);
            const LinkEval ev = error_covariances(y_m1, des, bins, Nc, cp, n_train);
            rec.dl_rate = arma::mean(link_rates(ev.R_e, dl.U, F_dl, g1_b, dl.V, bins));
        }

        // FD UL rate at b
        const TimeFrame r_b{y_b_adc + d, ts};
        const TimeFrame x_tilde_f = tx_b.x_tilde;
        const TimeFrame d_f{d, ts};
        const std::vector<CMat> Rzm2 = per_bin_covariance(tx_m2.z, bins, Nc, cp, n_train, n_pay);
        PerSubcarrier U_b(Nc);
        {
            // receiver-side model of the SI left after digital cancellation
            std::vector<CMat> R_res(bins.size(), CMat(cfg.n_rx_b, cfg.n_rx_b, arma::fill::zeros));
            for (int m = 0; m < n_pay; ++m)
            {
                const CMat X = ofdm_demodulate(x_tilde_f, Nc, cp, n_train + m);
                const CMat Dd = ofdm_demodulate(d_f, Nc, cp, n_train + m);
                for (std::size_t b = 0; b < bins.size(); ++b)
                {
                    const int n = bins[b];
                    const CVec e = Ft_si[n] * X.col(n) + Dd.col(n);
                    R_res[b] += e * e.t();
                }
            }
            for (std::size_t b = 0; b < bins.size(); ++b)
            {
                const int n = bins[b];
                const CMat Sigma = assemble_sigma_b(R_res[b] / double(n_pay), Fh_ul[n], Rzm2[b], s2b);
                U_b[n] = solve_ul(Fh_ul[n], g1_m2, cfg.d_m2, Sigma).U_b;
            }
            const auto des = desired_signal(F_ul, g1_m2, V_m2, S_m2, bins, n_train, cfg.n_rx_b);
            const LinkEval ev = error_covariances(r_b, des, bins, Nc, cp, n_train);
            rec.ul_rate = arma::mean(link_rates(ev.R_e, U_b, F_ul, g1_m2, V_m2, bins));
        }
        rec.fd_rate = rec.dl_rate + rec.ul_rate;

        // HD baseline: same channels and draws, no SI, links time-share the frame
        {
            const FreqChannel zero(Nc, CMat(cfg.n_rx_b, cfg.n_tx_b, arma::fill::zeros));
            const DlBand dl0 = solve_dl_band(cfg, Fh_dl, zero, g1_b, nullptr, bins, INFINITY);
            const auto S0 = draw_symbols(r_sym.child("dl"), stream_dims(bins, Nc, dl0.V), n_sym);
            const TimeFrame x0 = ofdm_modulate(S0, dl0.V, cfg.n_tx_b, cp, ts);
            const TxOutput t0 = tx_chain(x0, G_b);
            const TimeFrame y0 = add(apply_channel(t0.x_tilde, H_dl), w_m1);
            const auto des = desired_signal(F_dl, g1_b, dl0.V, S0, bins, n_train, cfg.n_rx_m1);
            const LinkEval ev = error_covariances(y0, des, bins, Nc, cp, n_train);
            rec.dl_rate_hd = arma::mean(link_rates(ev.R_e, dl0.U, F_dl, g1_b, dl0.V, bins));
        }
        {
            const TimeFrame r0{adc_quantize(y_ul.samples + w_b.samples, adc), ts};
            PerSubcarrier U0(Nc);
            for (std::size_t b = 0; b < bins.size(); ++b)
            {
                const int n = bins[b];
                const CMat Sigma = assemble_sigma_b(CMat(), Fh_ul[n], Rzm2[b], s2b);
                U0[n] = solve_ul(Fh_ul[n], g1_m2, cfg.d_m2, Sigma).U_b;
            }
            const auto des = desired_signal(F_ul, g1_m2, V_m2, S_m2, bins, n_train, cfg.n_rx_b);
            const LinkEval ev = error_covariances(r0, des, bins, Nc, cp, n_train);
            rec.ul_rate_hd = arma::mean(link_rates(ev.R_e, U0, F_ul, g1_m2, V_m2, bins));
        }
        rec.hd_rate = 0.5 * (rec.dl_rate_hd + rec.ul_rate_hd);

        if (opt.want_dumps)
        {
            rec.dumps["H_si"] = channel_to_json(H_si);
            rec.dumps["H_dl"] = channel_to_json(H_dl);
            rec.dumps["H_ul"] = channel_to_json(H_ul);
            rec.dumps["canceller"] = canceller_to_json(acfg);
            rec.dumps["tsvd"] = tsvd_diagnostics(st);
        }
    }
    catch (const NumericalError &e)
    {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

RVec compute_psd(const CMat &frames, int Nc, int cp_len, arma::uword start)
{
    const arma::uword sym_len = Nc + cp_len;
    if (frames.n_rows == 0 || frames.n_cols < start + sym_len)
        throw std::invalid_argument("compute_psd: frames shorter than one OFDM symbol");
    const arma::uword n_win = (frames.n_cols - start) / sym_len;
    RVec acc(Nc, arma::fill::zeros);
    for (arma::uword w = 0; w < n_win; ++w)
    {
        const arma::uword s0 = start + w * sym_len + cp_len;
        const CMat X = fft_rows(frames.cols(s0, s0 + Nc - 1));
        acc += arma::mean(arma::square(arma::abs(X)), 0).t();
    }
    return acc / double(n_win) / double(Nc);
}

RVec psd_to_dbm(const RVec &psd_w)
{
    RVec out(psd_w.n_elem);
    for (arma::uword i = 0; i < psd_w.n_elem; ++i)
        out(i) = linear_to_dbm(psd_w(i));
    return out;
}

double Aggregate::get(const std::string &metric) const
{
    const auto &n = metric_names();
    const auto it = std::find(n.begin(), n.end(), metric);
    if (it == n.end())
        throw std::invalid_argument("unknown metric: " + metric);
    return mean[it - n.begin()];
}

double Aggregate::get_stderr(const std::string &metric) const
{
    const auto &n = metric_names();
    const auto it = std::find(n.begin(), n.end(), metric);
    if (it == n.end())
        throw std::invalid_argument("unknown metric: " + metric);
    return stderr_[it - n.begin()];
}

int MonteCarloResult::total_failures() const
{
    int f = 0;
    for (const auto &r : records)
        f += r.failed ? 1 : 0;
    return f;
}

std::vector<SystemConfig> resolve_points(const ScenarioSpec &spec)
{
    std::vector<SystemConfig> out;
    if (spec.points.empty())
    {
        spec.config.validate();
        out.push_back(spec.config);
        return out;
    }
    for (const auto &p : spec.points)
        out.push_back(config_from_json(p.overrides, spec.config));
    return out;
}

MonteCarloResult monte_carlo(const ScenarioSpec &spec)
{
    if (spec.runs < 1)
        throw ConfigError("runs must be >= 1");
    const std::vector<SystemConfig> cfgs = resolve_points(spec);
    const std::size_t n_pts = cfgs.size();
    const std::size_t n_tasks = n_pts * spec.runs;

    MonteCarloResult res;
    res.records.resize(n_tasks);
    const Rng root(spec.seed, "monte_carlo");
    RunOptions opt;
    opt.want_psd = spec.want_psd;
    opt.want_dumps = spec.want_dumps;

    std::atomic<std::size_t> next{0};
    auto worker = [&]()
    {
        for (std::size_t t = next++; t < n_tasks; t = next++)
        {
            const std::size_t p = t / spec.runs;
            const int run = int(t % spec.runs);
            // common random numbers across sweep points
            Rng rng = root.child(std::uint64_t(run));
            MetricsRecord r = run_frame(cfgs[p], rng, run, opt);
            r.sweep_point = spec.points.empty() ? spec.name : spec.points[p].label;
            res.records[t] = std::move(r);
        }
    };
    int nw = spec.workers > 0 ? spec.workers : int(std::max(1u, std::thread::hardware_concurrency()));
    nw = int(std::min<std::size_t>(nw, n_tasks));
    if (nw <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }

    // reduction in fixed run order
    const auto &names = metric_names();
    for (std::size_t p = 0; p < n_pts; ++p)
    {
        Aggregate a;
        a.sweep_point = spec.points.empty() ? spec.name : spec.points[p].label;
        a.mean.assign(names.size(), 0.0);
        a.stderr_.assign(names.size(), 0.0);
        std::vector<double> sum(names.size(), 0.0), sum2(names.size(), 0.0);
        std::vector<int> cnt(names.size(), 0);
        for (int run = 0; run < spec.runs; ++run)
        {
            const MetricsRecord &r = res.records[p * spec.runs + run];
            ++a.runs;
            if (r.failed)
            {
                ++a.failures;
                continue;
            }
            for (std::size_t m = 0; m < names.size(); ++m)
            {
                const double v = metric_value(r, names[m]);
                if (std::isnan(v))
                    continue;
                sum[m] += v;
                sum2[m] += v * v;
                ++cnt[m];
            }
            if (spec.want_psd && r.psd.isolation.n_elem)
            {
                if (a.psd.isolation.n_elem == 0)
                {
                    a.psd.isolation.zeros(r.psd.isolation.n_elem);
                    a.psd.analog.zeros(r.psd.analog.n_elem);
                    a.psd.digital.zeros(r.psd.digital.n_elem);
                }
                a.psd.isolation += r.psd.isolation;
                a.psd.analog += r.psd.analog;
                a.psd.digital += r.psd.digital;
                a.psd.noise_floor_w = r.psd.noise_floor_w;
            }
        }
        for (std::size_t m = 0; m < names.size(); ++m)
        {
            if (cnt[m] == 0)
            {
                a.mean[m] = NAN;
                a.stderr_[m] = NAN;
                continue;
            }
            const double mu = sum[m] / cnt[m];
            a.mean[m] = mu;
            const double var = cnt[m] > 1 ? std::max(0.0, (sum2[m] - cnt[m] * mu * mu) / (cnt[m] - 1)) : 0.0;
            a.stderr_[m] = std::sqrt(var / cnt[m]);
        }
        const int ok = a.runs - a.failures;
        if (ok > 0 && a.psd.isolation.n_elem)
        {
            a.psd.isolation /= ok;
            a.psd.analog /= ok;
            a.psd.digital /= ok;
        }
        res.aggregates.push_back(std::move(a));
    }
    return res;
}

ScenarioSpec scenario_from_json(const nlohmann::json &j)
{
    if (!j.is_object())
        throw ConfigError("scenario must be a JSON object");
    const std::set<std::string> known = {"name", "config", "runs", "seed", "psd", "dumps",
                                         "workers", "sweep", "points", "link_powers"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown scenario key: " + it.key());
    ScenarioSpec s;
    try
    {
        s.name = j.value("name", std::string("scenario"));
        s.config = config_from_json(j.value("config", nlohmann::json::object()));
        s.runs = j.value("runs", s.config.mc_runs);
        s.seed = j.value("seed", s.config.seed);
        s.want_psd = j.value("psd", false);
        s.want_dumps = j.value("dumps", false);
        s.workers = j.value("workers", 0);
        const bool link = j.value("link_powers", true);

        if (j.contains("points"))
            for (const auto &p : j.at("points"))
                s.points.push_back({p.at("label").get<std::string>(), p.value("overrides", nlohmann::json::object())});

        if (j.contains("sweep"))
        {
            // cartesian product; nlohmann orders object keys lexicographically
            std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
            for (auto it = j.at("sweep").begin(); it != j.at("sweep").end(); ++it)
            {
                if (!it.value().is_array() || it.value().empty())
                    throw ConfigError("sweep values must be nonempty arrays: " + it.key());
                axes.emplace_back(it.key(), std::vector<nlohmann::json>(it.value().begin(), it.value().end()));
            }
            std::vector<std::size_t> idx(axes.size(), 0);
            while (true)
            {
                SweepPoint p;
                std::string label;
                for (std::size_t a = 0; a < axes.size(); ++a)
                {
                    const auto &v = axes[a].second[idx[a]];
                    p.overrides[axes[a].first] = v;
                    if (link && axes[a].first == "p_b_dbm" && !j.at("sweep").contains("p_m2_dbm"))
                        p.overrides["p_m2_dbm"] = v;
                    label += (label.empty() ? "" : ";") + axes[a].first + "=" +
                             (v.is_string() ? v.get<std::string>() : v.dump());
                }
                p.label = label;
                s.points.push_back(p);
                std::size_t a = 0;
                while (a < axes.size() && ++idx[a] == axes[a].second.size())
                    idx[a++] = 0;
                if (a == axes.size())
                    break;
            }
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigError(std::string("scenario type error: ") + e.what());
    }
    if (s.runs < 1)
        throw ConfigError("runs must be >= 1");
    resolve_points(s); // validates every point
    return s;
}

ScenarioSpec load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

std::string fmt_num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace
{
std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string o = "\"";
    for (char c : s)
        o += c == '"' ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    return f;
}
} // namespace

void write_runs_csv(const std::string &path, const MonteCarloResult &r)
{
    auto f = open_out(path);
    f << "sweep_point,run_id,failed";
    for (const auto &n : metric_names())
        f << "," << n;
    f << ",error\n";
    for (const auto &rec : r.records)
    {
        f << csv_escape(rec.sweep_point) << "," << rec.run_id << "," << (rec.failed ? 1 : 0);
        for (const auto &n : metric_names())
            f << "," << (rec.failed ? "nan" : fmt_num(metric_value(rec, n)));
        f << "," << csv_escape(rec.error) << "\n";
    }
}

void write_aggregate_csv(const std::string &path, const MonteCarloResult &r)
{
    auto f = open_out(path);
    f << "sweep_point,runs,failures";
    for (const auto &n : metric_names())
        f << "," << n << "_mean," << n << "_stderr";
    f << "\n";
    for (const auto &a : r.aggregates)
    {
        f << csv_escape(a.sweep_point) << "," << a.runs << "," << a.failures;
        for (std::size_t m = 0; m < a.mean.size(); ++m)
            f << "," << fmt_num(a.mean[m]) << "," << fmt_num(a.stderr_[m]);
        f << "\n";
    }
}

void write_psd_csv(const std::string &path, const RVec &psd_w, const SystemConfig &cfg)
{
    auto f = open_out(path);
    f << "freq_hz,dbm\n";
    const int Nc = cfg.Nc;
    // centered frequency axis
    for (int k = -Nc / 2; k < Nc - Nc / 2; ++k)
    {
        const int bin = ((k % Nc) + Nc) % Nc;
        f << fmt_num(k * cfg.subcarrier_spacing_hz) << "," << fmt_num(linear_to_dbm(psd_w(bin))) << "\n";
    }
}

void write_outputs(const std::string &dir, const ScenarioSpec &spec, const MonteCarloResult &r)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_runs_csv((fs::path(dir) / "runs.csv").string(), r);
    write_aggregate_csv((fs::path(dir) / "aggregate.csv").string(), r);
    const auto cfgs = resolve_points(spec);
    for (std::size_t p = 0; p < r.aggregates.size(); ++p)
    {
        const auto &a = r.aggregates[p];
        if (a.psd.isolation.n_elem == 0)
            continue;
        const std::string stem = (fs::path(dir) / ("psd_p" + std::to_string(p) + "_")).string();
        write_psd_csv(stem + "isolation.csv", a.psd.isolation, cfgs[p]);
        write_psd_csv(stem + "analog.csv", a.psd.analog, cfgs[p]);
        write_psd_csv(stem + "digital.csv", a.psd.digital, cfgs[p]);
        write_psd_csv(stem + "noise_floor.csv", RVec(cfgs[p].Nc, arma::fill::value(a.psd.noise_floor_w)), cfgs[p]);
    }
    if (spec.want_dumps)
    {
        nlohmann::json j = nlohmann::json::array();
        for (const auto &rec : r.records)
            j.push_back({{"sweep_point", rec.sweep_point}, {"run_id", rec.run_id}, {"dumps", rec.dumps}});
        auto f = open_out((fs::path(dir) / "dumps.json").string());
        f << j.dump(1) << "\n";
    }
}
} // namespace fdsim
