#pragma once

// Stochastic oracle for the analytic outage expressions. Each sample draws
// the Rayleigh power gains of the links and scores the conditional
// finite-blocklength error probability, so the sample mean estimates the same
// functional the quadrature computes. Samples are processed in fixed-size
// batches with one seeded generator per batch and reduced in a fixed order,
// so results are bitwise identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "urllc/detail/parallel.hpp"
#include "urllc/estimation.hpp"
#include "urllc/fbl.hpp"
#include "urllc/relaying.hpp"

namespace urllc {

enum class SimMode { direct, relay_df, mrc_only, estimator_check };
enum class ImportanceSampling { off, on, automatic };

inline const char* to_string(SimMode m) {
    switch (m) {
        case SimMode::direct: return "direct";
        case SimMode::relay_df: return "relay_df";
        case SimMode::mrc_only: return "mrc_only";
        case SimMode::estimator_check: return "estimator_check";
    }
    return "?";
}

inline const char* to_string(ImportanceSampling m) {
    switch (m) {
        case ImportanceSampling::off: return "off";
        case ImportanceSampling::on: return "on";
        case ImportanceSampling::automatic: return "auto";
    }
    return "?";
}

struct SimSpec {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    ScenarioConfig scenario;
    SimMode mode = SimMode::direct;
    std::size_t workers = 1;
    ImportanceSampling importance = ImportanceSampling::off;
    std::optional<double> pilot_energy;  // estimator_check; default kappa * n_p * P

    void validate() const {
        if (samples < 1) throw std::domain_error("simulation needs at least one sample");
        scenario.validate();
        if (pilot_energy && !(*pilot_energy >= 0.0)) throw std::domain_error("pilot energy must be >= 0");
    }
};

struct SimResult {
    Probability estimate;
    double std_err = 0.0;
    std::uint64_t samples_used = 0;
    bool importance_sampled = false;
};

struct EstimatorStats {
    double pilot_energy = 0.0;
    double sigma2_hat = 0.0;
    double sigma2_tilde = 0.0;
    double se_hat = 0.0;
    double se_tilde = 0.0;
    std::uint64_t samples = 0;
};

namespace detail {

inline constexpr std::uint64_t kBatchSize = 1ULL << 16;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Generator for batch `index` of a run seeded with `seed`.
inline std::mt19937_64 batch_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double open_uniform(std::mt19937_64& eng) { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; }

inline double unit_exponential(std::mt19937_64& eng) { return -std::log(open_uniform(eng)); }

inline std::pair<double, double> standard_normal_pair(std::mt19937_64& eng) {
    const double r = std::sqrt(-2.0 * std::log(open_uniform(eng)));
    const double phi = 2.0 * std::numbers::pi * open_uniform(eng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

/// Draws Exp(1) power gains, optionally from the defensive mixture
/// lambda Exp(1) + (1 - lambda) Exp(mean s), returning the likelihood ratio.
struct GainSampler {
    double scale = 1.0;  // s; 1 means no tilting
    static constexpr double kLambda = 0.3;

    [[nodiscard]] bool tilted() const noexcept { return scale < 0.5; }

    double draw(std::mt19937_64& eng, double& weight) const {
        if (!tilted()) return unit_exponential(eng);
        const bool nominal = open_uniform(eng) < kLambda;
        const double t = nominal ? unit_exponential(eng) : scale * unit_exponential(eng);
        const double proposal = kLambda * std::exp(-t) + (1.0 - kLambda) / scale * std::exp(-t / scale);
        weight *= std::exp(-t) / proposal;
        return t;
    }
};

struct Accumulator {
    double sw = 0.0;     // sum of weights
    double swq = 0.0;    // sum w q
    double sw2 = 0.0;    // sum w^2
    double sw2q = 0.0;   // sum w^2 q
    double sw2q2 = 0.0;  // sum w^2 q^2

    void add(double w, double q) noexcept {
        sw += w;
        swq += w * q;
        const double w2 = w * w;
        sw2 += w2;
        sw2q += w2 * q;
        sw2q2 += w2 * q * q;
    }
    Accumulator operator+(const Accumulator& o) const noexcept {
        return {sw + o.sw, swq + o.swq, sw2 + o.sw2, sw2q + o.sw2q, sw2q2 + o.sw2q2};
    }
};

inline double tilt_scale(double threshold, Snr mean) {
    if (!(mean.linear() > 0.0)) return 1.0;
    return std::min(1.0, threshold / mean.linear());
}

}  // namespace detail

/// Analytic value of the functional a simulation mode estimates: the same
/// scenario with every single-link outage evaluated by quadrature.
inline Probability analytic_reference(const SimSpec& spec) {
    ScenarioConfig cfg = spec.scenario;
    cfg.conventions.link_model = LinkOutageModel::quadrature;
    switch (spec.mode) {
        case SimMode::direct: return outage_direct(cfg);
        case SimMode::relay_df: return outage_df(cfg).df;
        case SimMode::mrc_only: {
            const auto budget = link_budget(cfg);
            const auto len = data_lengths(cfg, budget.pilots);
            return outage_mrc(budget.z, budget.y, CodingSpec{cfg.rate, len.mrc});
        }
        case SimMode::estimator_check: break;
    }
    throw std::invalid_argument("analytic_reference: estimator_check has no outage reference");
}

inline SimResult simulate_outage(const SimSpec& spec) {
    spec.validate();
    if (spec.mode == SimMode::estimator_check) throw std::invalid_argument("use simulate_estimator for estimator_check");
    const ScenarioConfig& cfg = spec.scenario;
    const auto budget = link_budget(cfg);
    const auto len = data_lengths(cfg, budget.pilots);
    const double rate = cfg.rate;
    const double threshold = std::expm1(rate * std::numbers::ln2);

    bool use_is = spec.importance == ImportanceSampling::on;
    if (spec.importance == ImportanceSampling::automatic) {
        ScenarioConfig quick = cfg;
        quick.conventions.link_model = LinkOutageModel::closed_form;
        const double guess = spec.mode == SimMode::direct ? outage_direct(quick).value() : outage_df(quick).df.value();
        use_is = guess <= 1e-5;
    }
    detail::GainSampler gz, gx, gy;
    if (use_is) {
        gz.scale = detail::tilt_scale(threshold, budget.z);
        gx.scale = detail::tilt_scale(threshold, budget.x);
        gy.scale = detail::tilt_scale(threshold, budget.y);
    }

    const std::uint64_t batches = (spec.samples + detail::kBatchSize - 1) / detail::kBatchSize;
    std::vector<detail::Accumulator> acc(batches);
    const double z = budget.z.linear();
    const double x = budget.x.linear();
    const double y = budget.y.linear();
    const SimMode mode = spec.mode;

    detail::parallel_for(batches, spec.workers, [&](std::size_t b) {
        auto eng = detail::batch_engine(spec.seed, b);
        const std::uint64_t begin = b * detail::kBatchSize;
        const std::uint64_t count = std::min<std::uint64_t>(detail::kBatchSize, spec.samples - begin);
        detail::Accumulator local;
        for (std::uint64_t i = 0; i < count; ++i) {
            double w = 1.0;
            double q = 0.0;
            switch (mode) {
                case SimMode::direct: {
                    const double tz = gz.draw(eng, w);
                    q = detail::conditional_error(z * tz, len.source, rate);
                    break;
                }
                case SimMode::mrc_only: {
                    const double tz = gz.draw(eng, w);
                    const double ty = gy.draw(eng, w);
                    q = detail::conditional_error(z * tz + y * ty, len.mrc, rate);
                    break;
                }
                case SimMode::relay_df: {
                    const double tz = gz.draw(eng, w);
                    const double tx = gx.draw(eng, w);
                    const double ty = gy.draw(eng, w);
                    const double qz = detail::conditional_error(z * tz, len.source, rate);
                    const double qx = detail::conditional_error(x * tx, len.source, rate);
                    const double qs = detail::conditional_error(z * tz + y * ty, len.mrc, rate);
                    q = qx * qz + (1.0 - qx) * qs;
                    break;
                }
                case SimMode::estimator_check: break;
            }
            local.add(w, q);
        }
        acc[b] = local;
    });

    const auto total = detail::pairwise_sum<detail::Accumulator>(0, acc.size(), [&](std::size_t i) { return acc[i]; });
    SimResult out;
    out.samples_used = spec.samples;
    out.importance_sampled = use_is;
    const double est = total.sw > 0.0 ? total.swq / total.sw : 0.0;
    out.estimate = Probability::clamped(est);
    if (use_is) {
        const double var = std::max(0.0, total.sw2q2 - 2.0 * est * total.sw2q + est * est * total.sw2);
        out.std_err = std::sqrt(var) / total.sw;
    } else {
        const double e = out.estimate.value();
        out.std_err = std::sqrt(e * (1.0 - e) / static_cast<double>(spec.samples));
    }
    return out;
}

/// Empirical variances of the MMSE estimate and its error, obtained by
/// transmitting the pilot block over simulated Rayleigh channels with unit
/// noise. Pilot energy is split evenly over n_p symbols (one symbol when no
/// pilots are configured).
inline EstimatorStats simulate_estimator(const SimSpec& spec) {
    spec.validate();
    if (spec.mode != SimMode::estimator_check) throw std::invalid_argument("simulate_estimator needs estimator_check mode");
    const ScenarioConfig& cfg = spec.scenario;
    const int np = std::max(1, pilots_used(cfg));
    const double energy = spec.pilot_energy ? *spec.pilot_energy : cfg.policy.kappa * np * cfg.power.linear();
    const double amplitude = std::sqrt(energy / np);
    const double gain = 1.0 / (energy + 1.0);  // sigma^2 / (sigma^2 E + 1) at sigma^2 = 1

    struct Moments {
        double hat = 0.0, hat2 = 0.0, err = 0.0, err2 = 0.0;
        Moments operator+(const Moments& o) const noexcept {
            return {hat + o.hat, hat2 + o.hat2, err + o.err, err2 + o.err2};
        }
    };
    const std::uint64_t batches = (spec.samples + detail::kBatchSize - 1) / detail::kBatchSize;
    std::vector<Moments> acc(batches);
    detail::parallel_for(batches, spec.workers, [&](std::size_t b) {
        auto eng = detail::batch_engine(spec.seed, b);
        const std::uint64_t begin = b * detail::kBatchSize;
        const std::uint64_t count = std::min<std::uint64_t>(detail::kBatchSize, spec.samples - begin);
        Moments m;
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto [hr, hi] = detail::standard_normal_pair(eng);
            const double h_re = hr * std::numbers::sqrt2 / 2.0;
            const double h_im = hi * std::numbers::sqrt2 / 2.0;
            // x^H y = sum_k a (h a + w_k) = h E + a sum_k w_k
            double w_re = 0.0;
            double w_im = 0.0;
            for (int k = 0; k < np; ++k) {
                const auto [nr, ni] = detail::standard_normal_pair(eng);
                w_re += nr;
                w_im += ni;
            }
            const double corr_re = h_re * energy + amplitude * w_re * std::numbers::sqrt2 / 2.0;
            const double corr_im = h_im * energy + amplitude * w_im * std::numbers::sqrt2 / 2.0;
            const double est_re = gain * corr_re;
            const double est_im = gain * corr_im;
            const double p_hat = est_re * est_re + est_im * est_im;
            const double e_re = h_re - est_re;
            const double e_im = h_im - est_im;
            const double p_err = e_re * e_re + e_im * e_im;
            m.hat += p_hat;
            m.hat2 += p_hat * p_hat;
            m.err += p_err;
            m.err2 += p_err * p_err;
        }
        acc[b] = m;
    });
    const auto total = detail::pairwise_sum<Moments>(0, acc.size(), [&](std::size_t i) { return acc[i]; });
    const double n = static_cast<double>(spec.samples);
    EstimatorStats s;
    s.pilot_energy = energy;
    s.samples = spec.samples;
    s.sigma2_hat = total.hat / n;
    s.sigma2_tilde = total.err / n;
    s.se_hat = std::sqrt(std::max(0.0, total.hat2 / n - s.sigma2_hat * s.sigma2_hat) / n);
    s.se_tilde = std::sqrt(std::max(0.0, total.err2 / n - s.sigma2_tilde * s.sigma2_tilde) / n);
    return s;
}

}  // namespace urllc
