#pragma once

// Finite-blocklength rate and outage under the normal approximation:
// maximum coding rate at a given error probability, the conditional AWGN
// error at a given instantaneous SNR, its Rayleigh-fading expectation by
// quadrature, and the closed-form linearised approximation of that
// expectation.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/mathcore.hpp"

namespace urllc {

/// Operating rate R in bits per channel use and the number of channel uses
/// carrying data.
struct CodingSpec {
    double rate = 0.5;
    int n = 1;

    void validate() const {
        if (!(rate > 0.0 && std::isfinite(rate))) throw std::domain_error("coding rate must be > 0");
        if (n < 1) throw std::domain_error("data blocklength must be >= 1, got " + std::to_string(n));
    }
    [[nodiscard]] double info_bits() const noexcept { return rate * n; }
};

/// Log base applied to R inside mu = sqrt((n / 2pi) / (e^{2R} - 1)).
/// `bits` substitutes R in bits per channel use literally; `nats` converts it
/// first (R ln 2), which turns e^{2R} into 2^{2R}.
enum class MuLogMode { bits, nats };

inline const char* to_string(MuLogMode m) { return m == MuLogMode::bits ? "bits" : "nats"; }

/// Parameters of the closed-form outage approximation.
struct OutageApproxParams {
    double theta = 0.0;
    double zeta = 0.0;
    double mu = 0.0;

    static OutageApproxParams make(const CodingSpec& spec, Snr mean_snr, MuLogMode mode) {
        spec.validate();
        const double r = mode == MuLogMode::bits ? spec.rate : spec.rate * std::numbers::ln2;
        OutageApproxParams p;
        p.theta = std::expm1(spec.rate * std::numbers::ln2) / mean_snr.linear();
        p.mu = std::sqrt(spec.n / (2.0 * std::numbers::pi) / std::expm1(2.0 * r));
        p.zeta = mean_snr.linear() * p.mu * std::sqrt(2.0 * std::numbers::pi);
        return p;
    }

    /// True when every field matches a fresh recomputation to `tol` relative.
    [[nodiscard]] bool consistent_with(const CodingSpec& spec, Snr mean_snr, MuLogMode mode,
                                       double tol = 1e-12) const {
        const auto ref = make(spec, mean_snr, mode);
        auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); };
        return close(theta, ref.theta) && close(zeta, ref.zeta) && close(mu, ref.mu);
    }
};

/// Maximum coding rate (bits per channel use) at blocklength n, error
/// probability eps and SNR gamma, under the normal approximation.
inline double max_rate(int n, Probability eps, Snr gamma) {
    if (n < 1) throw std::domain_error("max_rate requires n >= 1");
    if (!(gamma.linear() > 0.0)) throw std::domain_error("max_rate requires gamma > 0");
    return shannon_c(gamma) - std::sqrt(dispersion_v(gamma) / n) * q_inv(eps) * std::numbers::log2e;
}

namespace detail {

// Hot-path version of outage_awgn_conditional without the strong types.
inline double conditional_error(double gamma, int n, double rate_bits) noexcept {
    if (!(gamma > 0.0)) return 1.0;
    if (std::isinf(gamma)) return 0.0;
    const double r = 1.0 / (1.0 + gamma);
    const double v = (1.0 - r) * (1.0 + r);
    const double arg = std::sqrt(static_cast<double>(n)) * (std::log1p(gamma) - rate_bits * std::numbers::ln2) /
                       std::sqrt(v);
    return q_raw(arg);
}

// Points in normalised-gain units where the conditional error changes
// fastest: around the threshold (2^R - 1)/gamma with the linearisation width.
inline std::vector<double> transition_points(const CodingSpec& spec, double scale) {
    const double beta = std::expm1(spec.rate * std::numbers::ln2);
    const double mu = std::sqrt(spec.n / (2.0 * std::numbers::pi) / std::expm1(2.0 * spec.rate * std::numbers::ln2));
    const double width = 1.0 / mu;
    std::vector<double> pts;
    for (double f : {0.25, 0.5, 2.0, 4.0, 10.0}) pts.push_back(f * beta / scale);
    for (double k : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
        const double x = (beta + k * width) / scale;
        if (x > 0.0) pts.push_back(x);
    }
    return pts;
}

}  // namespace detail

/// Error probability of a length-n code at rate R over AWGN with
/// instantaneous SNR gamma_inst (the inverse map of max_rate).
inline Probability outage_awgn_conditional(Snr gamma_inst, const CodingSpec& spec) {
    spec.validate();
    return Probability::clamped(detail::conditional_error(gamma_inst.linear(), spec.n, spec.rate));
}

/// Tolerance used by every quadrature-based outage in this library.
inline constexpr Tolerance kOutageTolerance{1e-13, 1e-10};

/// Outage averaged over Rayleigh fading with mean SNR `mean_snr`, by
/// quadrature. The exponential weight is absorbed by substituting
/// t = -ln(u), u in (0, 1].
inline Probability outage_rayleigh_exact(const CodingSpec& spec, Snr mean_snr) {
    spec.validate();
    const double g = mean_snr.linear();
    if (!(g > 0.0)) throw std::domain_error("outage_rayleigh_exact requires mean SNR > 0");
    if (std::isinf(g)) return Probability(0.0);

    auto integrand = [&](double u) -> double {
        if (u <= 0.0) return 1.0;
        return detail::conditional_error(-g * std::log(u), spec.n, spec.rate);
    };
    std::vector<double> cuts;
    for (double t : detail::transition_points(spec, g)) cuts.push_back(std::exp(-t));
    const double value = integrate_or_throw(integrand, Interval{0.0, 1.0}, kOutageTolerance, cuts);
    return Probability::clamped(value);
}

/// Closed-form approximation of outage_rayleigh_exact, obtained by
/// linearising the conditional error around the rate threshold:
///   eps = 1 - (zeta / sqrt(2 pi)) e^{-theta} [e^{x} - e^{-x}],  x = sqrt(pi / (2 zeta^2)).
/// Evaluated as -expm1(ln(sinh(x)/x) - theta), which is the same quantity
/// without the cancellation of 1 - (something close to 1).
inline Probability outage_rayleigh_approx(const CodingSpec& spec, Snr mean_snr, MuLogMode mode = MuLogMode::bits) {
    spec.validate();
    if (!(mean_snr.linear() > 0.0)) throw std::domain_error("outage_rayleigh_approx requires mean SNR > 0");
    if (std::isinf(mean_snr.linear())) return Probability(0.0);
    const auto p = OutageApproxParams::make(spec, mean_snr, mode);
    const double x = std::sqrt(std::numbers::pi / (2.0 * p.zeta * p.zeta));
    double log_sinhc = 0.0;  // ln(sinh(x)/x)
    if (x < 1e-3) {
        const double x2 = x * x;
        log_sinhc = x2 / 6.0 - x2 * x2 / 180.0;
    } else if (x < 20.0) {
        log_sinhc = std::log(std::sinh(x) / x);
    } else {
        log_sinhc = x - std::numbers::ln2 - std::log(x) + std::log1p(-std::exp(-2.0 * x));
    }
    return Probability::clamped(-std::expm1(log_sinhc - p.theta));
}

/// The closed form exactly as printed, term by term. Kept for cross-checks;
/// prefer outage_rayleigh_approx in computation.
inline double outage_rayleigh_approx_literal(const CodingSpec& spec, Snr mean_snr, MuLogMode mode) {
    const auto p = OutageApproxParams::make(spec, mean_snr, mode);
    const double x = std::sqrt(std::numbers::pi / (2.0 * p.zeta * p.zeta));
    return 1.0 - p.zeta / std::sqrt(2.0 * std::numbers::pi) * std::exp(-p.theta) * (std::exp(x) - std::exp(-x));
}

}  // namespace urllc
