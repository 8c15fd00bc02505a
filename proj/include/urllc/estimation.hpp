#pragma once

// MMSE pilot-based channel estimation: estimate/error variances, the
// effective SNR seen by a decoder that treats the residual estimation error
// as noise, and the pilot budget under average (APC) and peak (PPC) power
// constraints.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "urllc/mathcore.hpp"

namespace urllc {

enum class PilotKind { apc, ppc, perfect_csi };

/// How the training sequence is powered. `kappa` caps each pilot symbol at
/// kappa * P and only matters for PPC.
struct PilotPolicy {
    PilotKind kind = PilotKind::ppc;
    double kappa = 3.0;

    static PilotPolicy apc() { return {PilotKind::apc, 1.0}; }
    static PilotPolicy ppc(double kappa) { return {PilotKind::ppc, kappa}; }
    static PilotPolicy perfect_csi() { return {PilotKind::perfect_csi, 1.0}; }

    void validate() const {
        if (kind == PilotKind::ppc && !(kappa >= 1.0 && std::isfinite(kappa))) {
            throw std::domain_error("PPC requires a finite kappa >= 1, got " + std::to_string(kappa));
        }
    }
};

inline const char* to_string(PilotKind k) {
    switch (k) {
        case PilotKind::apc: return "apc";
        case PilotKind::ppc: return "ppc";
        case PilotKind::perfect_csi: return "pcsi";
    }
    return "?";
}

/// Variances of the MMSE estimate and of its error, and the resulting
/// effective SNR of the data phase.
struct EstimationResult {
    double sigma2_hat = 1.0;
    double sigma2_tilde = 0.0;
    Snr gamma_eff;
};

struct MmseVariances {
    double sigma2_hat = 0.0;
    double sigma2_tilde = 1.0;
};

/// Estimate and error variances for a pilot block of total energy
/// `pilot_energy` = ||x_t||^2 and channel variance `sigma2`.
inline MmseVariances mmse_variances(double pilot_energy, double sigma2 = 1.0) {
    if (!(pilot_energy >= 0.0)) throw std::domain_error("mmse_variances: pilot energy must be >= 0");
    if (!(sigma2 > 0.0)) throw std::domain_error("mmse_variances: channel variance must be > 0");
    if (std::isinf(pilot_energy)) return {sigma2, 0.0};
    const double denom = sigma2 * pilot_energy + 1.0;
    return {sigma2 * sigma2 * pilot_energy / denom, sigma2 / denom};
}

/// The three algebraically equal expressions of the effective SNR, in the
/// order sigma_hat^2 s/(1 + sigma_tilde^2 s), s(1 - sigma_tilde^2)/(1 + ...),
/// (1 + s)/(1 + sigma_tilde^2 s) - 1.
inline std::array<double, 3> effective_snr_forms(double sigma2_tilde, Snr data_power) {
    const double s = data_power.linear();
    const double hat = 1.0 - sigma2_tilde;
    const double denom = 1.0 + sigma2_tilde * s;
    return {hat * s / denom, s * (1.0 - sigma2_tilde) / denom, (1.0 + s) / denom - 1.0};
}

/// Effective SNR when the error variance is `sigma2_tilde` (unit channel
/// variance) and the data symbols carry mean power `data_power`.
inline Snr effective_snr(double sigma2_tilde, Snr data_power) {
    if (!(sigma2_tilde >= 0.0 && sigma2_tilde <= 1.0)) {
        throw std::domain_error("effective_snr: error variance must lie in [0,1]");
    }
    if (sigma2_tilde == 0.0) return data_power;
    return Snr(std::max(0.0, effective_snr_forms(sigma2_tilde, data_power)[0]));
}

// ---------------------------------------------------------------------------
// Average power constraint: one pilot whose power is optimised within the
// block budget n*P.

struct ApcIntermediates {
    double d = 0.0;
    double f = 0.0;
};

inline void require_apc_domain(int n, Snr p) {
    if (n <= 2) throw std::domain_error("APC effective SNR is singular for n <= 2, got n=" + std::to_string(n));
    if (!(p.linear() > 0.0)) throw std::domain_error("APC effective SNR requires P > 0");
}

inline ApcIntermediates apc_intermediates(int n, Snr p) {
    require_apc_domain(n, p);
    const double nn = n;
    const double pp = p.linear();
    const double d = (nn + nn * pp - 1.0) / ((nn - 2.0) * nn * pp);
    const double f = (nn - 1.0) * (nn * nn * pp * (1.0 + pp) + nn - 1.0) / ((nn - 2.0) * (nn - 2.0) * nn * nn * pp * pp);
    return {d, f};
}

/// Effective SNR of the optimal single-pilot APC scheme over a block of n
/// channel uses (one pilot, n - 1 data symbols).
inline Snr apc_effective_snr(int n, Snr p) {
    const auto [d, f] = apc_intermediates(n, p);
    const double sf = std::sqrt(f);
    const double a = 1.0 + d - sf;
    const double b = sf - d;
    if (!(f > 0.0) || !(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("APC effective SNR: invalid regime (n=" + std::to_string(n) + ", P=" +
                                std::to_string(p.linear()) + ")");
    }
    return Snr(n * p.linear() * a * b / ((n - 2.0) * sf));
}

/// Effective SNR of a single pilot carrying the fraction `psi` of the block
/// energy n*P, the remainder spread over n - 1 data symbols.
inline Snr apc_single_pilot_snr(int n, Snr p, double psi) {
    if (n < 2) throw std::domain_error("apc_single_pilot_snr: need n >= 2");
    if (!(psi > 0.0 && psi < 1.0)) throw std::domain_error("apc_single_pilot_snr: psi must lie in (0,1)");
    const double energy = n * p.linear();
    const auto var = mmse_variances(psi * energy);
    return effective_snr(var.sigma2_tilde, Snr((1.0 - psi) * energy / (n - 1.0)));
}

/// Diagnostic only: the pilot power fraction psi at which the single-pilot
/// effective SNR peaks (golden-section search). Its peak value reproduces
/// apc_effective_snr.
inline double apc_pilot_fraction(int n, Snr p) {
    require_apc_domain(n, p);
    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = apc_single_pilot_snr(n, p, x1);
    double f2 = apc_single_pilot_snr(n, p, x2);
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = apc_single_pilot_snr(n, p, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = apc_single_pilot_snr(n, p, x1);
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Peak power constraint: n_p pilots at kappa*P each, data symbols share what
// is left of the block energy n*P.

inline void require_ppc_domain(int n, double n_p, double kappa, Snr p) {
    if (!(n_p >= 1.0 && n_p < n)) {
        throw std::domain_error("PPC requires 1 <= n_p < n (n_p=" + std::to_string(n_p) + ", n=" + std::to_string(n) +
                                ")");
    }
    if (!(kappa >= 1.0)) throw std::domain_error("PPC requires kappa >= 1");
    if (!(n_p * kappa <= n)) {
        throw std::domain_error("PPC pilot energy exceeds block budget: n_p*kappa=" + std::to_string(n_p * kappa) +
                                " > n=" + std::to_string(n));
    }
    if (!(p.linear() >= 0.0)) throw std::domain_error("PPC requires P >= 0");
}

/// Mean data-symbol power left after n_p pilots at kappa*P.
inline Snr ppc_data_power(int n, int n_p, double kappa, Snr p) {
    require_ppc_domain(n, n_p, kappa, p);
    return Snr(p.linear() * (n - n_p * kappa) / (n - n_p));
}

/// Effective SNR under PPC, closed form. Real-valued n_p is accepted so the
/// function can be probed between integers.
inline double ppc_effective_snr_real(int n, double n_p, double kappa, Snr p) {
    require_ppc_domain(n, n_p, kappa, p);
    const double pp = p.linear();
    const double residual = std::max(0.0, n - n_p * kappa);
    const double num = n_p * kappa * residual * pp * pp;
    const double den = (residual + (n - n_p) * n_p * kappa) * pp + (n - n_p);
    return num / den;
}

inline Snr ppc_effective_snr(int n, int n_p, double kappa, Snr p) {
    return Snr(ppc_effective_snr_real(n, n_p, kappa, p));
}

/// Coefficients of the stationarity condition A n_p^2 + B n_p + C = 0 of the
/// PPC effective SNR, with both roots.
struct PilotQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::pair<double, double> roots;  // (minus-radical root, plus-radical root)

    [[nodiscard]] double evaluate(double x) const noexcept { return (a * x + b) * x + c; }
};

inline PilotQuadratic pilot_quadratic(int n, double kappa, Snr p) {
    const double nn = n;
    const double k = kappa;
    const double pp = p.linear();
    const double p2 = pp * pp;
    const double p3 = p2 * pp;
    PilotQuadratic q;
    q.a = k * k * p2 + k * k * k * p3 - nn * k * k * k * p3 + nn * k * k * p3;
    q.b = -2.0 * nn * k * k * p2 - 2.0 * nn * k * k * p3;
    q.c = nn * nn * k * p2 + nn * nn * k * p3;
    const double disc = std::max(0.0, q.b * q.b - 4.0 * q.a * q.c);
    const double sq = std::sqrt(disc);
    // -B > 0 always, so the minus-radical root is computed as 2C / (-B + sqrt)
    // to avoid cancellation; it also degrades gracefully to the linear
    // solution C / (-B) when A vanishes.
    const double minus_root = 2.0 * q.c / (-q.b + sq);
    const double plus_root = q.a != 0.0 ? (-q.b + sq) / (2.0 * q.a) : std::numeric_limits<double>::infinity();
    q.roots = {minus_root, plus_root};
    return q;
}

/// Largest pilot count the block admits: n_p * kappa <= n and n_p < n.
inline int max_pilot_count(int n, double kappa) {
    const int by_energy = static_cast<int>(std::floor(n / kappa + 1e-12));
    return std::min(by_energy, n - 1);
}

/// Integer pilot count maximising the PPC effective SNR.
inline int optimal_pilot_count(int n, double kappa, Snr p) {
    if (n < 4) throw std::domain_error("optimal_pilot_count requires n >= 4, got " + std::to_string(n));
    if (!(kappa >= 1.0)) throw std::domain_error("optimal_pilot_count requires kappa >= 1");
    if (!(p.linear() > 0.0)) throw std::domain_error("optimal_pilot_count requires P > 0");
    const int upper = max_pilot_count(n, kappa);
    if (upper < 1) {
        throw std::domain_error("no feasible pilot count: floor(n/kappa) < 1 (n=" + std::to_string(n) +
                                ", kappa=" + std::to_string(kappa) + ")");
    }
    if (upper == 1) return 1;

    const auto quad = pilot_quadratic(n, kappa, p);
    const double root = std::clamp(quad.roots.first, 1.0, static_cast<double>(upper));
    const int lo = static_cast<int>(std::floor(root));
    const int hi = std::min(upper, lo + 1);
    if (hi == lo) return lo;
    const double g_lo = ppc_effective_snr_real(n, lo, kappa, p);
    const double g_hi = ppc_effective_snr_real(n, hi, kappa, p);
    return g_hi > g_lo ? hi : lo;  // ties go to fewer pilots
}

/// Estimation outcome for one link whose average receive SNR is `p` over a
/// phase of n channel uses, `n_p` of which are pilots.
inline EstimationResult estimate_link(const PilotPolicy& policy, int n, int n_p, Snr p) {
    policy.validate();
    switch (policy.kind) {
        case PilotKind::perfect_csi:
            return {1.0, 0.0, p};
        case PilotKind::ppc: {
            const auto var = mmse_variances(policy.kappa * n_p * p.linear());
            const Snr data = ppc_data_power(n, n_p, policy.kappa, p);
            return {var.sigma2_hat, var.sigma2_tilde, effective_snr(var.sigma2_tilde, data)};
        }
        case PilotKind::apc: {
            if (n_p != 1) throw std::domain_error("APC uses exactly one pilot, got n_p=" + std::to_string(n_p));
            const Snr g = apc_effective_snr(n, p);
            // Back out the error variance implied by the optimal pilot fraction.
            const double psi = apc_pilot_fraction(n, p);
            const auto var = mmse_variances(psi * n * p.linear());
            return {var.sigma2_hat, var.sigma2_tilde, g};
        }
    }
    throw std::logic_error("unknown pilot policy");
}

}  // namespace urllc
