#pragma once

// Special functions and numerical primitives shared by every other module:
// the Gaussian tail Q and its inverse, Shannon capacity, channel dispersion,
// and adaptive Gauss-Kronrod quadrature on finite and semi-infinite supports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace urllc {

/// A probability in [0, 1]. Construction rejects NaN and out-of-range values.
class Probability {
public:
    constexpr Probability() = default;
    constexpr explicit Probability(double v) : value_(v) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::domain_error("probability out of [0,1]: " + std::to_string(v));
        }
    }

    // Clamps round-off excursions such as 1 + 1e-17 back into range; NaN still throws.
    static Probability clamped(double v) {
        if (std::isnan(v)) throw std::domain_error("probability is NaN");
        return Probability(std::clamp(v, 0.0, 1.0));
    }

    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)
    [[nodiscard]] constexpr Probability complement() const noexcept {
        Probability p;
        p.value_ = 1.0 - value_;
        return p;
    }

private:
    double value_ = 0.0;
};

/// Linear power ratio (dimensionless). Core modules speak linear SNR only;
/// the dB views exist for the CLI boundary and for tests.
class Snr {
public:
    constexpr Snr() = default;
    constexpr explicit Snr(double linear) : linear_(linear) {
        if (!(linear >= 0.0)) {
            throw std::domain_error("SNR must be a nonnegative linear ratio: " + std::to_string(linear));
        }
    }

    static Snr from_db(double db) { return Snr(std::pow(10.0, db / 10.0)); }

    [[nodiscard]] constexpr double linear() const noexcept { return linear_; }
    [[nodiscard]] double db() const noexcept { return 10.0 * std::log10(linear_); }
    constexpr operator double() const noexcept { return linear_; }  // NOLINT(google-explicit-constructor)

private:
    double linear_ = 0.0;
};

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;

inline double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Mills-ratio continued fraction, evaluated bottom-up. For x > 6 forty terms
// are far beyond what double precision can resolve.
inline double q_continued_fraction(double x) noexcept {
    double tail = x;
    for (int k = 40; k >= 1; --k) tail = x + k / tail;
    return normal_pdf(x) / tail;
}

inline double q_raw(double x) noexcept {
    if (x > 6.0) return q_continued_fraction(x);
    if (x < -6.0) return 1.0 - q_continued_fraction(-x);
    return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
}

}  // namespace detail

/// Gaussian tail probability Q(x) = P(N(0,1) > x). Keeps relative accuracy in
/// the deep tail, where outage targets of 1e-5 and below live.
inline Probability q_func(double x) {
    if (std::isnan(x)) throw std::domain_error("q_func: NaN argument");
    return Probability::clamped(detail::q_raw(x));
}

/// Inverse of q_func on (0, 1).
inline double q_inv(Probability p) {
    const double pv = p.value();
    if (!(pv > 0.0 && pv < 1.0)) {
        throw std::domain_error("q_inv: argument must lie in (0,1), got " + std::to_string(pv));
    }
    if (pv == 0.5) return 0.0;
    if (pv > 0.5) return -q_inv(Probability(1.0 - pv));

    // Solve ln Q(x) = ln p on x >= 0. ln Q is concave and decreasing, so Newton
    // from the left converges monotonically; bisection guards the bracket.
    const double target = std::log(pv);
    double lo = 0.0;
    double hi = 38.5;  // Q(38.5) underflows double precision
    double x = std::sqrt(std::max(0.0, -2.0 * target - std::log(-2.0 * std::numbers::pi * target)));
    x = std::clamp(x, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double q = detail::q_raw(x);
        const double g = std::log(q) - target;
        if (g > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double slope = -detail::normal_pdf(x) / q;  // d/dx ln Q(x)
        double next = x - g / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, x) || hi - lo <= 1e-15 * std::max(1.0, x)) {
            return next;
        }
        x = next;
    }
    return x;
}

/// Shannon capacity log2(1 + snr) in bits per channel use.
inline double shannon_c(Snr snr) noexcept { return std::log1p(snr.linear()) / std::numbers::ln2; }

/// Channel dispersion of the complex AWGN channel, snr(2+snr)/(1+snr)^2.
inline double dispersion_v(Snr snr) noexcept {
    const double g = snr.linear();
    if (std::isinf(g)) return 1.0;
    if (g < 1.0) return g * (2.0 + g) / ((1.0 + g) * (1.0 + g));
    const double r = 1.0 / (1.0 + g);
    return 1.0 - r * r;
}

// ---------------------------------------------------------------------------
// Quadrature

/// Integration support [lower, upper]; upper may be +infinity.
struct Interval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
};

/// Absolute and relative error targets. Refinement stops once the estimated
/// absolute error is below max(abs, rel * |integral|).
struct Tolerance {
    double abs = 1e-10;
    double rel = 0.0;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t evaluations = 0;
    std::size_t subintervals = 0;
    bool converged = false;
};

/// Thrown by consumers that require a converged integral; carries the best
/// estimate and its error bound.
class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const QuadratureResult& r)
        : std::runtime_error("quadrature did not converge: estimate " + std::to_string(r.value) +
                             " +/- " + std::to_string(r.abs_error)),
          result_(r) {}
    [[nodiscard]] const QuadratureResult& result() const noexcept { return result_; }

private:
    QuadratureResult result_;
};

namespace detail {

// 15-point Kronrod nodes on [0,1] half-range (descending), Kronrod and
// 7-point Gauss weights.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    bool mapped = false;
    bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

template <class G>
Segment gauss_kronrod15(const G& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = g(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double resabs = std::abs(kronrod);
    double fv1[7];
    double fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = g(center - dx);
        fv2[j] = g(center + dx);
        kronrod += kWgk[j] * (fv1[j] + fv2[j]);
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) gauss += kWg[j / 2] * (fv1[j] + fv2[j]);
    }
    const double mean = 0.5 * kronrod;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

    const double value = kronrod * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
    return {lo, hi, value, err, false};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature with global error-driven
/// bisection. `breakpoints` seeds the initial partition (useful where the
/// integrand has a sharp transition); points outside the support are ignored.
/// A semi-infinite tail [c, inf) is mapped to [0, 1) via x = c + t/(1 - t).
template <class F>
QuadratureResult integrate(const F& f, Interval support, Tolerance tol, std::span<const double> breakpoints = {},
                           std::size_t max_subintervals = 4000) {
    if (!(tol.abs > 0.0 || tol.rel > 0.0)) throw std::invalid_argument("integrate: tolerance must be positive");
    if (!(support.lower <= support.upper) || std::isinf(support.lower)) {
        throw std::invalid_argument("integrate: support must be [finite, finite-or-+inf]");
    }
    QuadratureResult out;
    if (support.lower == support.upper) {
        out.converged = true;
        return out;
    }

    std::vector<double> cuts{support.lower};
    for (double b : breakpoints) {
        if (b > support.lower && b < support.upper) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const bool infinite = std::isinf(support.upper);
    if (!infinite) cuts.push_back(support.upper);
    const double tail_origin = cuts.back();

    // Finite pieces are integrated in x; the tail piece in t on [0, 1).
    auto eval_x = [&](double x) -> double {
        ++out.evaluations;
        return f(x);
    };
    auto eval_t = [&](double t) -> double {
        ++out.evaluations;
        const double one_minus = 1.0 - t;
        if (one_minus <= 0.0) return 0.0;
        return f(tail_origin + t / one_minus) / (one_minus * one_minus);
    };

    std::priority_queue<detail::Segment> heap;
    double total = 0.0;
    double total_err = 0.0;
    auto push = [&](double lo, double hi, bool mapped) {
        auto seg = mapped ? detail::gauss_kronrod15(eval_t, lo, hi) : detail::gauss_kronrod15(eval_x, lo, hi);
        seg.mapped = mapped;
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) push(cuts[i], cuts[i + 1], false);
    if (infinite) push(0.0, 1.0, true);

    auto target = [&] { return std::max(tol.abs, tol.rel * std::abs(total)); };
    while (total_err > target() && heap.size() < max_subintervals) {
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) break;  // cannot split further
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        push(worst.lo, mid, worst.mapped);
        push(mid, worst.hi, worst.mapped);
    }
    // Re-sum to shed the drift of incremental updates.
    total = 0.0;
    total_err = 0.0;
    out.subintervals = heap.size();
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.abs_error = total_err;
    out.converged = total_err <= std::max(tol.abs, tol.rel * std::abs(total));
    return out;
}

template <class F>
QuadratureResult integrate(const F& f, Interval support, double abs_tol) {
    return integrate(f, support, Tolerance{abs_tol, 0.0});
}

/// Returns the integral or throws QuadratureError.
template <class F>
double integrate_or_throw(const F& f, Interval support, Tolerance tol, std::span<const double> breakpoints = {},
                          std::size_t max_subintervals = 4000) {
    const auto r = integrate(f, support, tol, breakpoints, max_subintervals);
    if (!r.converged) throw QuadratureError(r);
    return r.value;
}

}  // namespace urllc
