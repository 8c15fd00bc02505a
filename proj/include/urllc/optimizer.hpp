#pragma once

// Operating-point search: the shortest block meeting an outage target, the
// (n, n_p) pair with the highest goodput at that target, and frontiers of
// either over a list of targets. Everything is an exact integer scan.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/detail/parallel.hpp"
#include "urllc/estimation.hpp"
#include "urllc/relaying.hpp"

namespace urllc {

enum class Objective { latency, goodput };

inline const char* to_string(Objective o) { return o == Objective::latency ? "latency" : "goodput"; }

/// Total blocklength range scanned (both phases together for relaying).
struct NRange {
    int min = 8;
    int max = 2000;
};

struct SearchSpace {
    Scheme scheme = Scheme::decode_forward;
    NRange n;
    double relay_fraction = 0.5;  // share of n given to the relaying phase
    std::size_t workers = 1;      // 0: one per hardware thread

    void validate() const {
        if (n.min < 4 || n.max < n.min) {
            throw std::domain_error("search range must satisfy 4 <= min <= max, got [" + std::to_string(n.min) + ", " +
                                    std::to_string(n.max) + "]");
        }
        if (!(relay_fraction > 0.0 && relay_fraction < 1.0)) throw std::domain_error("relay fraction must lie in (0,1)");
    }
};

struct FrontierPoint {
    Probability eps_target;
    bool feasible = false;
    int n_opt = 0;
    int n_p_opt = 0;
    Probability achieved_eps{1.0};  // lowest outage in range when infeasible
    double latency_s = 0.0;
    double goodput = 0.0;
    int n_data = 0;  // channel uses charged to latency
};

inline constexpr double kMinTarget = 1e-5;
inline constexpr double kMaxTarget = 1e-1;

inline void require_target(Probability eps) {
    if (!(eps.value() >= kMinTarget * (1.0 - 1e-12) && eps.value() <= kMaxTarget * (1.0 + 1e-12))) {
        throw std::domain_error("outage target must lie in [1e-5, 1e-1], got " + std::to_string(eps.value()));
    }
}

/// Scenario with total blocklength n split over the phases and n_p pilots per phase.
inline ScenarioConfig scenario_at(const ScenarioConfig& cfg, const SearchSpace& space, int n, int n_p) {
    ScenarioConfig c = cfg;
    if (space.scheme == Scheme::direct) {
        c.n_source = n;
        c.n_relay = n;
    } else {
        c.n_relay = static_cast<int>(std::lround(n * space.relay_fraction));
        c.n_source = n - c.n_relay;
    }
    c.pilots = n_p;
    return c;
}

/// Pilots per phase the policy prescribes at total blocklength n. Under PPC
/// this is the optimum for the source phase length at nominal P.
inline std::optional<int> default_pilots(const ScenarioConfig& cfg, const SearchSpace& space, int n) {
    switch (cfg.policy.kind) {
        case PilotKind::perfect_csi: return 0;
        case PilotKind::apc: return 1;
        case PilotKind::ppc: {
            const auto c = scenario_at(cfg, space, n, 0);
            if (c.n_source < 4 || max_pilot_count(c.n_source, cfg.policy.kappa) < 1) return std::nullopt;
            return optimal_pilot_count(c.n_source, cfg.policy.kappa, cfg.power);
        }
    }
    return std::nullopt;
}

/// One evaluated operating point.
struct Candidate {
    int n = 0;
    int n_p = 0;
    Probability eps{1.0};
    ChannelUses uses;
    int latency_uses = 0;
};

/// Outage and channel-use accounting at (n, n_p); nullopt when the pair is
/// outside the scenario's domain.
inline std::optional<Candidate> evaluate_point(const ScenarioConfig& cfg, const SearchSpace& space, int n, int n_p) {
    const auto c = scenario_at(cfg, space, n, n_p);
    try {
        c.validate();
        Candidate out;
        out.n = n;
        out.n_p = n_p;
        out.eps = outage(c, space.scheme);
        out.uses = channel_uses(c, space.scheme, n_p);
        out.latency_uses = latency_uses(c, out.uses);
        if (out.uses.data < 1) return std::nullopt;
        return out;
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

inline double candidate_goodput(const ScenarioConfig& cfg, const Candidate& c) {
    return goodput(c.uses.total, c.uses.pilots, cfg.rate, c.eps);
}

inline FrontierPoint to_point(const ScenarioConfig& cfg, Probability target, const Candidate& c) {
    FrontierPoint p;
    p.eps_target = target;
    p.feasible = c.eps.value() <= target.value();
    p.n_opt = c.n;
    p.n_p_opt = c.n_p;
    p.achieved_eps = c.eps;
    p.n_data = c.latency_uses;
    p.latency_s = latency(cfg, c.latency_uses);
    p.goodput = candidate_goodput(cfg, c);
    return p;
}

inline FrontierPoint infeasible_point(Probability target, double lowest_eps) {
    FrontierPoint p;
    p.eps_target = target;
    p.achieved_eps = Probability::clamped(lowest_eps);
    return p;
}

/// Every n in range evaluated at the policy's pilot count, in order of n.
inline std::vector<std::optional<Candidate>> latency_table(const ScenarioConfig& cfg, const SearchSpace& space) {
    space.validate();
    cfg.policy.validate();
    const std::size_t count = static_cast<std::size_t>(space.n.max - space.n.min + 1);
    std::vector<std::optional<Candidate>> table(count);
    detail::parallel_for(count, space.workers, [&](std::size_t i) {
        const int n = space.n.min + static_cast<int>(i);
        const auto np = default_pilots(cfg, space, n);
        if (np) table[i] = evaluate_point(cfg, space, n, *np);
    });
    return table;
}

/// Fewest latency channel uses meeting the target; ties go to smaller n.
inline FrontierPoint pick_latency(const ScenarioConfig& cfg, Probability target,
                                  const std::vector<std::optional<Candidate>>& table) {
    const Candidate* best = nullptr;
    double lowest = 1.0;
    for (const auto& c : table) {
        if (!c) continue;
        lowest = std::min(lowest, c->eps.value());
        if (c->eps.value() > target.value()) continue;
        if (!best || c->latency_uses < best->latency_uses) best = &*c;
    }
    if (!best) return infeasible_point(target, lowest);
    return to_point(cfg, target, *best);
}

inline FrontierPoint min_latency(const ScenarioConfig& cfg, Probability eps_target, const SearchSpace& space) {
    require_target(eps_target);
    return pick_latency(cfg, eps_target, latency_table(cfg, space));
}

namespace detail {

struct GoodputBest {
    std::optional<Candidate> best;
    double best_goodput = -1.0;
    double lowest_eps = 1.0;
};

// Best pilot count at one blocklength. Pilot counts are visited in increasing
// order; goodput is bounded by R (1 - pilots/total), which shrinks with n_p,
// so the scan stops once that bound cannot beat the best point found.
inline GoodputBest best_pilots_at(const ScenarioConfig& cfg, const SearchSpace& space, int n, Probability target) {
    GoodputBest out;
    int lo = 0;
    int hi = 0;
    switch (cfg.policy.kind) {
        case PilotKind::perfect_csi: lo = hi = 0; break;
        case PilotKind::apc: lo = hi = 1; break;
        case PilotKind::ppc: {
            const auto c = scenario_at(cfg, space, n, 0);
            lo = 1;
            hi = max_pilot_count(std::min(c.n_source, c.n_relay), cfg.policy.kappa);
            break;
        }
    }
    for (int np = lo; np <= hi; ++np) {
        const auto uses = channel_uses(scenario_at(cfg, space, n, np), space.scheme, np);
        const double bound = cfg.rate * (1.0 - static_cast<double>(uses.pilots) / uses.total);
        if (out.best && bound <= out.best_goodput) break;
        const auto c = evaluate_point(cfg, space, n, np);
        if (!c) continue;
        out.lowest_eps = std::min(out.lowest_eps, c->eps.value());
        if (c->eps.value() > target.value()) continue;
        const double g = candidate_goodput(cfg, *c);
        if (g > out.best_goodput) {
            out.best = c;
            out.best_goodput = g;
        }
    }
    return out;
}

}  // namespace detail

/// Highest-goodput (n, n_p) meeting the target; ties go to smaller n, then
/// fewer pilots.
inline FrontierPoint max_goodput(const ScenarioConfig& cfg, Probability eps_target, const SearchSpace& space) {
    require_target(eps_target);
    space.validate();
    cfg.policy.validate();
    const std::size_t count = static_cast<std::size_t>(space.n.max - space.n.min + 1);
    std::vector<detail::GoodputBest> per_n(count);
    detail::parallel_for(count, space.workers, [&](std::size_t i) {
        per_n[i] = detail::best_pilots_at(cfg, space, space.n.min + static_cast<int>(i), eps_target);
    });
    const detail::GoodputBest* best = nullptr;
    double lowest = 1.0;
    for (const auto& r : per_n) {
        lowest = std::min(lowest, r.lowest_eps);
        if (!r.best) continue;
        if (!best || r.best_goodput > best->best_goodput) best = &r;
    }
    if (!best) return infeasible_point(eps_target, lowest);
    return to_point(cfg, eps_target, *best->best);
}

/// One point per target, in the order given. Infeasible targets are kept and
/// flagged.
inline std::vector<FrontierPoint> frontier(const ScenarioConfig& cfg, const std::vector<Probability>& eps_grid,
                                           Objective objective, const SearchSpace& space) {
    for (const auto& e : eps_grid) require_target(e);
    std::vector<FrontierPoint> out;
    out.reserve(eps_grid.size());
    if (objective == Objective::latency) {
        const auto table = latency_table(cfg, space);
        for (const auto& e : eps_grid) out.push_back(pick_latency(cfg, e, table));
        return out;
    }
    // Loosest target first. Once a target is infeasible every tighter one is
    // too, and its full scan already saw the lowest outage in range.
    out.resize(eps_grid.size());
    std::vector<std::size_t> order(eps_grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eps_grid[a].value() > eps_grid[b].value(); });
    std::optional<double> floor_eps;
    for (std::size_t i : order) {
        if (floor_eps) {
            out[i] = infeasible_point(eps_grid[i], *floor_eps);
            continue;
        }
        out[i] = max_goodput(cfg, eps_grid[i], space);
        if (!out[i].feasible) floor_eps = out[i].achieved_eps.value();
    }
    return out;
}

}  // namespace urllc
