#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "urllc/estimation.hpp"

using namespace urllc;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Exhaustive argmax of the PPC effective SNR; ties to fewer pilots.
int scan_optimum(int n, double kappa, Snr p) {
    int best = 1;
    double best_g = -1.0;
    for (int np = 1; np <= max_pilot_count(n, kappa); ++np) {
        const double g = ppc_effective_snr_real(n, np, kappa, p);
        if (g > best_g) {
            best_g = g;
            best = np;
        }
    }
    return best;
}

struct Lcg {
    std::uint64_t s;
    double next() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    }
};

}  // namespace

TEST(Mmse, Examples) {
    auto v0 = mmse_variances(0.0);
    EXPECT_EQ(v0.sigma2_hat, 0.0);
    EXPECT_EQ(v0.sigma2_tilde, 1.0);
    auto v1 = mmse_variances(1.0);
    EXPECT_DOUBLE_EQ(v1.sigma2_hat, 0.5);
    EXPECT_DOUBLE_EQ(v1.sigma2_tilde, 0.5);
    auto vbig = mmse_variances(1e12);
    EXPECT_NEAR(vbig.sigma2_hat, 1.0, 1e-10);
    EXPECT_NEAR(vbig.sigma2_tilde, 0.0, 1e-10);
    EXPECT_THROW(mmse_variances(-1.0), std::domain_error);
    EXPECT_THROW(mmse_variances(1.0, 0.0), std::domain_error);
}

TEST(Mmse, NonUnitChannelVariance) {
    const auto v = mmse_variances(2.0, 3.0);
    EXPECT_DOUBLE_EQ(v.sigma2_hat, 9.0 * 2.0 / 7.0);
    EXPECT_DOUBLE_EQ(v.sigma2_tilde, 3.0 / 7.0);
}

TEST(Mmse, OrthogonalityAndMonotonicity) {
    Lcg rng{7};
    for (int i = 0; i < 1000; ++i) {
        const double e = std::pow(10.0, -4.0 + 10.0 * rng.next());
        const auto v = mmse_variances(e);
        EXPECT_NEAR(v.sigma2_hat + v.sigma2_tilde, 1.0, 1e-15);
        EXPECT_LT(mmse_variances(e * 1.01).sigma2_tilde, v.sigma2_tilde);
    }
}

TEST(EffectiveSnr, Examples) {
    EXPECT_DOUBLE_EQ(effective_snr(0.0, Snr(10.0)).linear(), 10.0);
    EXPECT_NEAR(effective_snr(1.0, Snr(10.0)).linear(), 0.0, 1e-15);
    EXPECT_NEAR(effective_snr(0.5, Snr(10.0)).linear(), 11.0 / 6.0 - 1.0, 1e-15);
    EXPECT_THROW(effective_snr(1.5, Snr(1.0)), std::domain_error);
}

TEST(EffectiveSnr, ThreeFormsAgree) {
    Lcg rng{11};
    for (int i = 0; i < 500; ++i) {
        const double t = rng.next();
        const Snr s(std::pow(10.0, -1.0 + 4.0 * rng.next()));
        const auto f = effective_snr_forms(t, s);
        EXPECT_LT(rel(f[1], f[0]), 1e-12);
        EXPECT_LT(std::abs(f[2] - f[0]), 1e-12 * std::max(1.0, f[0]));
        EXPECT_LE(effective_snr(t, s).linear(), s.linear() * (1.0 + 1e-15));
    }
}

TEST(EffectiveSnr, IncreasesWithPilotEnergy) {
    double prev = -1.0;
    for (double e = 0.0; e < 100.0; e += 0.5) {
        const double g = effective_snr(mmse_variances(e).sigma2_tilde, Snr(10.0)).linear();
        EXPECT_GT(g, prev);
        prev = g;
    }
}

TEST(Apc, MatchesHighPrecisionReference) {
    EXPECT_LT(rel(apc_effective_snr(200, Snr(10.0)).linear(), 8.7035910534296891), 1e-12);
    EXPECT_LT(rel(apc_effective_snr(400, Snr(10.0)).linear(), 9.047729713641925), 1e-12);
    EXPECT_LT(apc_effective_snr(200, Snr(10.0)).linear(), 10.0);
}

TEST(Apc, IsTheOptimisedSinglePilotScheme) {
    for (int n : {3, 10, 50, 200, 400, 2000}) {
        for (double p : {0.3, 1.0, 10.0, 100.0}) {
            const double psi = apc_pilot_fraction(n, Snr(p));
            const double peak = apc_single_pilot_snr(n, Snr(p), psi).linear();
            EXPECT_LT(rel(apc_effective_snr(n, Snr(p)).linear(), peak), 1e-9) << n << " " << p;
        }
    }
    EXPECT_NEAR(apc_pilot_fraction(200, Snr(10.0)), 0.069172242855230389, 1e-7);
    EXPECT_NEAR(apc_pilot_fraction(400, Snr(10.0)), 0.04987544674631423, 1e-7);
}

TEST(Apc, GrowsWithBlocklength) {
    double prev_g = 0.0;
    double prev_energy = 0.0;
    for (int n = 10; n <= 2000; n += 10) {
        const double g = apc_effective_snr(n, Snr(10.0)).linear();
        const double energy = apc_pilot_fraction(n, Snr(10.0)) * n * 10.0;
        EXPECT_GT(g, prev_g);
        EXPECT_GT(energy, prev_energy);  // pilot power grows with n
        prev_g = g;
        prev_energy = energy;
    }
}

TEST(Apc, RejectsSingularBlocklength) {
    EXPECT_THROW(apc_effective_snr(2, Snr(10.0)), std::domain_error);
    EXPECT_THROW(apc_effective_snr(1, Snr(10.0)), std::domain_error);
    EXPECT_THROW(apc_effective_snr(100, Snr(0.0)), std::domain_error);
    const auto im = apc_intermediates(200, Snr(10.0));
    EXPECT_GT(im.f, 0.0);
    EXPECT_GT(std::sqrt(im.f), im.d);
}

TEST(Ppc, MatchesDirectSubstitution) {
    EXPECT_LT(rel(ppc_effective_snr(300, 10, 3.0, Snr(10.0)).linear(), 9.0010001111234582), 1e-12);
    EXPECT_LT(rel(ppc_effective_snr(300, 299, 1.0, Snr(10.0)).linear(), 9.9633455514828391), 1e-12);
    EXPECT_GT(ppc_effective_snr(300, 299, 1.0, Snr(10.0)).linear(), 0.0);
}

TEST(Ppc, ZeroWhenPilotsUseTheWholeBudget) {
    EXPECT_EQ(ppc_effective_snr(300, 100, 3.0, Snr(10.0)).linear(), 0.0);
    EXPECT_EQ(ppc_effective_snr(100, 50, 2.0, Snr(5.0)).linear(), 0.0);
}

TEST(Ppc, DomainErrors) {
    EXPECT_THROW(ppc_effective_snr(300, 0, 3.0, Snr(10.0)), std::domain_error);
    EXPECT_THROW(ppc_effective_snr(300, 300, 1.0, Snr(10.0)), std::domain_error);
    EXPECT_THROW(ppc_effective_snr(300, 101, 3.0, Snr(10.0)), std::domain_error);
    EXPECT_THROW(ppc_effective_snr(300, 10, 0.5, Snr(10.0)), std::domain_error);
}

TEST(Ppc, EqualsMmseModelWithResidualDataPower) {
    for (int n : {20, 100, 300, 1000}) {
        for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
            for (double p : {0.3, 3.0, 30.0, 300.0}) {
                for (int np = 1; np <= max_pilot_count(n, kappa) && np < n; np += 3) {
                    const auto var = mmse_variances(kappa * np * p);
                    const double model = effective_snr(var.sigma2_tilde, ppc_data_power(n, np, kappa, Snr(p))).linear();
                    const double closed = ppc_effective_snr(n, np, kappa, Snr(p)).linear();
                    EXPECT_NEAR(model, closed, 1e-12 * std::max(1.0, closed));
                }
            }
        }
    }
}

TEST(PilotQuadratic, RootsSolveTheQuadratic) {
    for (int n : {4, 10, 100, 300, 1000, 2000}) {
        for (double kappa : {1.0, 1.5, 2.0, 4.0, 8.0, 32.0}) {
            for (double p : {0.1, 1.0, 10.0, 316.0}) {
                const auto q = pilot_quadratic(n, kappa, Snr(p));
                EXPECT_LE(std::abs(q.evaluate(q.roots.first)), 1e-8 * std::abs(q.c));
                if (std::isfinite(q.roots.second)) {
                    EXPECT_LE(std::abs(q.evaluate(q.roots.second)), 1e-8 * std::abs(q.c) * 10.0)
                        << n << " " << kappa << " " << p;
                }
            }
        }
    }
}

TEST(PilotQuadratic, IsTheDerivativeNumerator) {
    // d gamma / d n_p has the sign of A n_p^2 + B n_p + C.
    for (int n : {50, 300, 1000}) {
        for (double kappa : {1.0, 2.0, 8.0}) {
            const Snr p(10.0);
            const auto q = pilot_quadratic(n, kappa, p);
            const double top = n / kappa;
            for (double x = 1.5; x < top - 1.0; x += top / 37.0) {
                const double h = 1e-4;
                const double d = ppc_effective_snr_real(n, x + h, kappa, p) - ppc_effective_snr_real(n, x - h, kappa, p);
                if (std::abs(q.evaluate(x)) > 1e-6 * std::abs(q.c)) {
                    EXPECT_EQ(d > 0, q.evaluate(x) > 0) << n << " " << x;
                }
            }
        }
    }
}

TEST(PilotQuadratic, SingleStationaryPointInsideFeasibleSet) {
    for (int n : {10, 100, 300, 1000, 2000}) {
        for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
            for (double db : {-5.0, 0.0, 10.0, 20.0, 25.0}) {
                const Snr p = Snr::from_db(db);
                const double top = n / kappa;
                int changes = 0;
                double prev = 0.0;
                const int steps = 4000;
                for (int i = 1; i < steps; ++i) {
                    const double x = top * i / steps;
                    if (x < 1.0 || x >= n) continue;
                    const double h = top * 1e-6;
                    if (x + h > top || x - h < 1.0) continue;
                    const double d =
                        ppc_effective_snr_real(n, x + h, kappa, p) - ppc_effective_snr_real(n, x - h, kappa, p);
                    if (prev != 0.0 && (d > 0) != (prev > 0)) ++changes;
                    prev = d;
                }
                EXPECT_LE(changes, 1) << n << " " << kappa << " " << db;
            }
        }
    }
}

TEST(OptimalPilots, MatchesExhaustiveScan) {
    for (int n : {4, 5, 7, 10, 33, 100, 300, 555, 1000, 2000}) {
        for (double kappa : {1.0, 1.3, 2.0, 3.0, 4.0, 8.0, 16.0}) {
            if (max_pilot_count(n, kappa) < 1) continue;
            for (double db : {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) {
                const Snr p = Snr::from_db(db);
                EXPECT_EQ(optimal_pilot_count(n, kappa, p), scan_optimum(n, kappa, p))
                    << "n=" << n << " kappa=" << kappa << " dB=" << db;
            }
        }
    }
}

TEST(OptimalPilots, LocalOptimality) {
    for (int n : {100, 300, 1000}) {
        for (double kappa : {2.0, 4.0, 8.0}) {
            const Snr p(10.0);
            const int np = optimal_pilot_count(n, kappa, p);
            const double g = ppc_effective_snr_real(n, np, kappa, p);
            if (np > 1) {
                EXPECT_GE(g, ppc_effective_snr_real(n, np - 1, kappa, p));
            }
            if (np < max_pilot_count(n, kappa)) {
                EXPECT_GE(g, ppc_effective_snr_real(n, np + 1, kappa, p));
            }
        }
    }
}

TEST(OptimalPilots, Trends) {
    const Snr p = Snr::from_db(10.0);
    EXPECT_GT(optimal_pilot_count(300, 2.0, p), optimal_pilot_count(300, 8.0, p));
    EXPECT_EQ(optimal_pilot_count(300, 150.0, p), 1);
    EXPECT_EQ(optimal_pilot_count(300, 300.0, p), 1);
    EXPECT_THROW(optimal_pilot_count(300, 301.0, p), std::domain_error);
    EXPECT_THROW(optimal_pilot_count(3, 1.0, p), std::domain_error);
    EXPECT_THROW(optimal_pilot_count(300, 0.9, p), std::domain_error);
}

TEST(EstimateLink, PolicyDispatch) {
    const Snr p(10.0);
    const auto pc = estimate_link(PilotPolicy::perfect_csi(), 300, 0, p);
    EXPECT_EQ(pc.gamma_eff.linear(), 10.0);
    EXPECT_EQ(pc.sigma2_tilde, 0.0);

    const auto pp = estimate_link(PilotPolicy::ppc(3.0), 300, 10, p);
    EXPECT_NEAR(pp.gamma_eff.linear(), ppc_effective_snr(300, 10, 3.0, p).linear(), 1e-12);
    EXPECT_NEAR(pp.sigma2_hat + pp.sigma2_tilde, 1.0, 1e-15);

    const auto ap = estimate_link(PilotPolicy::apc(), 300, 1, p);
    EXPECT_NEAR(ap.gamma_eff.linear(), apc_effective_snr(300, p).linear(), 1e-12);
    EXPECT_THROW(estimate_link(PilotPolicy::apc(), 300, 2, p), std::domain_error);
    EXPECT_THROW(PilotPolicy::ppc(0.5).validate(), std::domain_error);
}

TEST(EstimateLink, ApcAndPpcStayClose) {
    for (double db = -5.0; db <= 25.0; db += 1.0) {
        const Snr p = Snr::from_db(db);
        const double a = apc_effective_snr(300, p).linear();
        const double b = ppc_effective_snr(300, optimal_pilot_count(300, 3.0, p), 3.0, p).linear();
        EXPECT_LT(std::abs(std::log10(a / b)), 0.5) << db;
    }
}
