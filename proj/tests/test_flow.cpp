#include "doctest.h"
#include "gss/flow.hpp"
#include "gss/masscurve.hpp"
#include "helpers.hpp"
#include "oracles/closed_forms.hpp"
#include <cmath>

using namespace gss;
using testutil::cubic_model;
using testutil::gaussian_bump;
using testutil::sampled_soliton;

TEST_SUITE("flow") {

TEST_CASE("lagrange multiplier") {
    SUBCASE("closed form for the 3D Gaussian under the cubic model") {
        ProblemModel m = cubic_model(3);
        RadialGrid g(3, 20.0, 1999);
        GridFunction u = gaussian_bump(g, 1.0, std::sqrt(2.0));   // e^{-r^2/2}
        // [int |grad u|^2 - int u^4] / int u^2 = 3/2 - 2^{-3/2}
        double expect = 1.5 - std::pow(2.0, -1.5);
        CHECK(std::fabs(lagrange_multiplier(m, g, u) - expect) <= 1e-4);
    }

    SUBCASE("recovers the multiplier of a solved profile") {
        ProblemModel m = cubic_model(1);
        RadialGrid g(1, 18.0, 1499);
        Profile p = newton_solve(m, g, -1.0, sampled_soliton(g, -1.0), 1e-10, 40);
        CHECK(std::fabs(lagrange_multiplier(m, g, p.u) + 1.0) <= 1e-9);
    }

    SUBCASE("cubic homogeneity in the amplitude") {
        ProblemModel m = cubic_model(1);
        RadialGrid g(1, 18.0, 1499);
        GridFunction u = gaussian_bump(g, 0.9, 1.7);
        GridFunction su(g);
        for (int i = 0; i <= g.points; ++i) su[i] = 2.0 * u[i];
        // lambda_hat(s u) = R(u) - s^2 P(u) with R the linear Rayleigh part
        double q = 2.0 * mass(g, u);
        double P4 = 0.0;
        for (int i = 0; i <= g.points; ++i) P4 += g.w[i] * std::pow(u[i], 4.0);
        double lin = lagrange_multiplier(m, g, u) + P4 / q;   // R(u)
        double expect = lin - 4.0 * P4 / q;
        CHECK(std::fabs(lagrange_multiplier(m, g, su) - expect) <= 1e-12 * std::fabs(expect));
    }
}

TEST_CASE("normalized flow finds the cubic ground state at mass 2") {
    ProblemModel m = cubic_model(1);
    RadialGrid g(1, 18.0, 1499);
    FlowResult fr = gradient_flow(m, g, 2.0, gaussian_bump(g, 1.0, 2.0), 0.1, 1e-8, 50000);
    REQUIRE(fr.converged);
    CHECK(fr.iterations > 0);

    // mass pinned by the per-step renormalization
    CHECK(std::fabs(mass(g, fr.profile.u) - 2.0) <= 1e-12 * 2.0);

    // multiplier and profile against the exact-mass Newton solution
    CHECK(std::fabs(fr.profile.lambda + 1.0) <= 1e-3);
    MassCurveControls mctl;
    Profile ref = resolve_at_mass(m, g, sampled_soliton(g, -1.0), -1.0, 2.0, mctl);
    GridFunction diff(g);
    for (int i = 0; i <= g.points; ++i) diff[i] = fr.profile.u[i] - ref.u[i];
    CHECK(norm_w(g, diff) <= 1e-6);
    CHECK(std::fabs(fr.profile.lambda - ref.lambda) <= 1e-6);

    // descent: the energy history never rises beyond roundoff
    REQUIRE(fr.energy_history.size() >= 2);
    for (std::size_t k = 1; k < fr.energy_history.size(); ++k)
        CHECK(fr.energy_history[k] <=
              fr.energy_history[k - 1] + 1e-10 * (1.0 + std::fabs(fr.energy_history[k - 1])));
    CHECK(std::fabs(fr.m_estimate - fr.energy_history.back()) <= 1e-12);

    SUBCASE("an exact critical point is a fixed point") {
        Profile p = newton_solve(m, g, -1.0, sampled_soliton(g, -1.0), 1e-11, 40);
        double c0 = mass(g, p.u);
        FlowResult still = gradient_flow(m, g, c0, p.u, 0.1, 1e-8, 100);
        CHECK(still.converged);
        CHECK(still.iterations <= 2);
        GridFunction d2(g);
        for (int i = 0; i <= g.points; ++i) d2[i] = still.profile.u[i] - p.u[i];
        CHECK(norm_w(g, d2) <= 1e-9);
    }

    SUBCASE("step starvation reports NotConverged status") {
        FlowResult bad = gradient_flow(m, g, 2.0, gaussian_bump(g, 1.0, 2.0), 0.1, 1e-14, 3);
        CHECK_FALSE(bad.converged);
        CHECK(bad.iterations == 3);
    }
}

TEST_CASE("multi-start flow is deterministic and picks the least energy") {
    ProblemModel m = cubic_model(1);
    RadialGrid g(1, 18.0, 1499);
    std::vector<double> widths{0.5, 1.0, 2.0};

    auto runs = flow_multistart(m, g, 2.0, widths, 0.1, 1e-8, 50000);
    REQUIRE(runs.size() == widths.size());
    int b = best_flow(runs);
    REQUIRE(b >= 0);
    REQUIRE(runs[b].converged);
    for (const auto& r : runs)
        if (r.converged) CHECK(runs[b].m_estimate <= r.m_estimate + 1e-12);

    // all basins lead to the single ground state here
    for (const auto& r : runs) {
        REQUIRE(r.converged);
        CHECK(std::fabs(r.profile.lambda - runs[b].profile.lambda) <= 1e-6);
    }

    SUBCASE("byte-stable across repeat runs and thread counts") {
        auto again = flow_multistart(m, g, 2.0, widths, 0.1, 1e-8, 50000);
        auto threaded = flow_multistart(m, g, 2.0, widths, 0.1, 1e-8, 50000, 2);
        REQUIRE(again.size() == runs.size());
        REQUIRE(threaded.size() == runs.size());
        for (std::size_t k = 0; k < runs.size(); ++k) {
            CHECK(again[k].m_estimate == runs[k].m_estimate);
            CHECK(threaded[k].m_estimate == runs[k].m_estimate);
            CHECK(again[k].profile.lambda == runs[k].profile.lambda);
            CHECK(threaded[k].profile.lambda == runs[k].profile.lambda);
        }
    }
}

TEST_CASE("flow respects the double-power saturation window") {
    ProblemModel m = testutil::double_power_model();
    RadialGrid g(1, 60.0, 2999);
    FlowResult fr = gradient_flow(m, g, 0.5, gaussian_bump(g, 0.4, 5.0), 0.2, 1e-8, 50000);
    REQUIRE(fr.converged);
    CHECK(fr.profile.lambda > -3.0 / 16.0);
    CHECK(fr.profile.lambda < 0.0);
    CHECK(std::fabs(mass(g, fr.profile.u) - 0.5) <= 1e-12);
}

} // TEST_SUITE
