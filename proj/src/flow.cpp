#include "gss/flow.hpp"
#include "gss/errors.hpp"
#include <cmath>
#include <thread>

namespace gss {

double lagrange_multiplier(const ProblemModel& m, const RadialGrid& g, const GridFunction& u) {
    double uu = inner(g, u, u);
    if (uu < 1e-300) throw ZeroState();
    SymmetricTridiagonal A = laplacian_stencil(g);
    GridFunction Au = A.apply(u);
    double num = inner(g, Au, u);
    for (int i = 0; i <= g.points; ++i)
        num += g.w[i] * (m.potential.V(g.r[i], i) * u[i] - m.f(g.r[i], u[i], i)) * u[i];
    return num / uu;
}

FlowResult gradient_flow(const ProblemModel& m, const RadialGrid& g, double c,
                         const GridFunction& u0, double dt, double tol, int max_steps) {
    FlowResult out;
    SymmetricTridiagonal A = laplacian_stencil(g);
    auto V = potential_on_grid(m, g);

    // The linear part is treated implicitly with the current multiplier folded
    // in: B_n = I + dt (A + V - lambda_n). Without the -lambda_n shift the
    // renormalized fixed point solves a dt-perturbed equation (the nonlinear
    // coefficient picks up a factor s with s - 1 ~ dt lambda), so the residual
    // would stall at O(dt) instead of reaching tol. With the shift, an exact
    // constrained critical point is an exact fixed point of the map.
    // Clamp the shift so B_n stays positive definite during wild transients.
    double lam_cap = lambda0(m, g) + 0.5 / dt;

    GridFunction u = u0;
    {   // start on the constraint sphere
        double q = mass(g, u);
        if (q <= 0) throw ZeroState();
        double s = std::sqrt(c / q);
        for (int i = 0; i <= g.points; ++i) u[i] *= s;
    }

    double best_res = 1e300;
    GridFunction best_u = u;
    int it = 0;
    for (; it < max_steps; ++it) {
        double lam = lagrange_multiplier(m, g, u);
        GridFunction res = residual(m, g, A, lam, u);
        double rn = norm_inf(res);
        out.residual_history.push_back(rn);
        out.energy_history.push_back(energy(m, g, A, u));
        if (!std::isfinite(rn))
            throw NaNDetected("gradient flow produced NaN; halve dt");
        if (rn < best_res) {
            best_res = rn;
            best_u = u;
        }
        if (rn <= tol) {
            out.converged = true;
            break;
        }
        double shift = std::min(lam, lam_cap);
        SymmetricTridiagonal B = A;
        for (int i = 0; i <= g.points; ++i) B.diag[i] = 1.0 + dt * (A.diag[i] + V[i] - shift);
        for (int i = 0; i < g.points; ++i) B.offdiag[i] = dt * A.offdiag[i];
        TriFactor Bfac = factor(B);
        GridFunction rhs(g);
        for (int i = 0; i <= g.points; ++i)
            rhs[i] = u[i] + dt * m.f(g.r[i], u[i], i);
        u = Bfac.solve(rhs);
        double q = mass(g, u);
        if (!(q > 0) || !std::isfinite(q))
            throw NaNDetected("gradient flow lost the constraint; halve dt");
        double s = std::sqrt(c / q);
        for (int i = 0; i <= g.points; ++i) u[i] *= s;
    }

    if (!out.converged) u = best_u;
    out.iterations = it;
    Profile p;
    p.u = std::move(u);
    p.lambda = lagrange_multiplier(m, g, p.u);
    p.residual_norm = out.converged ? out.residual_history.back() : best_res;
    p.converged = out.converged;
    check_profile(m, g, p);
    out.profile = std::move(p);
    out.m_estimate = energy(m, g, A, out.profile.u);
    return out;
}

std::vector<FlowResult> flow_multistart(const ProblemModel& m, const RadialGrid& g, double c,
                                        const std::vector<double>& widths, double dt, double tol,
                                        int max_steps, int threads) {
    std::vector<FlowResult> runs(widths.size());
    auto one = [&](std::size_t k) {
        GridFunction u0(g);
        double wdt = widths[k];
        for (int i = 0; i <= g.points; ++i) {
            double x = g.r[i] / wdt;
            u0[i] = std::exp(-x * x);
        }
        try {
            runs[k] = gradient_flow(m, g, c, u0, dt, tol, max_steps);
        } catch (const std::exception&) {
            runs[k] = FlowResult{};   // keep slot; converged stays false
        }
    };
    if (threads > 1) {
        std::vector<std::thread> pool;
        std::size_t nth = std::min<std::size_t>(threads, widths.size());
        for (std::size_t t = 0; t < nth; ++t)
            pool.emplace_back([&, t]() {
                for (std::size_t i = t; i < widths.size(); i += nth) one(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < widths.size(); ++i) one(i);
    }
    return runs;
}

int best_flow(const std::vector<FlowResult>& runs) {
    int best = -1;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (!runs[k].converged) continue;
        if (best < 0 || runs[k].m_estimate < runs[best].m_estimate)
            best = static_cast<int>(k);
    }
    return best;
}

} // namespace gss
