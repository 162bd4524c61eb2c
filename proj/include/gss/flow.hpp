#pragma once
#include "gss/solver.hpp"
#include <vector>

namespace gss {

struct FlowResult {
    Profile profile;           // with the estimated multiplier
    double m_estimate = 0.0;   // E at the final iterate
    int iterations = 0;
    bool converged = false;    // NotConverged status when false
    std::vector<double> residual_history;
    std::vector<double> energy_history;
};

// lambda_hat = [<Au,u> + <Vu,u> - <f(r,u),u>] / <u,u>.
double lagrange_multiplier(const ProblemModel& m, const RadialGrid& g, const GridFunction& u);

// Semi-implicit normalized gradient flow: (I + dt (A+V)) u* = u + dt f(r,u),
// renormalize to mass c each step; fixed points are the constrained critical
// points. Stops when |Eq_{lambda_hat}(u)|_inf <= tol.
FlowResult gradient_flow(const ProblemModel& m, const RadialGrid& g, double c,
                         const GridFunction& u0, double dt, double tol, int max_steps);

// Deterministic multi-start (Gaussian seeds of the given widths, mass c each);
// returns all results, best = least final energy among converged runs.
std::vector<FlowResult> flow_multistart(const ProblemModel& m, const RadialGrid& g, double c,
                                        const std::vector<double>& widths, double dt, double tol,
                                        int max_steps, int threads = 1);
int best_flow(const std::vector<FlowResult>& runs);

} // namespace gss
