#pragma once
#include "gss/solver.hpp"
#include "gss/spectral.hpp"
#include <string>
#include <vector>

namespace gss {

struct BranchPoint {
    double lambda = 0.0;
    double q = 0.0;        // mass
    double e = 0.0;        // energy
    double slope = 0.0;    // <L^{-1}u, u> = dQ/dlambda
    Profile profile;
    SpectrumReport spectrum;
};

struct FoldRecord {
    double lambda_star = 0.0;
    double q_star = 0.0;
    int left_index = -1;        // bracketing point indices [left, left+1]
    char extremum = '?';        // 'M' mass maximum, 'm' mass minimum
    bool one_sided = false;     // sign change at a branch end, not refinable
    double reciprocal_quotient = 0.0;  // |du/dQ| proxy near the fold; blows up
};

struct StepControls {
    double ds_init = 0.05;
    double ds_min = 1e-7;
    double ds_max = 0.5;
    int max_steps = 2000;
    double tol = 1e-10;
    int max_iter = 40;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<FoldRecord> folds;
    std::string end_reason;
};

struct IdentityReport {
    double worst_slope_fd = 0.0;      // |slope - centered FD of Q| at the finer h
    double slope_fd_ratio = 0.0;      // median coarse/fine mismatch ratio (~100 for order 2)
    std::vector<double> ratios;       // per-point coarse/fine ratios
    double worst_adjoint = 0.0;       // |L(adjoint) - u| relative
    double worst_energy_identity = 0.0;  // |E'(lambda) - lambda Q'(lambda)|
    int points_checked = 0;
};

// Pseudo-arclength predictor (secant tangent in (lambda,u) with the weighted
// metric) + bordered Newton corrector. Adaptive ds: halve on corrector failure,
// grow 1.3x after 4 easy successes. Terminates at the range ends, after
// max_steps, when |u| -> 0 (linear limit) or when a certificate fails.
Branch continue_branch(const ProblemModel& m, const RadialGrid& g, const Profile& seed,
                       double lambda_a, double lambda_b, const StepControls& ctl);

// Full diagnostics for a converged profile (mass, energy, spectrum, cert).
BranchPoint make_branch_point(const ProblemModel& m, const RadialGrid& g, Profile p);

// For each interior point re-solve at lambda +- h (h = 3e-2, 3e-3) and check
// (i) slope vs centered FD of Q (order-2 convergence), (ii) the adjoint
// equation L(L^{-1}u) = u, (iii) E'(lambda) = lambda Q'(lambda).
IdentityReport branch_identities(const ProblemModel& m, const RadialGrid& g, const Branch& b,
                                 int max_points = 12);

// Brackets every sign change of slope along the branch and refines lambda* by
// bisection on re-solved points until |slope| < 1e-8 * scale. Also records the
// blow-up of the c-parametrization derivative near the fold.
std::vector<FoldRecord> detect_folds(const ProblemModel& m, const RadialGrid& g, Branch& b,
                                     const StepControls& ctl);

void write_branch_csv(const std::string& path, const Branch& b);
void write_branch_points(const std::string& dir, const RadialGrid& g, const Branch& b);
Branch load_branch_points(const std::string& dir, const ProblemModel& m, const RadialGrid& g);

} // namespace gss
