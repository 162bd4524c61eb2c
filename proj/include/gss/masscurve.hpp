#pragma once
#include "gss/branch.hpp"
#include <string>
#include <vector>

namespace gss {

struct MassCurveSample {
    double c = 0.0;
    double lambda = 0.0;
    double m = 0.0;               // selected minimal energy
    int source_branch = -1;
    int source_point = -1;        // bracketing index on the source branch
    int multiplicity = 1;         // energy ties within 1e-9 |E| (distinct multipliers)
    std::string flags = "ok";     // ok | bad_value_near | bad_mass_left | bad_mass_right
    Profile profile;
};

struct BadValue {
    double c_tilde = 0.0;   // fold mass Q*
    double lambda_star = 0.0;
};

struct BadMass {
    double c = 0.0;
    double lambda_left = 0.0;
    double lambda_right = 0.0;
    double energy_tie_gap = 0.0;
    double m_at = 0.0;
};

struct DerivRow {
    double c = 0.0;
    double mprime_fd = 0.0;
    double lambda_c = 0.0;
    double msecond_fd = 0.0;
    double lamprime_fd = 0.0;
};

struct MassCurve {
    std::vector<MassCurveSample> samples;   // sorted by c
    std::vector<BadValue> bad_values;
    std::vector<BadMass> bad_masses;
    std::vector<DerivRow> derivative_table;
};

struct MassCurveControls {
    double tol = 1e-10;
    int max_iter = 40;
    double dc_fd = 1e-3;       // step for the derivative table
    int threads = 1;
};

struct DerivReport {
    double worst_mprime_vs_lambda = 0.0;
    double worst_msecond_vs_lamprime = 0.0;
    double max_msecond = -1e300;            // concavity: must stay < 0
    bool lambda_monotone_between_bad = true;
    bool lambda_drops_at_bad = true;
    bool m_decreasing = true;
    // per bad mass: |(lambda_left - lambda_right) - (m'_- - m'_+)|
    std::vector<double> onesided_gap_mismatch;
};

// Newton on (u,lambda) for { Eq_lambda(u)=0, Q(u)=c }, block elimination with
// two tridiagonal solves; the Schur complement is -dQ/dlambda, so exact folds
// must not be re-solved (keep the c grid off fold masses).
Profile resolve_at_mass(const ProblemModel& m, const RadialGrid& g, const GridFunction& seed_u,
                        double seed_lambda, double c, const MassCurveControls& ctl);

// For each c: all branch candidates at mass c (exact-mass re-solve per
// bracketing interval), minimal-E selection, tie recording, bad-mass scan
// (multiplier jump + confirmed energy tie between segments).
MassCurve build_mass_curve(const ProblemModel& m, const RadialGrid& g,
                           const std::vector<Branch>& branches, const std::vector<double>& c_grid,
                           const MassCurveControls& ctl);

// Centered differences of m and lambda at each regular sample, one-sided
// derivative gaps at each bad mass.
DerivReport derivative_checks(const ProblemModel& m, const RadialGrid& g, MassCurve& mc,
                              const MassCurveControls& ctl);

struct NehariResult {
    double t = 0.0;
    GridFunction on_manifold;
};

// Positive root of g(t) = t <(A+V-lambda)u, u> - <f(r,tu), u>, i.e. the unique
// scaling putting t u on the Nehari manifold; verified to be a maximum of
// t -> E(tu) - lambda Q(tu) via g'(t) < 0.
NehariResult nehari_project(const ProblemModel& m, const RadialGrid& g, double lambda,
                            const GridFunction& u);

// T(c)u = c^alpha u(c^beta .), alpha = 2/((pbar-2)n-4), beta = (pbar-2)/((pbar-2)n-4);
// maps mass c to mass 1 exactly in the continuum (2 alpha - n beta = -1).
GridFunction rescale_to_unit_mass(const GridFunction& u, double c, double pbar, int n);

void write_masscurve_csv(const std::string& path, const MassCurve& mc);

} // namespace gss
