#pragma once
#include "gss/grid.hpp"
#include "gss/model.hpp"
#include "gss/tridiag.hpp"
#include <string>
#include <vector>

namespace gss {

struct Certificate {
    bool positive = false;
    bool radially_decreasing = false;
    int morse_index = -1;
    double nondegeneracy_margin = 0.0;
    double decay_rate_fit = 0.0;
    bool decay_window_ok = false;   // false: tail below quadrature floor at 0.8R, fit unreliable
    double pohozaev = 0.0;

    bool a1_pass(double margin_floor) const {
        return positive && radially_decreasing && morse_index == 1 &&
               nondegeneracy_margin > margin_floor;
    }
};

struct Profile {
    GridFunction u;
    double lambda = 0.0;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> newton_history;  // residual sup-norms per iterate
    Certificate certificate;
};

// Pointwise Eq_lambda(u) = Au + Vu - lambda u - f(r,u).
GridFunction residual(const ProblemModel& m, const RadialGrid& g, double lambda,
                      const GridFunction& u);
GridFunction residual(const ProblemModel& m, const RadialGrid& g,
                      const SymmetricTridiagonal& A, double lambda, const GridFunction& u);

// L_u = A + diag(V - lambda - f_t(r,u)).
SymmetricTridiagonal linearize(const ProblemModel& m, const RadialGrid& g, double lambda,
                               const GridFunction& u);

GridFunction solve_tridiagonal(const SymmetricTridiagonal& L, const GridFunction& rhs);

// Damped Newton for Eq_lambda(u)=0. Guards against collapse onto the trivial
// zero branch (|u|_inf must stay above 1e-6 of the seed's).
Profile newton_solve(const ProblemModel& m, const RadialGrid& g, double lambda,
                     const GridFunction& u0, double tol = 1e-10, int max_iter = 40);

// Seed from the exact pure-power scaling u_lam(x) = |lam|^{1/(p-2)} u_{-1}(sqrt|lam| x),
// resampling a reference profile computed at lambda = -1.
GridFunction scaling_guess(const ProblemModel& m, const RadialGrid& g, double lambda,
                           const Profile& reference);

// Least-squares slope of -log u over r in [0.5R, 0.8R].
double decay_rate(const GridFunction& u, const RadialGrid& g);

// Fill the certificate: positivity and monotone decrease away from the
// Dirichlet boundary layer (last 2% of nodes), Morse index and margin from the
// linearization, tail decay fit, virial residual.
void check_profile(const ProblemModel& m, const RadialGrid& g, Profile& p);

double margin_floor(const SymmetricTridiagonal& L);  // 1e-6 * |L|

// Solution files: '# dim=<n> lambda=<l> R=<R> M=<M>' header then r<TAB>u rows,
// 17 significant digits (decimal round trip is bit exact).
void save_solution(const std::string& path, const RadialGrid& g, const Profile& p);
Profile load_solution(const std::string& path, const RadialGrid& g);

// Interpolate u (uniform nodes, even at 0, zero beyond R) at arbitrary radius.
double sample_profile(const RadialGrid& g, const GridFunction& u, double r);

} // namespace gss
