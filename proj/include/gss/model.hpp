#pragma once
#include "gss/grid.hpp"
#include "gss/tridiag.hpp"
#include <vector>
#include <string>
#include <optional>

namespace gss {

// One power term of the nonlinearity: coef * a(r) * |t|^{p-2} t.
// ConstantPower has a(r) = 1; RadialCoefficientPower and WeightedPower carry a
// radial coefficient, either the closed form (1+r^2)^{theta/2} or a table.
// All derivatives the functionals need are exact:
//   f   = coef a(r) |t|^{p-2} t
//   f_t = coef a(r) (p-1) |t|^{p-2}
//   F   = coef a(r) |t|^p / p          (F_t = f)
//   x.grad_x F = coef r a'(r) |t|^p / p
enum class TermKind { ConstantPower, RadialCoefficientPower, WeightedPower };
enum class CoefProfile { One, Poly, Tabulated };   // Poly: (1+r^2)^{theta/2}

struct NonlinearTerm {
    TermKind kind = TermKind::ConstantPower;
    double coefficient = 1.0;
    double power = 4.0;
    CoefProfile profile = CoefProfile::One;
    double theta = 0.0;
    std::vector<double> a_table;        // a(r_i) when Tabulated
    std::vector<double> ra_prime_table; // r a'(r_i), centered differences, O(h^2)

    double a(double r, int node) const;
    double ra_prime(double r, int node) const;
};

enum class PotentialKind { Zero, BoundedWell, Harmonic, Tabulated };

struct Potential {
    PotentialKind kind = PotentialKind::Zero;
    double depth = 0.0;   // V0 in -V0 exp(-(r/sigma)^2)
    double width = 1.0;   // sigma
    std::vector<double> v_table;
    std::vector<double> rv_prime_table;

    double V(double r, int node = -1) const;
    double rV_prime(double r, int node = -1) const;  // r V'(r), for the virial identity
};

struct ProblemModel {
    int dim = 1;
    std::vector<NonlinearTerm> terms;
    Potential potential;

    double f(double r, double t, int node = -1) const;
    double f_t(double r, double t, int node = -1) const;
    double F(double r, double t, int node = -1) const;
    double rF_radial(double r, double t, int node = -1) const; // x.grad_x F

    bool single_pure_power() const {
        return terms.size() == 1 && terms[0].profile == CoefProfile::One;
    }
};

double f_eval(const ProblemModel& m, double r, double t);
double f_t_eval(const ProblemModel& m, double r, double t);
double F_eval(const ProblemModel& m, double r, double t);

double mass(const RadialGrid& g, const GridFunction& u);
double energy(const ProblemModel& m, const RadialGrid& g, const GridFunction& u);
double energy(const ProblemModel& m, const RadialGrid& g, const SymmetricTridiagonal& A,
              const GridFunction& u);

// Ground eigenvalue of -Laplacian + V on the truncated radial grid. Upper
// approximation of the continuum infimum; converges as R grows.
double lambda0(const ProblemModel& m, const RadialGrid& g);

// Signed residual of the virial (Pohozaev) identity
//   (n-2) |grad u|^2 + n int V u^2 + int rV' u^2
//     = lambda n int u^2 + 2n int F + 2 int x.grad_x F,
// normalized by max(1, |grad u|^2). Near zero only at discrete solutions.
// The gradient integral uses a fourth-order difference for u' (not the
// stencil quadratic form, whose O(h^2) bias would dominate the residual).
double pohozaev_residual(const ProblemModel& m, const RadialGrid& g,
                         const GridFunction& u, double lambda);

std::vector<double> potential_on_grid(const ProblemModel& m, const RadialGrid& g);

} // namespace gss
