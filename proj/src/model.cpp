#include "gss/model.hpp"
#include "gss/spectral.hpp"
#include <cmath>

namespace gss {

double NonlinearTerm::a(double r, int node) const {
    switch (profile) {
        case CoefProfile::One: return 1.0;
        case CoefProfile::Poly: return std::pow(1.0 + r * r, 0.5 * theta);
        case CoefProfile::Tabulated: return a_table[node];
    }
    return 1.0;
}

double NonlinearTerm::ra_prime(double r, int node) const {
    switch (profile) {
        case CoefProfile::One: return 0.0;
        case CoefProfile::Poly: return theta * r * r * std::pow(1.0 + r * r, 0.5 * theta - 1.0);
        case CoefProfile::Tabulated: return ra_prime_table[node];
    }
    return 0.0;
}

double Potential::V(double r, int node) const {
    switch (kind) {
        case PotentialKind::Zero: return 0.0;
        case PotentialKind::BoundedWell: {
            double q = r / width;
            return -depth * std::exp(-q * q);
        }
        case PotentialKind::Harmonic: return r * r;
        case PotentialKind::Tabulated: return v_table[node];
    }
    return 0.0;
}

double Potential::rV_prime(double r, int node) const {
    switch (kind) {
        case PotentialKind::Zero: return 0.0;
        case PotentialKind::BoundedWell: {
            double q = r / width;
            return 2.0 * depth * r * r / (width * width) * std::exp(-q * q);
        }
        case PotentialKind::Harmonic: return 2.0 * r * r;
        case PotentialKind::Tabulated: return rv_prime_table[node];
    }
    return 0.0;
}

double ProblemModel::f(double r, double t, int node) const {
    if (t == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& tm : terms)
        s += tm.coefficient * tm.a(r, node) * std::pow(std::fabs(t), tm.power - 2.0) * t;
    return s;
}

double ProblemModel::f_t(double r, double t, int node) const {
    if (t == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& tm : terms)
        s += tm.coefficient * tm.a(r, node) * (tm.power - 1.0) *
             std::pow(std::fabs(t), tm.power - 2.0);
    return s;
}

double ProblemModel::F(double r, double t, int node) const {
    if (t == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& tm : terms)
        s += tm.coefficient * tm.a(r, node) * std::pow(std::fabs(t), tm.power) / tm.power;
    return s;
}

double ProblemModel::rF_radial(double r, double t, int node) const {
    if (t == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& tm : terms) {
        double rap = tm.ra_prime(r, node);
        if (rap != 0.0) s += tm.coefficient * rap * std::pow(std::fabs(t), tm.power) / tm.power;
    }
    return s;
}

double f_eval(const ProblemModel& m, double r, double t) { return m.f(r, t); }
double f_t_eval(const ProblemModel& m, double r, double t) { return m.f_t(r, t); }
double F_eval(const ProblemModel& m, double r, double t) { return m.F(r, t); }

double mass(const RadialGrid& g, const GridFunction& u) {
    return 0.5 * inner(g, u, u);
}

std::vector<double> potential_on_grid(const ProblemModel& m, const RadialGrid& g) {
    std::vector<double> v(g.points + 1);
    for (int i = 0; i <= g.points; ++i) v[i] = m.potential.V(g.r[i], i);
    return v;
}

double energy(const ProblemModel& m, const RadialGrid& g, const SymmetricTridiagonal& A,
              const GridFunction& u) {
    GridFunction Au = A.apply(u);
    double grad2 = inner(g, Au, u);
    double pot = 0.0, nl = 0.0;
    for (int i = 0; i <= g.points; ++i) {
        pot += g.w[i] * m.potential.V(g.r[i], i) * u[i] * u[i];
        nl += g.w[i] * m.F(g.r[i], u[i], i);
    }
    return 0.5 * grad2 + 0.5 * pot - nl;
}

double energy(const ProblemModel& m, const RadialGrid& g, const GridFunction& u) {
    return energy(m, g, laplacian_stencil(g), u);
}

double lambda0(const ProblemModel& m, const RadialGrid& g) {
    SymmetricTridiagonal L = laplacian_stencil(g);
    L.add_diag(potential_on_grid(m, g));
    return eigs_smallest(L, 1)[0];
}

double pohozaev_residual(const ProblemModel& m, const RadialGrid& g,
                         const GridFunction& u, double lambda) {
    const int n = g.dim;
    // u' by fourth-order central differences, even at the origin, zero
    // beyond the Dirichlet wall; keeps the identity's quadrature error at
    // O(h^4) so the residual of converged solutions reflects only their
    // own O(h^2) distance from the continuum profile.
    auto at = [&](int j) -> double {
        j = std::abs(j);
        return j <= g.points ? u[j] : 0.0;
    };
    double grad2 = 0.0;
    for (int i = 0; i <= g.points; ++i) {
        double du = (-at(i + 2) + 8 * at(i + 1) - 8 * at(i - 1) + at(i - 2)) / (12 * g.h);
        grad2 += g.w[i] * du * du;
    }
    double vU2 = 0.0, rvU2 = 0.0, u2 = 0.0, Fint = 0.0, rFint = 0.0;
    for (int i = 0; i <= g.points; ++i) {
        double wi = g.w[i], ui = u[i], ri = g.r[i];
        vU2 += wi * m.potential.V(ri, i) * ui * ui;
        rvU2 += wi * m.potential.rV_prime(ri, i) * ui * ui;
        u2 += wi * ui * ui;
        Fint += wi * m.F(ri, ui, i);
        rFint += wi * m.rF_radial(ri, ui, i);
    }
    double lhs = (n - 2) * grad2 + n * vU2 + rvU2;
    double rhs = lambda * n * u2 + 2.0 * n * Fint + 2.0 * rFint;
    return (lhs - rhs) / std::max(1.0, grad2);
}

} // namespace gss
