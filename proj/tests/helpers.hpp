#pragma once
#include "gss/model.hpp"
#include "gss/solver.hpp"
#include <cmath>

// Model builders and seed profiles shared across the unit suites.
namespace testutil {

inline gss::ProblemModel cubic_model(int n) {
    gss::ProblemModel m;
    m.dim = n;
    gss::NonlinearTerm t;
    t.kind = gss::TermKind::ConstantPower;
    t.coefficient = 1.0;
    t.power = 4.0;
    m.terms.push_back(t);
    return m;
}

// Focusing-defocusing pair u^3 - u^5 in 1d; solutions exist for
// lambda in (-3/16, 0).
inline gss::ProblemModel double_power_model() {
    gss::ProblemModel m;
    m.dim = 1;
    gss::NonlinearTerm a, b;
    a.kind = gss::TermKind::ConstantPower;
    a.coefficient = 1.0;
    a.power = 4.0;
    b.kind = gss::TermKind::ConstantPower;
    b.coefficient = -1.0;
    b.power = 6.0;
    m.terms = {a, b};
    return m;
}

// Gaussian well fixture whose mass curve folds twice: a wide shallow well
// binds a broad low-amplitude state while the p=8/p=12 pair supports a
// narrow soliton at the same masses.
inline gss::ProblemModel swell_model() {
    gss::ProblemModel m;
    m.dim = 1;
    m.potential.kind = gss::PotentialKind::BoundedWell;
    m.potential.depth = 1.0;
    m.potential.width = 1.5;
    gss::NonlinearTerm a, b;
    a.kind = gss::TermKind::ConstantPower;
    a.coefficient = 1.0;
    a.power = 8.0;
    b.kind = gss::TermKind::ConstantPower;
    b.coefficient = -0.04;
    b.power = 12.0;
    m.terms = {a, b};
    return m;
}

inline gss::GridFunction sampled_soliton(const gss::RadialGrid& g, double lambda) {
    double k = std::sqrt(-lambda);
    gss::GridFunction u(g);
    for (int i = 0; i <= g.points; ++i)
        u[i] = std::sqrt(2.0) * k / std::cosh(k * g.r[i]);
    return u;
}

inline gss::GridFunction gaussian_bump(const gss::RadialGrid& g, double amp, double width) {
    gss::GridFunction u(g);
    for (int i = 0; i <= g.points; ++i)
        u[i] = amp * std::exp(-(g.r[i] / width) * (g.r[i] / width));
    return u;
}

} // namespace testutil
