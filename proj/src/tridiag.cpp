#include "gss/tridiag.hpp"
#include "gss/errors.hpp"
#include <cmath>
#include <algorithm>

namespace gss {

void SymmetricTridiagonal::add_diag(const std::vector<double>& d) {
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] += d[i];
}

void SymmetricTridiagonal::add_diag_const(double s) {
    for (double& x : diag) x += s;
}

GridFunction SymmetricTridiagonal::apply(const GridFunction& u) const {
    const int m = n();
    GridFunction y(*grid);
    const auto& sq = grid->sqw;
    // y = W^{-1/2} T (W^{1/2} u)
    std::vector<double> uh(m);
    for (int i = 0; i < m; ++i) uh[i] = sq[i] * u[i];
    for (int i = 0; i < m; ++i) {
        double s = diag[i] * uh[i];
        if (i > 0) s += offdiag[i - 1] * uh[i - 1];
        if (i < m - 1) s += offdiag[i] * uh[i + 1];
        y[i] = s / sq[i];
    }
    return y;
}

double SymmetricTridiagonal::norm_bound() const {
    const int m = n();
    double b = 0.0;
    for (int i = 0; i < m; ++i) {
        double row = std::fabs(diag[i]);
        if (i > 0) row += std::fabs(offdiag[i - 1]);
        if (i < m - 1) row += std::fabs(offdiag[i]);
        b = std::max(b, row);
    }
    return b;
}

TriFactor factor(const SymmetricTridiagonal& T) {
    const int m = T.n();
    TriFactor f;
    f.op = &T;
    f.d.resize(m);
    f.l.resize(m > 0 ? m - 1 : 0);
    const double guard = 1e-13 * std::max(T.norm_bound(), 1.0);
    double piv = T.diag[0];
    if (std::fabs(piv) <= guard) throw NearSingular(piv);
    f.d[0] = piv;
    for (int i = 1; i < m; ++i) {
        f.l[i - 1] = T.offdiag[i - 1] / f.d[i - 1];
        piv = T.diag[i] - f.l[i - 1] * T.offdiag[i - 1];
        if (std::fabs(piv) <= guard) throw NearSingular(piv);
        f.d[i] = piv;
    }
    return f;
}

void TriFactor::solve_hat(std::vector<double>& b) const {
    const int m = static_cast<int>(d.size());
    for (int i = 1; i < m; ++i) b[i] -= l[i - 1] * b[i - 1];
    for (int i = 0; i < m; ++i) b[i] /= d[i];
    for (int i = m - 2; i >= 0; --i) b[i] -= l[i] * b[i + 1];
}

GridFunction TriFactor::solve(const GridFunction& rhs) const {
    const RadialGrid& g = *op->grid;
    const int m = static_cast<int>(d.size());
    const auto& sq = g.sqw;

    std::vector<double> b(m);
    for (int i = 0; i < m; ++i) b[i] = sq[i] * rhs[i];
    solve_hat(b);
    GridFunction x(g);
    for (int i = 0; i < m; ++i) x[i] = b[i] / sq[i];

    // one step of iterative refinement in the plain frame
    GridFunction Ax = op->apply(x);
    GridFunction res(g);
    for (int i = 0; i < m; ++i) res[i] = rhs[i] - Ax[i];
    for (int i = 0; i < m; ++i) b[i] = sq[i] * res[i];
    solve_hat(b);
    for (int i = 0; i < m; ++i) x[i] += b[i] / sq[i];
    return x;
}

SymmetricTridiagonal laplacian_stencil(const RadialGrid& g) {
    const int M = g.points;
    SymmetricTridiagonal T;
    T.grid = &g;
    T.diag.resize(M + 1);
    T.offdiag.resize(M);
    const double c = g.omega / g.h;
    for (int i = 0; i <= M; ++i) {
        double s_in = (i == 0) ? 0.0 : g.face[i - 1];
        double s_out = g.face[i];
        T.diag[i] = c * (s_in + s_out) / g.w[i];
    }
    for (int i = 0; i < M; ++i)
        T.offdiag[i] = -c * g.face[i] / (g.sqw[i] * g.sqw[i + 1]);
    return T;
}

} // namespace gss
