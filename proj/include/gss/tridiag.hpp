#pragma once
#include "gss/grid.hpp"
#include <vector>

namespace gss {

// Symmetric tridiagonal operator stored in the weight-symmetrized frame:
// if A is the plain-frame operator (self-adjoint wrt the quadrature weights W)
// then T = W^{1/2} A W^{-1/2} is symmetric in the ordinary sense and is what
// diag/offdiag hold. Diagonal additions (potential, -lambda, -f_t) commute
// with the frame change, so add_diag works directly on diag.
//
// Plain-frame action and solves go through u_hat = W^{1/2} u.
struct SymmetricTridiagonal {
    std::vector<double> diag;     // size M+1
    std::vector<double> offdiag;  // size M
    const RadialGrid* grid;

    int n() const { return static_cast<int>(diag.size()); }

    void add_diag(const std::vector<double>& d);
    void add_diag_const(double s);

    // y = A u in the plain frame
    GridFunction apply(const GridFunction& u) const;

    double norm_bound() const;    // Gershgorin bound on |eigenvalues|
};

// LDL^T factorization of the symmetrized matrix, with pivot guard.
struct TriFactor {
    std::vector<double> d;   // pivots
    std::vector<double> l;   // subdiagonal multipliers
    const SymmetricTridiagonal* op;

    // Solve A x = rhs in the plain frame with one step of iterative refinement.
    GridFunction solve(const GridFunction& rhs) const;

    // Raw symmetric-frame solve T x_hat = b_hat (used by eigensolvers).
    void solve_hat(std::vector<double>& b) const;
};

// Throws NearSingular if a pivot falls below 1e-13 * scale.
TriFactor factor(const SymmetricTridiagonal& T);

// Discrete -Laplacian on the radial grid in conservative flux form:
// w_i (Au)_i = -(omega/h) [ s_{i+1/2}(u_{i+1}-u_i) - s_{i-1/2}(u_i-u_{i-1}) ]
// with s the face values of r^{n-1}, s_{-1/2} = 0 (regularity at the origin)
// and the Dirichlet ghost u(R) = 0 behind the outer face. Exactly self-adjoint
// wrt inner(,) by telescoping, and positive definite.
SymmetricTridiagonal laplacian_stencil(const RadialGrid& g);

} // namespace gss
