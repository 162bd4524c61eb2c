#pragma once
#include <vector>
#include <cstddef>

namespace gss {

// Uniform radial mesh on [0,R] for even/radial functions in n dimensions.
// Nodes r_i = i*h, i = 0..M, h = R/(M+1); the ghost node r_{M+1} = R carries
// the Dirichlet condition u(R)=0 and never appears in vectors.
//
// Quadrature weights are exact cell volumes: w_i = omega_n * int_{cell_i} r^{n-1} dr
// with cell_0 = [0, h/2], cell_i = [(i-1/2)h, (i+1/2)h], cell_M = [(M-1/2)h, R]
// and omega_n = 2 pi^{n/2} / Gamma(n/2) the unit-sphere area (omega_1 = 2, which
// realizes the even-function convention: integrals over R count both half-lines).
// They sum to omega_n R^n / n exactly and integrate smooth functions to O(h^2).
struct RadialGrid {
    int dim;
    double radius;
    int points;                 // M: index of the last interior node
    double h;
    double omega;               // unit-sphere surface area
    std::vector<double> r;      // node positions, size M+1
    std::vector<double> w;      // quadrature weights, size M+1
    std::vector<double> face;   // r^{n-1} at cell faces m_i=(i+1/2)h, i=0..M (face[M] at r=R)
    std::vector<double> sqw;    // sqrt(w), cached for frame changes

    RadialGrid(int n, double R, int M);

    bool compatible(const RadialGrid& o) const {
        return dim == o.dim && points == o.points && radius == o.radius;
    }
};

struct GridFunction {
    std::vector<double> v;
    const RadialGrid* grid;

    GridFunction() : grid(nullptr) {}
    explicit GridFunction(const RadialGrid& g, double fill = 0.0)
        : v(g.points + 1, fill), grid(&g) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

double inner(const RadialGrid& g, const GridFunction& a, const GridFunction& b);
double norm_w(const RadialGrid& g, const GridFunction& a);   // sqrt(inner(a,a))
double norm_inf(const GridFunction& a);

double surface_area(int n);   // omega_n = 2 pi^{n/2} / Gamma(n/2)

} // namespace gss
