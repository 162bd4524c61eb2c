#pragma once
#include "gss/grid.hpp"
#include "gss/tridiag.hpp"
#include <vector>
#include <string>

namespace gss {

enum class StabilityFlag { Stable, Unstable, Marginal };

struct SpectrumReport {
    std::vector<double> eigenvalues_low;  // k smallest, ascending
    int morse_index = 0;                  // count of negative eigenvalues
    double nondegeneracy_margin = 0.0;    // distance from 0 to the nearest eigenvalue
    double slope = 0.0;                   // <L^{-1} u, u> = dQ/dlambda along branches
    GridFunction adjoint_state;           // L^{-1} u
};

// Number of eigenvalues of the symmetrized tridiagonal strictly below x
// (Sturm sequence / LDL^T inertia count).
int sturm_count(const SymmetricTridiagonal& T, double x);

// k smallest eigenvalues via Sturm bisection to 1e-10 * |T|, polished by
// inverse iteration with a Rayleigh-quotient update.
std::vector<double> eigs_smallest(const SymmetricTridiagonal& T, int k);

// Eigenvalue #idx (0-based, ascending) by targeted bisection + polish.
double eig_by_index(const SymmetricTridiagonal& T, int idx);

// Morse index in the radial sector and min distance of the spectrum to zero.
std::pair<int, double> morse_and_margin(const SymmetricTridiagonal& L);

// adjoint = L^{-1} u and slope = inner(adjoint, u).
SpectrumReport spectrum_report(const RadialGrid& g, const SymmetricTridiagonal& L,
                               const GridFunction& u, int k = 2);

StabilityFlag vk_flag(double slope, double dead_band = 1e-8);
std::string vk_note();

} // namespace gss
