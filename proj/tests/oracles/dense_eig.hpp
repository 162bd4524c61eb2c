#pragma once
#include <lapacke.h>
#include <stdexcept>
#include <vector>

// Dense reference eigensolver (test side only): full spectrum of a symmetric
// tridiagonal via LAPACK dstev, cross-checking the library's Sturm bisection.
namespace oracle {

inline std::vector<double> dstev_eigenvalues(std::vector<double> diag,
                                             std::vector<double> offdiag) {
    lapack_int n = static_cast<lapack_int>(diag.size());
    if (offdiag.size() + 1 != diag.size())
        throw std::invalid_argument("dstev: offdiag must have n-1 entries");
    lapack_int info =
        LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, diag.data(), offdiag.data(), nullptr, n);
    if (info != 0) throw std::runtime_error("dstev failed, info=" + std::to_string(info));
    return diag;   // ascending
}

} // namespace oracle
