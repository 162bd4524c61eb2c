#pragma once
#include <stdexcept>
#include <string>

namespace gss {

struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tridiagonal factorization hit a pivot below the guard threshold. At a
// certified ground state this must not happen (the linearization has trivial
// radial kernel), so it signals either a genuine near-kernel or a bad input.
struct NearSingular : std::runtime_error {
    double pivot;
    explicit NearSingular(double p)
        : std::runtime_error("near-singular tridiagonal solve, pivot " + std::to_string(p)),
          pivot(p) {}
};

struct NoConvergence : std::runtime_error {
    int iterations;
    double last_norm;
    NoConvergence(int it, double nrm)
        : std::runtime_error("Newton did not converge after " + std::to_string(it) +
                             " iterations, residual " + std::to_string(nrm)),
          iterations(it), last_norm(nrm) {}
};

struct CollapsedToZero : std::runtime_error {
    CollapsedToZero() : std::runtime_error("iterate collapsed to the trivial zero solution") {}
};

struct WrongModelKind : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveTail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeedNotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepCollapse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientPoints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UncoveredMass : std::runtime_error {
    std::string gaps;
    explicit UncoveredMass(const std::string& g)
        : std::runtime_error("mass values not covered by any branch: " + g), gaps(g) {}
};

struct CriticalExponent : std::runtime_error {
    CriticalExponent() : std::runtime_error("(pbar-2)*n = 4: mass-critical scaling is singular") {}
};

struct NoProjection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroState : std::runtime_error {
    ZeroState() : std::runtime_error("zero state has no Lagrange multiplier") {}
};

struct NaNDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(const std::string& k, const std::string& msg)
        : std::runtime_error("config error [" + k + "]: " + msg), key(k) {}
};

} // namespace gss
