#include "gss/grid.hpp"
#include "gss/errors.hpp"
#include <cmath>
#include <stdexcept>

namespace gss {

double surface_area(int n) {
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

RadialGrid::RadialGrid(int n, double R, int M) : dim(n), radius(R), points(M) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    if (M < 16) throw std::invalid_argument("need at least 16 interior nodes");
    if (R <= 0) throw std::invalid_argument("radius must be positive");
    h = R / (M + 1);
    omega = surface_area(n);
    r.resize(M + 1);
    w.resize(M + 1);
    face.resize(M + 1);
    sqw.resize(M + 1);

    for (int i = 0; i <= M; ++i) r[i] = i * h;
    for (int i = 0; i < M; ++i) face[i] = std::pow((i + 0.5) * h, n - 1);
    face[M] = std::pow(R, n - 1);

    // w_i = (omega/n) * (m_i^n - m_{i-1}^n), cell edges m_{-1}=0, m_M = R
    auto edge = [&](int i) { return i < 0 ? 0.0 : (i == M ? R : (i + 0.5) * h); };
    for (int i = 0; i <= M; ++i) {
        w[i] = omega / n * (std::pow(edge(i), n) - std::pow(edge(i - 1), n));
        sqw[i] = std::sqrt(w[i]);
    }
}

double inner(const RadialGrid& g, const GridFunction& a, const GridFunction& b) {
    if (a.grid == nullptr || b.grid == nullptr || !g.compatible(*a.grid) || !g.compatible(*b.grid))
        throw GridMismatch("inner: functions live on different grids");
    double s = 0.0;
    for (int i = 0; i <= g.points; ++i) s += g.w[i] * a[i] * b[i];
    return s;
}

double norm_w(const RadialGrid& g, const GridFunction& a) {
    return std::sqrt(inner(g, a, a));
}

double norm_inf(const GridFunction& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace gss
