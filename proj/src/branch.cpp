#include "gss/branch.hpp"
#include "gss/errors.hpp"
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

namespace fs = std::filesystem;

namespace gss {

BranchPoint make_branch_point(const ProblemModel& m, const RadialGrid& g, Profile p) {
    BranchPoint bp;
    bp.lambda = p.lambda;
    bp.q = mass(g, p.u);
    bp.e = energy(m, g, p.u);
    SymmetricTridiagonal L = linearize(m, g, p.lambda, p.u);
    bp.spectrum = spectrum_report(g, L, p.u, 2);
    check_profile(m, g, p);
    bp.slope = bp.spectrum.slope;
    bp.profile = std::move(p);
    return bp;
}

namespace {

struct Tangent {
    GridFunction du;
    double dlam;
};

// Bordered Newton corrector for { Eq_lambda(u)=0, <t_u, u-u_p> + t_l (lambda-lambda_p)=0 }.
// Block elimination: two tridiagonal solves per iteration (J a = F, J b = u).
bool bordered_correct(const ProblemModel& m, const RadialGrid& g, const SymmetricTridiagonal& A,
                      GridFunction& u, double& lambda, const Tangent& t,
                      const GridFunction& u_pred, double lam_pred,
                      double tol, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        GridFunction F = residual(m, g, A, lambda, u);
        double rn = norm_inf(F);
        double N = inner(g, t.du, u) - inner(g, t.du, u_pred) + t.dlam * (lambda - lam_pred);
        if (rn <= tol && std::fabs(N) <= 1e-12 * (1.0 + std::fabs(lambda))) return true;

        SymmetricTridiagonal L = A;
        for (int i = 0; i <= g.points; ++i) {
            double ri = g.r[i];
            L.diag[i] += m.potential.V(ri, i) - lambda - m.f_t(ri, u[i], i);
        }
        TriFactor fac;
        try {
            fac = factor(L);
        } catch (const NearSingular&) {
            return false;
        }
        GridFunction a = fac.solve(F);
        GridFunction b = fac.solve(u);
        double denom = inner(g, t.du, b) + t.dlam;
        if (!std::isfinite(denom) || std::fabs(denom) < 1e-300) return false;
        double dlam = (inner(g, t.du, a) - N) / denom;
        if (!std::isfinite(dlam)) return false;
        for (int i = 0; i <= g.points; ++i) u[i] += -a[i] + dlam * b[i];
        lambda += dlam;
    }
    GridFunction F = residual(m, g, A, lambda, u);
    return norm_inf(F) <= tol;
}

bool cert_ok(const ProblemModel& m, const RadialGrid& g, const BranchPoint& bp) {
    SymmetricTridiagonal L = linearize(m, g, bp.lambda, bp.profile.u);
    return bp.profile.certificate.a1_pass(margin_floor(L));
}

// One-directional pseudo-arclength trace from the seed toward `target`.
Branch trace_directed(const ProblemModel& m, const RadialGrid& g, const Profile& seed,
                      double target, double lo, double hi, const StepControls& ctl) {
    Branch br;
    SymmetricTridiagonal A = laplacian_stencil(g);
    br.points.push_back(make_branch_point(m, g, seed));
    if (!cert_ok(m, g, br.points.back())) {
        br.end_reason = "seed fails the ground-state certificate";
        return br;
    }

    double dir = (target >= seed.lambda) ? 1.0 : -1.0;

    // second point by a natural-parameter step
    {
        double ds = std::min(ctl.ds_init, std::fabs(target - seed.lambda));
        if (ds == 0.0) {
            br.end_reason = "zero-length range";
            return br;
        }
        bool ok = false;
        while (ds >= ctl.ds_min) {
            try {
                Profile p =
                    newton_solve(m, g, seed.lambda + dir * ds, seed.u, ctl.tol, ctl.max_iter);
                br.points.push_back(make_branch_point(m, g, std::move(p)));
                ok = true;
                break;
            } catch (const std::exception&) {
                ds *= 0.5;
            }
        }
        if (!ok) throw StepCollapse("could not take the first continuation step");
        if (!cert_ok(m, g, br.points.back())) {
            br.end_reason = "certificate failure at the first step";
            return br;
        }
    }

    double ds = ctl.ds_init;
    int easy_streak = 0;

    for (int step = 2; step < ctl.max_steps; ++step) {
        const BranchPoint& p1 = br.points[br.points.size() - 2];
        const BranchPoint& p2 = br.points.back();

        if (std::fabs(p2.lambda - target) < 1e-12) {
            br.end_reason = "range_end";
            break;
        }
        if (norm_inf(p2.profile.u) < 1e-6) {
            br.end_reason = "linear_limit";
            break;
        }

        Tangent t;
        t.du = GridFunction(g);
        for (int i = 0; i <= g.points; ++i) t.du[i] = p2.profile.u[i] - p1.profile.u[i];
        t.dlam = p2.lambda - p1.lambda;
        double tn = std::sqrt(inner(g, t.du, t.du) + t.dlam * t.dlam);
        for (int i = 0; i <= g.points; ++i) t.du[i] /= tn;
        t.dlam /= tn;

        bool accepted = false;
        while (!accepted) {
            double lam_pred = p2.lambda + ds * t.dlam;
            bool clamp = (lam_pred - target) * dir > 0 || std::fabs(lam_pred - target) < 1e-14;

            Profile cand;
            bool ok = false;
            if (clamp) {
                try {
                    cand = newton_solve(m, g, target, p2.profile.u, ctl.tol, ctl.max_iter);
                    ok = true;
                } catch (const std::exception&) {
                    ok = false;
                }
            } else {
                GridFunction u_pred(g);
                for (int i = 0; i <= g.points; ++i)
                    u_pred[i] = p2.profile.u[i] + ds * t.du[i];
                GridFunction u = u_pred;
                double lam = lam_pred;
                ok = bordered_correct(m, g, A, u, lam, t, u_pred, lam_pred, ctl.tol, ctl.max_iter);
                if (ok && (lam < lo - 1e-9 || lam > hi + 1e-9)) {
                    // corrector wandered out of range: finish on the boundary instead
                    try {
                        cand = newton_solve(m, g, target, p2.profile.u, ctl.tol, ctl.max_iter);
                        clamp = true;
                    } catch (const std::exception&) {
                        ok = false;
                    }
                } else if (ok) {
                    cand.u = std::move(u);
                    cand.lambda = lam;
                    cand.converged = true;
                    cand.residual_norm = norm_inf(residual(m, g, A, lam, cand.u));
                }
            }

            if (ok) {
                BranchPoint bp = make_branch_point(m, g, std::move(cand));
                if (!cert_ok(m, g, bp)) {
                    br.points.push_back(std::move(bp));
                    br.end_reason = "certificate failure";
                    return br;
                }
                br.points.push_back(std::move(bp));
                accepted = true;
                if (clamp) {
                    br.end_reason = "range_end";
                    return br;
                }
                if (++easy_streak >= 4) {
                    ds = std::min(ds * 1.3, ctl.ds_max);
                    easy_streak = 0;
                }
            } else {
                easy_streak = 0;
                ds *= 0.5;
                if (ds < ctl.ds_min)
                    throw StepCollapse("continuation step collapsed below ds_min at lambda " +
                                       std::to_string(p2.lambda));
            }
        }
    }
    if (br.end_reason.empty()) br.end_reason = "max_steps";
    return br;
}

} // namespace

Branch continue_branch(const ProblemModel& m, const RadialGrid& g, const Profile& seed,
                       double lambda_a, double lambda_b, const StepControls& ctl) {
    if (!seed.converged || seed.residual_norm > 10 * ctl.tol)
        throw SeedNotConverged("continuation seed residual " + std::to_string(seed.residual_norm));
    double lo = std::min(lambda_a, lambda_b), hi = std::max(lambda_a, lambda_b);
    if (seed.lambda < lo - 1e-12 || seed.lambda > hi + 1e-12)
        throw SeedNotConverged("seed lambda outside the continuation range");

    // Trace toward lambda_b first; if the seed sits strictly inside the range,
    // trace the remaining piece toward lambda_a and splice the two legs so the
    // returned chain runs monotonically in arclength from the a-end to the b-end.
    Branch fwd = trace_directed(m, g, seed, lambda_b, lo, hi, ctl);
    if (std::fabs(seed.lambda - lambda_a) < 1e-12) return fwd;

    Branch rev = trace_directed(m, g, seed, lambda_a, lo, hi, ctl);
    Branch br;
    br.points.reserve(rev.points.size() + fwd.points.size());
    for (std::size_t k = rev.points.size(); k-- > 1;)
        br.points.push_back(std::move(rev.points[k]));
    for (auto& bp : fwd.points) br.points.push_back(std::move(bp));

    auto leg_done = [](const std::string& r) {
        return r == "range_end" || r == "zero-length range";
    };
    if (leg_done(fwd.end_reason) && leg_done(rev.end_reason))
        br.end_reason = "range_end";
    else if (!leg_done(fwd.end_reason))
        br.end_reason = fwd.end_reason;
    else
        br.end_reason = rev.end_reason + " (a-side leg)";
    return br;
}

IdentityReport branch_identities(const ProblemModel& m, const RadialGrid& g, const Branch& b,
                                 int max_points) {
    if (b.points.size() < 3)
        throw InsufficientPoints("branch identity checks need at least 3 points");
    IdentityReport rep;
    // FD widths sized so the O(h^2) mismatch signal clears the double-precision
    // residual floor of the re-solves by a few orders of magnitude.
    const double h_coarse = 3e-2, h_fine = 3e-3;
    int stride = std::max<int>(1, (static_cast<int>(b.points.size()) - 2) / max_points);

    for (std::size_t k = 1; k + 1 < b.points.size(); k += stride) {
        const BranchPoint& bp = b.points[k];

        // (ii) adjoint equation, pointwise and h-independent
        SymmetricTridiagonal L = linearize(m, g, bp.lambda, bp.profile.u);
        GridFunction Lb = L.apply(bp.spectrum.adjoint_state);
        GridFunction diff(g);
        for (int i = 0; i <= g.points; ++i) diff[i] = Lb[i] - bp.profile.u[i];
        double adj = norm_w(g, diff) / std::max(norm_w(g, bp.profile.u), 1e-300);
        rep.worst_adjoint = std::max(rep.worst_adjoint, adj);

        // (i),(iii) centered differences of Q and E in lambda. The re-solve
        // tolerance sits just above the rounding floor of the residual.
        double tol_fd = std::max(1e-11, 12 * std::numeric_limits<double>::epsilon() *
                                            L.norm_bound() *
                                            std::max(1.0, norm_inf(bp.profile.u)));
        double errs[2], ei[2];
        bool fd_ok = true;
        for (int hi = 0; hi < 2 && fd_ok; ++hi) {
            double h = (hi == 0) ? h_coarse : h_fine;
            try {
                Profile pp = newton_solve(m, g, bp.lambda + h, bp.profile.u, tol_fd, 60);
                Profile pm = newton_solve(m, g, bp.lambda - h, bp.profile.u, tol_fd, 60);
                double qd = (mass(g, pp.u) - mass(g, pm.u)) / (2 * h);
                double ed = (energy(m, g, pp.u) - energy(m, g, pm.u)) / (2 * h);
                errs[hi] = std::fabs(bp.slope - qd);
                ei[hi] = std::fabs(ed - bp.lambda * qd);
            } catch (const std::exception&) {
                fd_ok = false;
            }
        }
        if (fd_ok) {
            rep.worst_slope_fd = std::max(rep.worst_slope_fd, errs[1]);
            rep.worst_energy_identity = std::max(rep.worst_energy_identity, ei[1]);
            double ratio = errs[0] / std::max(errs[1], 1e-300);
            rep.ratios.push_back(ratio);
        }
        ++rep.points_checked;
    }
    if (!rep.ratios.empty()) {
        std::vector<double> s = rep.ratios;
        std::sort(s.begin(), s.end());
        rep.slope_fd_ratio = s[s.size() / 2];
    }
    return rep;
}

std::vector<FoldRecord> detect_folds(const ProblemModel& m, const RadialGrid& g, Branch& b,
                                     const StepControls& ctl) {
    std::vector<FoldRecord> out;
    const auto& pts = b.points;

    auto slope_at = [&](double lam, const GridFunction& seed_u, GridFunction* u_out,
                        double* q_out) -> double {
        Profile p = newton_solve(m, g, lam, seed_u, ctl.tol, ctl.max_iter);
        SymmetricTridiagonal L = linearize(m, g, lam, p.u);
        GridFunction adj = factor(L).solve(p.u);
        if (u_out) *u_out = p.u;
        if (q_out) *q_out = mass(g, p.u);
        return inner(g, adj, p.u);
    };

    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        double s1 = pts[k].slope, s2 = pts[k + 1].slope;
        if (s1 == 0.0 || s1 * s2 >= 0.0) continue;

        double scale = std::max(std::fabs(s1), std::fabs(s2));
        double la = pts[k].lambda, lb = pts[k + 1].lambda;
        double sa = s1;
        GridFunction ua = pts[k].profile.u, ub = pts[k + 1].profile.u;
        double qa = pts[k].q, qb = pts[k + 1].q;

        FoldRecord fr;
        fr.left_index = static_cast<int>(k);
        double lam_star = 0.5 * (la + lb), q_star = 0.5 * (qa + qb);
        for (int it = 0; it < 80; ++it) {
            double lm = 0.5 * (la + lb);
            GridFunction um;
            double qm;
            GridFunction seed(g);
            for (int i = 0; i <= g.points; ++i) seed[i] = 0.5 * (ua[i] + ub[i]);
            double sm;
            try {
                sm = slope_at(lm, seed, &um, &qm);
            } catch (const std::exception&) {
                break;
            }
            lam_star = lm;
            q_star = qm;
            if (std::fabs(sm) < 1e-8 * scale) break;
            if (sm * sa > 0) {
                la = lm; sa = sm; ua = um; qa = qm;
            } else {
                lb = lm; ub = um; qb = qm;
            }
        }
        fr.lambda_star = lam_star;
        fr.q_star = q_star;
        double qlo = std::min(pts[k].q, pts[k + 1].q), qhi = std::max(pts[k].q, pts[k + 1].q);
        fr.extremum = (q_star >= qhi) ? 'M' : (q_star <= qlo) ? 'm' : '?';
        if (fr.extremum == '?') fr.extremum = (s1 > 0) ? 'M' : 'm';  // slope falls through 0: max

        // dc/dlambda -> 0 at the fold, so |du|/|dQ| blows up between the
        // final bracket points
        GridFunction du(g);
        for (int i = 0; i <= g.points; ++i) du[i] = ub[i] - ua[i];
        double dq = std::fabs(qb - qa);
        fr.reciprocal_quotient = norm_w(g, du) / std::max(dq, 1e-300);
        out.push_back(fr);
    }

    // branch truncated at a sign change: slope at an endpoint inside the dead band
    if (pts.size() >= 2) {
        auto endpoint_fold = [&](std::size_t k_end, std::size_t k_nb) {
            double s_end = pts[k_end].slope, s_nb = pts[k_nb].slope;
            if (std::fabs(s_end) <= 1e-6 * std::max(std::fabs(s_nb), 1e-30)) {
                FoldRecord fr;
                fr.lambda_star = pts[k_end].lambda;
                fr.q_star = pts[k_end].q;
                fr.left_index = static_cast<int>(std::min(k_end, k_nb));
                fr.one_sided = true;
                fr.extremum = (s_nb > 0) ? 'M' : 'm';
                out.push_back(fr);
            }
        };
        endpoint_fold(0, 1);
        endpoint_fold(pts.size() - 1, pts.size() - 2);
    }

    std::sort(out.begin(), out.end(),
              [](const FoldRecord& a, const FoldRecord& c) { return a.left_index < c.left_index; });
    b.folds = out;
    return out;
}

void write_branch_csv(const std::string& path, const Branch& b) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fprintf(fp, "lambda,Q,E,slope,ev1,ev2,morse,decay_fit,pohozaev\n");
    for (const auto& p : b.points) {
        double ev1 = p.spectrum.eigenvalues_low.size() > 0 ? p.spectrum.eigenvalues_low[0] : 0;
        double ev2 = p.spectrum.eigenvalues_low.size() > 1 ? p.spectrum.eigenvalues_low[1] : 0;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", p.lambda, p.q,
                     p.e, p.slope, ev1, ev2, p.spectrum.morse_index,
                     p.profile.certificate.decay_rate_fit, p.profile.certificate.pohozaev);
    }
    for (const auto& f : b.folds)
        std::fprintf(fp, "# fold lambda=%.17g Q=%.17g\n", f.lambda_star, f.q_star);
    if (!b.end_reason.empty()) std::fprintf(fp, "# end %s\n", b.end_reason.c_str());
    std::fclose(fp);
}

void write_branch_points(const std::string& dir, const RadialGrid& g, const Branch& b) {
    fs::create_directories(dir);
    char name[64];
    for (std::size_t k = 0; k < b.points.size(); ++k) {
        std::snprintf(name, sizeof name, "point_%05zu.dat", k);
        save_solution((fs::path(dir) / name).string(), g, b.points[k].profile);
    }
}

Branch load_branch_points(const std::string& dir, const ProblemModel& m, const RadialGrid& g) {
    std::vector<fs::path> files;
    for (const auto& ent : fs::directory_iterator(dir))
        if (ent.path().filename().string().rfind("point_", 0) == 0 &&
            ent.path().extension() == ".dat")
            files.push_back(ent.path());
    std::sort(files.begin(), files.end());
    Branch br;
    for (const auto& f : files) {
        Profile p = load_solution(f.string(), g);
        p.residual_norm = norm_inf(residual(m, g, p.lambda, p.u));
        p.converged = p.residual_norm < 1e-6;
        br.points.push_back(make_branch_point(m, g, std::move(p)));
    }
    br.end_reason = "loaded";
    return br;
}

} // namespace gss
