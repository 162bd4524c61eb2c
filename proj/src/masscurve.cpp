#include "gss/masscurve.hpp"
#include "gss/errors.hpp"
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace gss {

Profile resolve_at_mass(const ProblemModel& m, const RadialGrid& g, const GridFunction& seed_u,
                        double seed_lambda, double c, const MassCurveControls& ctl) {
    SymmetricTridiagonal A = laplacian_stencil(g);
    GridFunction u = seed_u;
    double lambda = seed_lambda;

    for (int it = 0; it < ctl.max_iter; ++it) {
        GridFunction F = residual(m, g, A, lambda, u);
        double rn = norm_inf(F);
        double qdef = mass(g, u) - c;
        if (rn <= ctl.tol && std::fabs(qdef) <= 1e-12 * std::max(c, 1.0)) {
            Profile p;
            p.u = std::move(u);
            p.lambda = lambda;
            p.residual_norm = rn;
            p.converged = true;
            p.iterations = it;
            return p;
        }
        SymmetricTridiagonal L = A;
        for (int i = 0; i <= g.points; ++i) {
            double ri = g.r[i];
            L.diag[i] += m.potential.V(ri, i) - lambda - m.f_t(ri, u[i], i);
        }
        TriFactor fac = factor(L);
        GridFunction a = fac.solve(F);
        GridFunction b = fac.solve(u);
        double schur = inner(g, u, b);   // = dQ/dlambda: vanishes only at folds
        if (!std::isfinite(schur) || std::fabs(schur) < 1e-300)
            throw NoConvergence(it, rn);
        double dlam = (inner(g, u, a) - qdef) / schur;
        for (int i = 0; i <= g.points; ++i) u[i] += -a[i] + dlam * b[i];
        lambda += dlam;
        if (!std::isfinite(lambda) || norm_inf(u) < 1e-14) throw NoConvergence(it, rn);
    }
    throw NoConvergence(ctl.max_iter, norm_inf(residual(m, g, lambda, u)));
}

namespace {

struct Candidate {
    Profile profile;
    double e = 0.0;
    int branch = -1;
    int point = -1;
    bool ok = false;
};

Candidate candidate_at(const ProblemModel& m, const RadialGrid& g, const Branch& br, int k,
                       double c, int bi, const MassCurveControls& ctl) {
    Candidate cand;
    const BranchPoint& p1 = br.points[k];
    const BranchPoint& p2 = br.points[k + 1];
    double t = (c - p1.q) / (p2.q - p1.q);
    GridFunction seed(g);
    for (int i = 0; i <= g.points; ++i)
        seed[i] = (1 - t) * p1.profile.u[i] + t * p2.profile.u[i];
    double lam0 = (1 - t) * p1.lambda + t * p2.lambda;
    try {
        cand.profile = resolve_at_mass(m, g, seed, lam0, c, ctl);
        cand.e = energy(m, g, cand.profile.u);
        cand.branch = bi;
        cand.point = k;
        cand.ok = true;
    } catch (const std::exception&) {
        cand.ok = false;
    }
    return cand;
}

std::vector<Candidate> candidates_at_mass(const ProblemModel& m, const RadialGrid& g,
                                          const std::vector<Branch>& branches, double c,
                                          const MassCurveControls& ctl) {
    std::vector<Candidate> cands;
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        const auto& pts = branches[bi].points;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            double q1 = pts[k].q, q2 = pts[k + 1].q;
            if ((c - q1) * (c - q2) > 0) continue;
            if (q1 == q2) continue;
            Candidate cand = candidate_at(m, g, branches[bi], static_cast<int>(k), c,
                                          static_cast<int>(bi), ctl);
            if (!cand.ok) continue;
            bool dup = false;
            for (const auto& prev : cands)
                if (std::fabs(prev.profile.lambda - cand.profile.lambda) <=
                    1e-8 * (1 + std::fabs(cand.profile.lambda)))
                    dup = true;
            if (!dup) cands.push_back(std::move(cand));
        }
    }
    return cands;
}

} // namespace

MassCurve build_mass_curve(const ProblemModel& m, const RadialGrid& g,
                           const std::vector<Branch>& branches, const std::vector<double>& c_grid,
                           const MassCurveControls& ctl) {
    if (branches.empty()) throw UncoveredMass("no branches supplied");
    std::vector<double> cs = c_grid;
    std::sort(cs.begin(), cs.end());

    MassCurve mc;
    mc.samples.resize(cs.size());
    std::vector<int> status(cs.size(), 0);  // 0 pending, 1 ok, -1 uncovered

    auto work = [&](std::size_t idx) {
        double c = cs[idx];
        auto cands = candidates_at_mass(m, g, branches, c, ctl);
        if (cands.empty()) {
            status[idx] = -1;
            return;
        }
        std::size_t best = 0;
        for (std::size_t j = 1; j < cands.size(); ++j)
            if (cands[j].e < cands[best].e) best = j;
        MassCurveSample s;
        s.c = c;
        s.lambda = cands[best].profile.lambda;
        s.m = cands[best].e;
        s.source_branch = cands[best].branch;
        s.source_point = cands[best].point;
        for (std::size_t j = 0; j < cands.size(); ++j)
            if (j != best && std::fabs(cands[j].e - cands[best].e) <= 1e-9 * std::fabs(cands[best].e))
                ++s.multiplicity;
        s.profile = std::move(cands[best].profile);
        mc.samples[idx] = std::move(s);
        status[idx] = 1;
    };

    if (ctl.threads > 1) {
        std::vector<std::thread> pool;
        std::size_t nth = std::min<std::size_t>(ctl.threads, cs.size());
        for (std::size_t t = 0; t < nth; ++t)
            pool.emplace_back([&, t]() {
                for (std::size_t i = t; i < cs.size(); i += nth) work(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < cs.size(); ++i) work(i);
    }

    std::ostringstream gaps;
    bool any_gap = false;
    for (std::size_t i = 0; i < cs.size(); ++i)
        if (status[i] < 0) {
            if (any_gap) gaps << ", ";
            gaps << cs[i];
            any_gap = true;
        }
    if (any_gap) throw UncoveredMass(gaps.str());

    // fold masses (bad values) from the supplied branches
    for (const auto& br : branches)
        for (const auto& f : br.folds)
            mc.bad_values.push_back({f.q_star, f.lambda_star});

    // multiplier jumps confirmed by an energy tie between the two segments
    auto& S = mc.samples;
    for (std::size_t k = 0; k + 1 < S.size(); ++k) {
        double dc = S[k + 1].c - S[k].c;
        if (dc <= 0) continue;
        double jump = std::fabs(S[k + 1].lambda - S[k].lambda);
        double slope_before =
            (k > 0) ? std::fabs((S[k].lambda - S[k - 1].lambda) / (S[k].c - S[k - 1].c)) : 0.0;
        double slope_after = (k + 2 < S.size())
                                 ? std::fabs((S[k + 2].lambda - S[k + 1].lambda) /
                                             (S[k + 2].c - S[k + 1].c))
                                 : 0.0;
        double local = std::max(slope_before, slope_after);
        double threshold =
            std::max(10.0 * local * dc, 1e-7 * (1.0 + std::fabs(S[k].lambda)));
        if (jump <= threshold) continue;

        // refine the tie: E_left(c) - E_right(c) changes sign in [c_k, c_{k+1}]
        GridFunction useed_l = S[k].profile.u, useed_r = S[k + 1].profile.u;
        double lam_l = S[k].lambda, lam_r = S[k + 1].lambda;
        double ca = S[k].c, cb = S[k + 1].c;
        auto dE = [&](double c, double& el, double& er, Profile& pl, Profile& pr) {
            pl = resolve_at_mass(m, g, useed_l, lam_l, c, ctl);
            pr = resolve_at_mass(m, g, useed_r, lam_r, c, ctl);
            el = energy(m, g, pl.u);
            er = energy(m, g, pr.u);
            return el - er;
        };
        double el, er;
        Profile pl, pr;
        double fa, fb;
        try {
            fa = dE(ca, el, er, pl, pr);
            fb = dE(cb, el, er, pl, pr);
        } catch (const std::exception&) {
            continue;
        }
        if (fa * fb > 0) continue;  // no tie: resolution artifact, not a bad mass
        double cm = 0.5 * (ca + cb), fm = fa;
        for (int it = 0; it < 64 && cb - ca > 1e-13 * std::max(1.0, cb); ++it) {
            cm = 0.5 * (ca + cb);
            try {
                fm = dE(cm, el, er, pl, pr);
            } catch (const std::exception&) {
                break;
            }
            useed_l = pl.u; lam_l = pl.lambda;   // march seeds along
            useed_r = pr.u; lam_r = pr.lambda;
            if (fm * fa > 0) { ca = cm; fa = fm; }
            else { cb = cm; fb = fm; }
        }
        BadMass bm;
        bm.c = cm;
        bm.lambda_left = pl.lambda;
        bm.lambda_right = pr.lambda;
        bm.energy_tie_gap = std::fabs(fm);
        bm.m_at = 0.5 * (el + er);
        if (bm.energy_tie_gap <= 1e-9 * std::fabs(bm.m_at)) {
            mc.bad_masses.push_back(bm);
            S[k].flags = "bad_mass_left";
            S[k + 1].flags = "bad_mass_right";
        }
    }

    // annotate samples near fold masses
    for (std::size_t k = 0; k < S.size(); ++k) {
        if (S[k].flags != "ok") continue;
        double dcl = (k > 0) ? S[k].c - S[k - 1].c : (S.size() > 1 ? S[1].c - S[0].c : 0.0);
        for (const auto& bv : mc.bad_values)
            if (std::fabs(S[k].c - bv.c_tilde) <= dcl) S[k].flags = "bad_value_near";
    }
    return mc;
}

DerivReport derivative_checks(const ProblemModel& m, const RadialGrid& g, MassCurve& mc,
                              const MassCurveControls& ctl) {
    DerivReport rep;
    auto& S = mc.samples;
    // Two stencil widths: the first difference wants a small step (its O(h^2)
    // truncation dominates), the second difference a larger one (it amplifies
    // the energy rounding noise by 4/h^2).
    const double dc = ctl.dc_fd;
    const double dc2 = std::max(1e-2, 10.0 * ctl.dc_fd);
    mc.derivative_table.clear();

    auto near_bad = [&](double c) {
        for (const auto& bm : mc.bad_masses)
            if (std::fabs(c - bm.c) < 2 * dc2) return true;
        return false;
    };
    auto near_fold = [&](double c) {
        for (const auto& bv : mc.bad_values)
            if (std::fabs(c - bv.c_tilde) < 2 * dc2) return true;
        return false;
    };

    for (auto& s : S) {
        if (near_bad(s.c) || near_fold(s.c)) continue;
        Profile pp, pm_, pp2, pm2;
        try {
            pp = resolve_at_mass(m, g, s.profile.u, s.lambda, s.c + dc, ctl);
            pm_ = resolve_at_mass(m, g, s.profile.u, s.lambda, s.c - dc, ctl);
            pp2 = resolve_at_mass(m, g, s.profile.u, s.lambda, s.c + dc2, ctl);
            pm2 = resolve_at_mass(m, g, s.profile.u, s.lambda, s.c - dc2, ctl);
        } catch (const std::exception&) {
            continue;
        }
        double ep = energy(m, g, pp.u), em = energy(m, g, pm_.u);
        DerivRow row;
        row.c = s.c;
        row.lambda_c = s.lambda;
        row.mprime_fd = (ep - em) / (2 * dc);
        row.msecond_fd =
            (energy(m, g, pp2.u) - 2 * s.m + energy(m, g, pm2.u)) / (dc2 * dc2);
        row.lamprime_fd = (pp2.lambda - pm2.lambda) / (2 * dc2);
        mc.derivative_table.push_back(row);

        rep.worst_mprime_vs_lambda =
            std::max(rep.worst_mprime_vs_lambda, std::fabs(row.mprime_fd - s.lambda));
        rep.worst_msecond_vs_lamprime =
            std::max(rep.worst_msecond_vs_lamprime, std::fabs(row.msecond_fd - row.lamprime_fd));
        rep.max_msecond = std::max(rep.max_msecond, row.msecond_fd);
        if (ep >= s.m || s.m >= em) rep.m_decreasing = false;
    }

    // strict monotonicity of lambda(c) between bad masses
    for (std::size_t k = 0; k + 1 < S.size(); ++k) {
        bool crosses_bad = false;
        for (const auto& bm : mc.bad_masses)
            if (bm.c > S[k].c && bm.c < S[k + 1].c) crosses_bad = true;
        if (crosses_bad) continue;
        if (!(S[k + 1].lambda < S[k].lambda - 1e-10)) rep.lambda_monotone_between_bad = false;
    }
    for (const auto& bm : mc.bad_masses) {
        if (!(bm.lambda_right < bm.lambda_left)) rep.lambda_drops_at_bad = false;
        // one-sided slopes of m straddling the bad mass
        const MassCurveSample* left = nullptr;
        const MassCurveSample* right = nullptr;
        for (const auto& s : S) {
            if (s.c < bm.c && (!left || s.c > left->c)) left = &s;
            if (s.c > bm.c && (!right || s.c < right->c)) right = &s;
        }
        if (!left || !right) continue;
        try {
            // second-order one-sided stencils approaching the tie from each segment
            double h = dc;
            Profile pl1 = resolve_at_mass(m, g, left->profile.u, left->lambda, bm.c - h, ctl);
            Profile pl2 = resolve_at_mass(m, g, pl1.u, pl1.lambda, bm.c - 2 * h, ctl);
            Profile pl0 = resolve_at_mass(m, g, pl1.u, pl1.lambda, bm.c, ctl);
            Profile pr1 = resolve_at_mass(m, g, right->profile.u, right->lambda, bm.c + h, ctl);
            Profile pr2 = resolve_at_mass(m, g, pr1.u, pr1.lambda, bm.c + 2 * h, ctl);
            Profile pr0 = resolve_at_mass(m, g, pr1.u, pr1.lambda, bm.c, ctl);
            double mprime_minus = (3 * energy(m, g, pl0.u) - 4 * energy(m, g, pl1.u) +
                                   energy(m, g, pl2.u)) /
                                  (2 * h);
            double mprime_plus = (-3 * energy(m, g, pr0.u) + 4 * energy(m, g, pr1.u) -
                                  energy(m, g, pr2.u)) /
                                 (2 * h);
            double gap_lambda = bm.lambda_left - bm.lambda_right;
            double gap_fd = mprime_minus - mprime_plus;
            rep.onesided_gap_mismatch.push_back(std::fabs(gap_lambda - gap_fd));
        } catch (const std::exception&) {
            rep.onesided_gap_mismatch.push_back(1e300);
        }
    }
    return rep;
}

NehariResult nehari_project(const ProblemModel& m, const RadialGrid& g, double lambda,
                            const GridFunction& u) {
    SymmetricTridiagonal A = laplacian_stencil(g);
    GridFunction Au = A.apply(u);
    double K = inner(g, Au, u);
    for (int i = 0; i <= g.points; ++i)
        K += g.w[i] * (m.potential.V(g.r[i], i) - lambda) * u[i] * u[i];

    auto gval = [&](double t) {
        double s = t * K;
        for (int i = 0; i <= g.points; ++i)
            s -= g.w[i] * m.f(g.r[i], t * u[i], i) * u[i];
        return s;
    };
    auto gprime = [&](double t) {
        double s = K;
        for (int i = 0; i <= g.points; ++i)
            s -= g.w[i] * m.f_t(g.r[i], t * u[i], i) * u[i] * u[i];
        return s;
    };

    if (K <= 0)
        throw NoProjection("quadratic form not positive (lambda >= Lambda_0?)");
    double t_lo = 1e-8;
    while (gval(t_lo) <= 0 && t_lo > 1e-300) t_lo *= 0.1;
    if (t_lo <= 1e-300) throw NoProjection("no positive part near t=0");
    double t_hi = std::max(1.0, 2 * t_lo);
    while (gval(t_hi) > 0) {
        t_hi *= 2;
        if (t_hi > 1e8) throw NoProjection("g(t) stays positive: defocusing-dominated input");
    }
    // safeguarded Newton on [t_lo, t_hi]
    double t = 0.5 * (t_lo + t_hi);
    for (int it = 0; it < 200; ++it) {
        double gv = gval(t);
        if (std::fabs(gv) <= 1e-14 * std::fabs(K) * std::max(t, 1.0)) break;
        if (gv > 0) t_lo = t; else t_hi = t;
        double gp = gprime(t);
        double tn = t - gv / gp;
        if (!(tn > t_lo && tn < t_hi) || !std::isfinite(tn)) tn = 0.5 * (t_lo + t_hi);
        if (std::fabs(tn - t) < 1e-16 * t) { t = tn; break; }
        t = tn;
    }
    if (!(gprime(t) < 0))
        throw NoProjection("stationary scaling is not a maximum of the action");
    NehariResult res;
    res.t = t;
    res.on_manifold = GridFunction(g);
    for (int i = 0; i <= g.points; ++i) res.on_manifold[i] = t * u[i];
    return res;
}

GridFunction rescale_to_unit_mass(const GridFunction& u, double c, double pbar, int n) {
    const RadialGrid& g = *u.grid;
    double D = (pbar - 2.0) * n - 4.0;
    if (std::fabs(D) < 1e-12) throw CriticalExponent();
    double alpha = 2.0 / D, beta = (pbar - 2.0) / D;
    double amp = std::pow(c, alpha), dil = std::pow(c, beta);
    GridFunction out(g);
    for (int i = 0; i <= g.points; ++i)
        out[i] = amp * sample_profile(g, u, dil * g.r[i]);
    return out;
}

void write_masscurve_csv(const std::string& path, const MassCurve& mc) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fprintf(fp, "c,lambda,m,mprime_fd,msecond_fd,source_branch,flags\n");
    for (const auto& s : mc.samples) {
        const DerivRow* row = nullptr;
        for (const auto& r : mc.derivative_table)
            if (r.c == s.c) row = &r;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s\n", s.c, s.lambda, s.m,
                     row ? row->mprime_fd : std::nan(""), row ? row->msecond_fd : std::nan(""),
                     s.source_branch, s.flags.c_str());
    }
    for (const auto& bm : mc.bad_masses)
        std::fprintf(fp,
                     "# bad_mass c=%.17g lambda_left=%.17g lambda_right=%.17g tie_gap=%.17g\n",
                     bm.c, bm.lambda_left, bm.lambda_right, bm.energy_tie_gap);
    for (const auto& bv : mc.bad_values)
        std::fprintf(fp, "# bad_value c=%.17g lambda=%.17g\n", bv.c_tilde, bv.lambda_star);
    std::fclose(fp);
}

} // namespace gss
