#include "gss/config.hpp"
#include "gss/errors.hpp"
#include "gss/flow.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gss;

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Output directory precedence: GSS_ATLAS_OUT env, then --out, then config.
std::string resolve_out_dir(const RunConfig& cfg, const std::string& flag_dir) {
    if (const char* env = std::getenv("GSS_ATLAS_OUT"); env && *env) return env;
    if (!flag_dir.empty()) return flag_dir;
    return cfg.output.directory;
}

bool want_json(const RunConfig& cfg, const std::string& flag_format) {
    std::string f = flag_format.empty() ? cfg.output.format : flag_format;
    return f == "json" || f == "both";
}
bool want_csv(const RunConfig& cfg, const std::string& flag_format) {
    std::string f = flag_format.empty() ? cfg.output.format : flag_format;
    return f == "csv" || f == "both";
}

int fail_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const GridMismatch*>(&e) ||
        dynamic_cast<const WrongModelKind*>(&e) || dynamic_cast<const CriticalExponent*>(&e))
        return 2;
    return 3;
}

const char* flag_name(StabilityFlag f) {
    switch (f) {
        case StabilityFlag::Stable: return "stable";
        case StabilityFlag::Unstable: return "unstable";
        default: return "marginal";
    }
}

json certificate_json(const ProblemModel& m, const RadialGrid& g, const Profile& p) {
    SymmetricTridiagonal L = linearize(m, g, p.lambda, p.u);
    SpectrumReport sr = spectrum_report(g, L, p.u, 2);
    double floor = margin_floor(L);
    const Certificate& c = p.certificate;
    json j;
    j["lambda"] = p.lambda;
    j["mass"] = mass(g, p.u);
    j["energy"] = energy(m, g, p.u);
    j["residual_norm"] = p.residual_norm;
    j["iterations"] = p.iterations;
    j["slope"] = sr.slope;
    j["stability"] = flag_name(vk_flag(sr.slope));
    j["stability_note"] = vk_note();
    j["eigenvalues_low"] = sr.eigenvalues_low;
    j["certificate"]["positive"] = c.positive;
    j["certificate"]["radially_decreasing"] = c.radially_decreasing;
    j["certificate"]["morse_index"] = c.morse_index;
    j["certificate"]["nondegeneracy_margin"] = c.nondegeneracy_margin;
    j["certificate"]["margin_floor"] = floor;
    j["certificate"]["decay_rate_fit"] = c.decay_rate_fit;
    j["certificate"]["decay_rate_expected"] = std::sqrt(-p.lambda);
    j["certificate"]["decay_window_ok"] = c.decay_window_ok;
    j["certificate"]["pohozaev_residual"] = c.pohozaev;
    j["certified"] = c.a1_pass(floor);
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fwrite(text.data(), 1, text.size(), fp);
    std::fclose(fp);
}

// Deterministic seed ladder for `solve` without --seed: Gaussian bumps over a
// small grid of widths and amplitudes around the linear-decay length 1/sqrt(-lambda).
Profile ladder_solve(const ProblemModel& m, const RadialGrid& g, double lambda, double tol,
                     int max_iter) {
    double k = std::sqrt(-lambda);
    double p1 = m.terms.front().power;
    double a0 = std::pow(2.0 * (-lambda) + 1.0, 1.0 / (p1 - 2.0));
    std::vector<double> widths{2.0 / k, 1.0 / k, 4.0 / k, 8.0 / k};
    std::vector<double> amps{a0, 2 * a0, 0.5 * a0, 4 * a0, 8 * a0};
    std::string last_err = "no seed attempted";
    for (double w : widths) {
        for (double a : amps) {
            GridFunction u0(g);
            for (int i = 0; i <= g.points; ++i) {
                double x = g.r[i] / w;
                u0[i] = a * std::exp(-x * x);
            }
            try {
                return newton_solve(m, g, lambda, u0, tol, max_iter);
            } catch (const std::exception& e) {
                last_err = e.what();
            }
        }
    }
    throw NoConvergence(max_iter, std::nan(""));
}

json branch_json(const Branch& b) {
    json j;
    j["end_reason"] = b.end_reason;
    j["points"] = json::array();
    for (const auto& bp : b.points) {
        json p;
        p["lambda"] = bp.lambda;
        p["Q"] = bp.q;
        p["E"] = bp.e;
        p["slope"] = bp.slope;
        p["eigenvalues_low"] = bp.spectrum.eigenvalues_low;
        p["morse_index"] = bp.spectrum.morse_index;
        p["decay_fit"] = bp.profile.certificate.decay_rate_fit;
        p["pohozaev"] = bp.profile.certificate.pohozaev;
        j["points"].push_back(std::move(p));
    }
    j["folds"] = json::array();
    for (const auto& f : b.folds) {
        json e;
        e["lambda_star"] = f.lambda_star;
        e["Q_star"] = f.q_star;
        e["extremum"] = std::string(1, f.extremum);
        e["one_sided"] = f.one_sided;
        j["folds"].push_back(std::move(e));
    }
    return j;
}

json masscurve_json(const MassCurve& mc) {
    json j;
    j["samples"] = json::array();
    for (const auto& s : mc.samples) {
        json e;
        e["c"] = s.c;
        e["lambda"] = s.lambda;
        e["m"] = s.m;
        e["source_branch"] = s.source_branch;
        e["multiplicity"] = s.multiplicity;
        e["flags"] = s.flags;
        j["samples"].push_back(std::move(e));
    }
    j["bad_values"] = json::array();
    for (const auto& bv : mc.bad_values)
        j["bad_values"].push_back({{"c_tilde", bv.c_tilde}, {"lambda_star", bv.lambda_star}});
    j["bad_masses"] = json::array();
    for (const auto& bm : mc.bad_masses)
        j["bad_masses"].push_back({{"c", bm.c},
                                   {"lambda_left", bm.lambda_left},
                                   {"lambda_right", bm.lambda_right},
                                   {"energy_tie_gap", bm.energy_tie_gap},
                                   {"m", bm.m_at}});
    j["derivatives"] = json::array();
    for (const auto& d : mc.derivative_table)
        j["derivatives"].push_back({{"c", d.c},
                                    {"mprime_fd", d.mprime_fd},
                                    {"lambda", d.lambda_c},
                                    {"msecond_fd", d.msecond_fd},
                                    {"lamprime_fd", d.lamprime_fd}});
    return j;
}

int cmd_solve(const RunConfig& cfg, const std::string& out_dir, const std::string& format,
              double lambda, const std::string& seed_path) {
    RadialGrid g = cfg.make_grid();
    Profile p;
    if (!seed_path.empty()) {
        Profile seed = load_solution(seed_path, g);
        p = newton_solve(cfg.model, g, lambda, seed.u, cfg.solver.tol, cfg.solver.max_iter);
    } else {
        p = ladder_solve(cfg.model, g, lambda, cfg.solver.tol, cfg.solver.max_iter);
    }
    check_profile(cfg.model, g, p);

    fs::create_directories(out_dir);
    save_solution(out_dir + "/solution.dat", g, p);
    json cert = certificate_json(cfg.model, g, p);
    write_text(out_dir + "/certificate.json", cert.dump(2) + "\n");
    (void)format;

    std::printf("solve: lambda=%s Q=%s E=%s certified=%s\n", fmt17(p.lambda).c_str(),
                fmt17(cert["mass"].get<double>()).c_str(),
                fmt17(cert["energy"].get<double>()).c_str(),
                cert["certified"].get<bool>() ? "yes" : "no");
    return cert["certified"].get<bool>() ? 0 : 4;
}

int cmd_continue(const RunConfig& cfg, const std::string& out_dir, const std::string& format,
                 const std::string& seed_path) {
    RadialGrid g = cfg.make_grid();
    Profile seed = load_solution(seed_path, g);
    // re-polish the seed at its own multiplier so the trace starts converged
    seed = newton_solve(cfg.model, g, seed.lambda, seed.u, cfg.solver.tol, cfg.solver.max_iter);

    StepControls ctl = cfg.step_controls();
    Branch b = continue_branch(cfg.model, g, seed, cfg.continuation.lambda_start,
                               cfg.continuation.lambda_end, ctl);
    detect_folds(cfg.model, g, b, ctl);

    fs::create_directories(out_dir);
    if (want_csv(cfg, format)) write_branch_csv(out_dir + "/branch.csv", b);
    write_branch_points(out_dir + "/branch_points", g, b);
    if (want_json(cfg, format)) write_text(out_dir + "/branch.json", branch_json(b).dump(2) + "\n");

    std::printf("continue: %zu points, %zu folds, end=%s\n", b.points.size(), b.folds.size(),
                b.end_reason.c_str());
    for (const auto& f : b.folds)
        std::printf("  fold lambda*=%s Q*=%s (%c)\n", fmt17(f.lambda_star).c_str(),
                    fmt17(f.q_star).c_str(), f.extremum);
    return 0;
}

std::vector<Branch> load_branches(const std::string& dir, const ProblemModel& m,
                                  const RadialGrid& g) {
    std::vector<Branch> out;
    bool direct = false;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename().string().rfind("point_", 0) == 0)
            direct = true;
    if (direct) {
        out.push_back(load_branch_points(dir, m, g));
        return out;
    }
    std::vector<std::string> subs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) subs.push_back(e.path().string());
    std::sort(subs.begin(), subs.end());
    for (const auto& s : subs) {
        bool has_points = false;
        for (const auto& e : fs::directory_iterator(s))
            if (e.is_regular_file() && e.path().filename().string().rfind("point_", 0) == 0)
                has_points = true;
        if (has_points) out.push_back(load_branch_points(s, m, g));
    }
    if (out.empty()) throw std::runtime_error("no branch point files under " + dir);
    return out;
}

int cmd_masscurve(const RunConfig& cfg, const std::string& out_dir, const std::string& format,
                  const std::string& branches_dir, int threads) {
    RadialGrid g = cfg.make_grid();
    std::vector<Branch> branches = load_branches(branches_dir, cfg.model, g);
    StepControls sctl = cfg.step_controls();
    for (auto& b : branches) detect_folds(cfg.model, g, b, sctl);

    MassCurveControls ctl = cfg.masscurve_controls(threads);
    MassCurve mc = build_mass_curve(cfg.model, g, branches, cfg.c_grid(), ctl);
    DerivReport dr = derivative_checks(cfg.model, g, mc, ctl);

    fs::create_directories(out_dir);
    if (want_csv(cfg, format)) write_masscurve_csv(out_dir + "/masscurve.csv", mc);
    if (want_json(cfg, format))
        write_text(out_dir + "/masscurve.json", masscurve_json(mc).dump(2) + "\n");

    std::printf("masscurve: %zu samples from %zu branches\n", mc.samples.size(), branches.size());
    for (const auto& bv : mc.bad_values)
        std::printf("  bad value: fold mass c~=%s at lambda*=%s\n", fmt17(bv.c_tilde).c_str(),
                    fmt17(bv.lambda_star).c_str());
    for (const auto& bm : mc.bad_masses)
        std::printf("  bad mass: c=%s lambda %s -> %s (tie gap %s)\n", fmt17(bm.c).c_str(),
                    fmt17(bm.lambda_left).c_str(), fmt17(bm.lambda_right).c_str(),
                    fmt17(bm.energy_tie_gap).c_str());
    if (mc.bad_masses.empty()) std::printf("  no bad masses\n");
    std::printf("  derivative checks: worst |m'-lambda|=%s worst |m''-lambda'|=%s max m''=%s\n",
                fmt17(dr.worst_mprime_vs_lambda).c_str(),
                fmt17(dr.worst_msecond_vs_lamprime).c_str(), fmt17(dr.max_msecond).c_str());
    return 0;
}

int cmd_flow(const RunConfig& cfg, const std::string& out_dir, const std::string& format,
             double c, int threads) {
    RadialGrid g = cfg.make_grid();
    auto runs = flow_multistart(cfg.model, g, c, cfg.flow.widths, cfg.flow.dt, cfg.flow.tol,
                                cfg.flow.max_steps, threads);
    int best = best_flow(runs);
    if (best < 0) {
        double last = runs.empty() || runs[0].residual_history.empty()
                          ? 0.0
                          : runs[0].residual_history.back();
        throw NoConvergence(cfg.flow.max_steps, last);
    }
    const FlowResult& fr = runs[best];

    fs::create_directories(out_dir);
    save_solution(out_dir + "/flow_solution.dat", g, fr.profile);
    if (want_csv(cfg, format)) {
        std::string hist = "step,E,residual\n";
        for (std::size_t i = 0; i < fr.residual_history.size(); ++i)
            hist += std::to_string(i) + "," + fmt17(fr.energy_history[i]) + "," +
                    fmt17(fr.residual_history[i]) + "\n";
        write_text(out_dir + "/flow_history.csv", hist);
    }
    json meta;
    meta["mass"] = c;
    meta["dt"] = cfg.flow.dt;
    meta["seed_widths"] = cfg.flow.widths;
    meta["seeding"] = "deterministic Gaussian multi-start, no RNG";
    meta["selected_width"] = cfg.flow.widths[best];
    meta["lambda"] = fr.profile.lambda;
    meta["energy"] = fr.m_estimate;
    meta["iterations"] = fr.iterations;
    json all = json::array();
    for (std::size_t k = 0; k < runs.size(); ++k)
        all.push_back({{"width", cfg.flow.widths[k]},
                       {"converged", runs[k].converged},
                       {"energy", runs[k].m_estimate},
                       {"lambda", runs[k].profile.lambda},
                       {"iterations", runs[k].iterations}});
    meta["runs"] = all;
    write_text(out_dir + "/flow_meta.json", meta.dump(2) + "\n");
    if (want_json(cfg, format)) {
        json hist;
        hist["energy"] = fr.energy_history;
        hist["residual"] = fr.residual_history;
        write_text(out_dir + "/flow_history.json", hist.dump(2) + "\n");
    }

    std::printf("flow: m(%s) ~ %s at lambda=%s after %d steps (width %s)\n", fmt17(c).c_str(),
                fmt17(fr.m_estimate).c_str(), fmt17(fr.profile.lambda).c_str(), fr.iterations,
                fmt17(cfg.flow.widths[best]).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify: invariant suites plus closed-form oracles where available.

struct VerifyState {
    int checks = 0;
    int failures = 0;
    void report(bool ok, const std::string& name, const std::string& detail) {
        ++checks;
        if (!ok) ++failures;
        std::printf("%s  %-28s %s\n", ok ? "ok  " : "FAIL", name.c_str(), detail.c_str());
    }
};

bool is_cubic_1d(const ProblemModel& m) {
    return m.dim == 1 && m.single_pure_power() && m.potential.kind == PotentialKind::Zero &&
           m.terms[0].coefficient == 1.0 && m.terms[0].power == 4.0;
}

int cmd_verify(const RunConfig& cfg, bool all) {
    RadialGrid g = cfg.make_grid();
    const ProblemModel& m = cfg.model;
    VerifyState vs;

    // quadrature closes the ball volume exactly
    double wsum = 0;
    for (double w : g.w) wsum += w;
    double ball = surface_area(g.dim) * std::pow(g.radius, g.dim) / g.dim;
    vs.report(std::fabs(wsum - ball) <= 1e-13 * ball, "quadrature_total",
              "sum w = " + fmt17(wsum) + ", ball = " + fmt17(ball));

    // weighted self-adjointness of the discrete operator
    {
        SymmetricTridiagonal A = laplacian_stencil(g);
        GridFunction x(g), y(g);
        unsigned long long s = 88172645463325252ull;
        auto rnd = [&]() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            return static_cast<double>(s % 2000000ull) / 1e6 - 1.0;
        };
        for (int i = 0; i <= g.points; ++i) { x[i] = rnd(); y[i] = rnd(); }
        double axy = inner(g, A.apply(x), y), xay = inner(g, x, A.apply(y));
        double scale = std::max(std::fabs(axy), 1.0);
        vs.report(std::fabs(axy - xay) <= 1e-11 * scale, "operator_symmetry",
                  "|<Ax,y>-<x,Ay>| = " + fmt17(std::fabs(axy - xay)));
    }

    // nonlinearity derivative consistency at pseudo-random (r,t)
    {
        unsigned long long s = 1181783497276652981ull;
        auto rnd = [&]() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            return static_cast<double>(s % 1000000ull) / 1e6;
        };
        double worst = 0;
        for (int k = 0; k < 20; ++k) {
            double r = rnd() * g.radius, t = rnd() * 4.0 - 2.0, eps = 1e-5;
            double dF = (m.F(r, t + eps) - m.F(r, t - eps)) / (2 * eps);
            double df = (m.f(r, t + eps) - m.f(r, t - eps)) / (2 * eps);
            double sc = std::max({1.0, std::fabs(m.f(r, t)), std::fabs(m.f_t(r, t))});
            worst = std::max(worst, std::fabs(dF - m.f(r, t)) / sc);
            worst = std::max(worst, std::fabs(df - m.f_t(r, t)) / sc);
        }
        vs.report(worst <= 1e-6, "nonlinearity_consistency", "worst FD mismatch = " + fmt17(worst));
    }

    // probe solve in the middle of the continuation window
    double la = cfg.continuation.lambda_start, lb = cfg.continuation.lambda_end;
    double lam_probe = (lb <= -1.0 && -1.0 <= la) ? -1.0 : 0.5 * (la + lb);
    Profile probe;
    bool have_probe = false;
    try {
        probe = ladder_solve(m, g, lam_probe, cfg.solver.tol, cfg.solver.max_iter);
        check_profile(m, g, probe);
        have_probe = true;
        SymmetricTridiagonal L = linearize(m, g, probe.lambda, probe.u);
        bool cert = probe.certificate.a1_pass(margin_floor(L));
        vs.report(cert, "probe_certificate",
                  "lambda = " + fmt17(lam_probe) +
                      ", margin = " + fmt17(probe.certificate.nondegeneracy_margin));
    } catch (const std::exception& e) {
        vs.report(false, "probe_solve", std::string("lambda = ") + fmt17(lam_probe) + ": " + e.what());
    }

    if (have_probe) {
        vs.report(std::fabs(probe.certificate.pohozaev) <= 1e-4, "pohozaev",
                  "residual = " + fmt17(probe.certificate.pohozaev));

        double expect = std::sqrt(-lam_probe);
        if (probe.certificate.decay_window_ok) {
            double rel = std::fabs(probe.certificate.decay_rate_fit - expect) / expect;
            vs.report(rel <= 0.02, "decay_rate",
                      "fit = " + fmt17(probe.certificate.decay_rate_fit) + ", sqrt(-lambda) = " +
                          fmt17(expect));
        } else {
            vs.report(true, "decay_rate",
                      "tail below quadrature floor before 0.8R; fit skipped (diagnostic only)");
        }

        SymmetricTridiagonal L = linearize(m, g, probe.lambda, probe.u);
        SpectrumReport sr = spectrum_report(g, L, probe.u, 2);
        GridFunction back = L.apply(sr.adjoint_state);
        double num = 0, den = 0;
        for (int i = 0; i <= g.points; ++i) {
            num += g.w[i] * (back[i] - probe.u[i]) * (back[i] - probe.u[i]);
            den += g.w[i] * probe.u[i] * probe.u[i];
        }
        double adj_rel = std::sqrt(num / den);
        vs.report(adj_rel <= 1e-9, "adjoint_residual", "|L z - u| / |u| = " + fmt17(adj_rel));

        // slope identity against a centered finite difference of Q(lambda).
        // The re-solve tolerance must sit above the rounding floor of the
        // Newton residual, which scales with the operator norm (~1/h^2).
        try {
            double hh = 1e-3;
            double tol_fd = std::max(1e-11, 12 * std::numeric_limits<double>::epsilon() *
                                                L.norm_bound() *
                                                std::max(1.0, norm_inf(probe.u)));
            Profile pp = newton_solve(m, g, lam_probe + hh, probe.u, tol_fd, cfg.solver.max_iter);
            Profile pm = newton_solve(m, g, lam_probe - hh, probe.u, tol_fd, cfg.solver.max_iter);
            double fd = (mass(g, pp.u) - mass(g, pm.u)) / (2 * hh);
            double rel = std::fabs(sr.slope - fd) / std::max(1e-30, std::fabs(sr.slope));
            vs.report(rel <= 1e-3, "slope_identity",
                      "<L^{-1}u,u> = " + fmt17(sr.slope) + ", dQ/dlambda = " + fmt17(fd));

            double efd = (energy(m, g, pp.u) - energy(m, g, pm.u)) / (2 * hh);
            double mis = std::fabs(efd - lam_probe * fd) / std::max(1.0, std::fabs(efd));
            vs.report(mis <= 1e-4, "energy_identity",
                      "E' = " + fmt17(efd) + ", lambda Q' = " + fmt17(lam_probe * fd));
        } catch (const std::exception& e) {
            vs.report(false, "slope_identity", e.what());
        }

        try {
            NehariResult nr = nehari_project(m, g, probe.lambda, probe.u);
            vs.report(std::fabs(nr.t - 1.0) <= 1e-8, "nehari_fixed_point",
                      "t(u) = " + fmt17(nr.t));
        } catch (const std::exception& e) {
            vs.report(false, "nehari_fixed_point", e.what());
        }
    }

    if (have_probe && is_cubic_1d(m)) {
        double q = mass(g, probe.u);
        double qexp = 2.0 * std::sqrt(-lam_probe);
        vs.report(std::fabs(q - qexp) <= 1e-4 * qexp, "cubic_mass_law",
                  "Q = " + fmt17(q) + ", 2 sqrt(-lambda) = " + fmt17(qexp));

        SymmetricTridiagonal L = linearize(m, g, probe.lambda, probe.u);
        SpectrumReport sr = spectrum_report(g, L, probe.u, 1);
        double sexp = -1.0 / std::sqrt(-lam_probe);
        vs.report(std::fabs(sr.slope - sexp) <= 1e-4 * std::fabs(sexp), "cubic_slope_law",
                  "slope = " + fmt17(sr.slope) + ", -1/sqrt(-lambda) = " + fmt17(sexp));

        try {
            MassCurveControls mctl = cfg.masscurve_controls();
            Profile pc = resolve_at_mass(m, g, probe.u, probe.lambda, 2.0, mctl);
            double lam_exp = -1.0;   // lambda(c) = -c^2/4 at c = 2
            double m_exp = -2.0 / 3.0;  // m(c) = -c^3/12 at c = 2
            double e = energy(m, g, pc.u);
            vs.report(std::fabs(pc.lambda - lam_exp) <= 1e-4, "cubic_multiplier_law",
                      "lambda(2) = " + fmt17(pc.lambda) + ", expected " + fmt17(lam_exp));
            vs.report(std::fabs(e - m_exp) <= 1e-4, "cubic_energy_law",
                      "m(2) = " + fmt17(e) + ", expected " + fmt17(m_exp));
        } catch (const std::exception& e) {
            vs.report(false, "cubic_multiplier_law", e.what());
        }
    }

    if (all && have_probe) {
        try {
            StepControls ctl = cfg.step_controls();
            Branch b = continue_branch(m, g, probe, la, lb, ctl);
            vs.report(b.points.size() >= 3, "branch_trace",
                      std::to_string(b.points.size()) + " points, end = " + b.end_reason);
            IdentityReport ir = branch_identities(m, g, b, 6);
            vs.report(ir.slope_fd_ratio >= 80 && ir.slope_fd_ratio <= 120, "branch_slope_order",
                      "coarse/fine mismatch ratio = " + fmt17(ir.slope_fd_ratio));
            vs.report(ir.worst_adjoint <= 1e-9, "branch_adjoint",
                      "worst relative adjoint residual = " + fmt17(ir.worst_adjoint));
            vs.report(ir.worst_energy_identity <= 1e-4, "branch_energy_identity",
                      "worst |E' - lambda Q'| = " + fmt17(ir.worst_energy_identity));
            detect_folds(m, g, b, ctl);
            std::string fl;
            for (const auto& f : b.folds) fl += " lambda*=" + fmt17(f.lambda_star);
            vs.report(true, "fold_scan",
                      std::to_string(b.folds.size()) + " folds" + (fl.empty() ? "" : ":" + fl));
        } catch (const std::exception& e) {
            vs.report(false, "branch_trace", e.what());
        }
    }

    std::printf("verify: %d checks, %d failures\n", vs.checks, vs.failures);
    return vs.failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"normalized ground states on radial grids: solve, continue, masscurve, flow, verify"};
    app.require_subcommand(1);

    std::string config_path, out_flag, format_flag, seed_path, branches_dir;
    double lambda = 0.0, mass_c = 0.0;
    int threads = 1;
    bool verify_all = false;

    app.add_option("--threads", threads, "worker pool size for independent tasks")
        ->check(CLI::Range(1, 256));

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_flag, "output directory (GSS_ATLAS_OUT overrides)");
        sub->add_option("--format", format_flag, "csv | json | both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "one profile at fixed multiplier");
    add_common(solve);
    solve->add_option("--lambda", lambda, "multiplier (must be < 0)")->required();
    solve->add_option("--seed", seed_path, "seed solution file");

    CLI::App* cont = app.add_subcommand("continue", "trace a branch from a seed solution");
    add_common(cont);
    cont->add_option("--seed", seed_path, "seed solution file")->required();

    CLI::App* mcv = app.add_subcommand("masscurve", "assemble the ground-state mass curve");
    add_common(mcv);
    mcv->add_option("--branches", branches_dir, "directory of saved branch points")->required();

    CLI::App* flw = app.add_subcommand("flow", "normalized gradient-flow minimization at fixed mass");
    add_common(flw);
    flw->add_option("--mass", mass_c, "constraint mass c > 0")->required();

    CLI::App* ver = app.add_subcommand("verify", "run invariant suites and closed-form oracles");
    ver->add_option("--config", config_path, "run configuration file")->required();
    ver->add_flag("--all", verify_all, "include the branch-level identity suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        std::string out_dir = resolve_out_dir(cfg, out_flag);

        if (solve->parsed()) {
            if (!(lambda < 0.0)) {
                std::fprintf(stderr, "error: --lambda must be negative (got %s)\n",
                             fmt17(lambda).c_str());
                return 2;
            }
            return cmd_solve(cfg, out_dir, format_flag, lambda, seed_path);
        }
        if (cont->parsed()) return cmd_continue(cfg, out_dir, format_flag, seed_path);
        if (mcv->parsed()) return cmd_masscurve(cfg, out_dir, format_flag, branches_dir, threads);
        if (flw->parsed()) {
            if (!(mass_c > 0.0)) {
                std::fprintf(stderr, "error: --mass must be positive\n");
                return 2;
            }
            return cmd_flow(cfg, out_dir, format_flag, mass_c, threads);
        }
        if (ver->parsed()) return cmd_verify(cfg, verify_all);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return fail_code(e);
    }
    return 2;
}
