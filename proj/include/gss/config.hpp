#pragma once
#include "gss/branch.hpp"
#include "gss/masscurve.hpp"
#include "gss/model.hpp"
#include <istream>
#include <string>
#include <vector>

namespace gss {

struct GridSpec {
    double radius = 30.0;
    int points = 6000;
};

struct SolverSpec {
    double tol = 1e-10;
    int max_iter = 40;
};

struct ContinuationSpec {
    double lambda_start = -0.25;  // shallow end; the trace runs toward lambda_end < lambda_start
    double lambda_end = -4.0;
    double ds_init = 0.05;
    double ds_min = 1e-7;
    double ds_max = 0.5;
    int max_steps = 2000;
};

struct MassCurveSpec {
    double c_min = 0.5;
    double c_max = 4.0;
    int c_count = 33;
    bool log_scale = true;
    double dc_fd = 1e-3;
};

struct FlowSpec {
    double dt = 0.1;
    double tol = 1e-8;
    int max_steps = 50000;
    std::vector<double> widths{0.5, 1.0, 2.0};
};

struct OutputSpec {
    std::string directory = ".";
    std::string format = "csv";   // csv | json | both
};

struct RunConfig {
    ProblemModel model;
    GridSpec grid;
    SolverSpec solver;
    ContinuationSpec continuation;
    MassCurveSpec masscurve;
    FlowSpec flow;
    OutputSpec output;

    RadialGrid make_grid() const { return RadialGrid(model.dim, grid.radius, grid.points); }
    std::vector<double> c_grid() const;
    StepControls step_controls() const;
    MassCurveControls masscurve_controls(int threads = 1) const;
};

// Flat sectioned key = value text. '#' and ';' start comments, '[section]'
// headers, no nesting. Unknown or malformed keys raise ConfigError with the
// offending "section.key" named. Grammar documented in README.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in, const std::string& origin);

} // namespace gss
