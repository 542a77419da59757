// Command-line front end: runs the series solver and diagnostics on the
// built-in HIV/CD8+ preset or a user model config, writing JSON/CSV artifacts.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hatm/csv.hpp"
#include "hatm/diagnostics.hpp"
#include "hatm/engine.hpp"
#include "hatm/model_config.hpp"
#include "hatm/series_io.hpp"

namespace {

struct ModelOptions {
    std::string preset;
    std::string model_path;
};

struct GridSpec {
    double lo = -1.5, hi = 0.0, step = 0.01;
};

struct RangeSpec {
    double lo = 0.0, hi = 1.0;
};

hatm::QuadraticOdeSystem resolve_model(const ModelOptions& opts) {
    if (opts.preset.empty() == opts.model_path.empty())
        throw hatm::ConfigError("exactly one of --preset/--model is required");
    if (!opts.preset.empty())
        return hatm::load_system("{\"preset\": \"" + opts.preset + "\"}");
    std::ifstream in(opts.model_path);
    if (!in) throw hatm::ConfigError("cannot open model config: " + opts.model_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return hatm::load_system(buf.str());
}

void add_model_flags(CLI::App* cmd, ModelOptions& opts) {
    cmd->add_option("--preset", opts.preset, "built-in model preset (hiv-cd8)");
    cmd->add_option("--model", opts.model_path, "path to a model config JSON document");
}

std::vector<double> grid_points(const GridSpec& g) {
    if (!(g.step > 0.0) || !(g.lo <= g.hi)) throw hatm::ConfigError("--grid: need lo <= hi and step > 0");
    std::vector<double> pts;
    for (int i = 0;; ++i) {
        const double x = g.lo + i * g.step;
        if (x > g.hi + 1e-12) break;
        pts.push_back(std::min(x, g.hi));
    }
    return pts;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw hatm::ConfigError("cannot open output file: " + path);
    return out;
}

void summary(const std::string& command, int order, std::optional<double> hbar,
             const std::string& out_path) {
    std::cout << command << " N=" << order;
    if (hbar) std::cout << " hbar=" << *hbar;
    std::cout << " -> " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series solver and diagnostics for quadratic ODE systems"};
    app.require_subcommand(1);

    ModelOptions model;
    int order = 5;
    double hbar = -0.8;
    double t_fixed = 1.0;
    GridSpec grid;
    RangeSpec t_range;
    double rel_tol = 1e-10, abs_tol = 1e-12;
    int samples = 201;
    std::string out_path = "out";
    std::string series_path;

    auto add_common = [&](CLI::App* cmd) {
        add_model_flags(cmd, model);
        cmd->add_option("-N,--order", order, "series truncation order")
            ->check([](const std::string& s) -> std::string {
                int v = 0;
                const char* end = s.data() + s.size();
                auto [p, ec] = std::from_chars(s.data(), end, v);
                if (ec != std::errc{} || p != end || v < 0 || v > hatm::kMaxOrder)
                    return "N must be in [0, 30]";
                return {};
            });
        cmd->add_option("--out", out_path, "output file path");
    };

    auto* solve_cmd = app.add_subcommand("solve", "run the deformation recurrence, emit series JSON");
    add_common(solve_cmd);

    auto* curve_cmd = app.add_subcommand("hbar-curve", "partial sums at fixed t over an hbar grid (CSV per state)");
    add_common(curve_cmd);
    curve_cmd->add_option("--t", t_fixed, "fixed evaluation time");
    curve_cmd->add_option("--grid", [&grid](const std::vector<std::string>& v) {
        return std::sscanf(v[0].c_str(), "%lf:%lf:%lf", &grid.lo, &grid.hi, &grid.step) == 3;
    }, "hbar grid as lo:hi:step");

    auto* residual_cmd = app.add_subcommand("residual", "residual error functions on a t grid (CSV)");
    add_common(residual_cmd);
    residual_cmd->add_option("--hbar", hbar, "convergence-control parameter");
    residual_cmd->add_option("--t-range", [&t_range](const std::vector<std::string>& v) {
        return std::sscanf(v[0].c_str(), "%lf:%lf", &t_range.lo, &t_range.hi) == 2;
    }, "time range as lo:hi");
    residual_cmd->add_option("--samples", samples, "number of t samples");

    auto* opt_cmd = app.add_subcommand("optimal-hbar", "grid point minimizing the integrated squared residual");
    add_common(opt_cmd);
    opt_cmd->add_option("--grid", [&grid](const std::vector<std::string>& v) {
        return std::sscanf(v[0].c_str(), "%lf:%lf:%lf", &grid.lo, &grid.hi, &grid.step) == 3;
    }, "hbar grid as lo:hi:step");
    opt_cmd->add_option("--t-range", [&t_range](const std::vector<std::string>& v) {
        return std::sscanf(v[0].c_str(), "%lf:%lf", &t_range.lo, &t_range.hi) == 2;
    }, "time range as lo:hi");

    auto* compare_cmd = app.add_subcommand("compare", "partial sums vs adaptive Runge-Kutta reference (CSV)");
    add_common(compare_cmd);
    compare_cmd->add_option("--hbar", hbar, "convergence-control parameter");
    compare_cmd->add_option("--t-range", [&t_range](const std::vector<std::string>& v) {
        return std::sscanf(v[0].c_str(), "%lf:%lf", &t_range.lo, &t_range.hi) == 2;
    }, "time range as lo:hi");
    compare_cmd->add_option("--rel-tol", rel_tol, "reference integrator relative tolerance");
    compare_cmd->add_option("--abs-tol", abs_tol, "reference integrator absolute tolerance");

    auto* telescope_cmd = app.add_subcommand("telescope", "telescoping-identity defect of a solved series");
    add_common(telescope_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "re-ingest a series JSON and report partial-sum evaluations");
    verify_cmd->add_option("--series", series_path, "series JSON emitted by solve")->required();
    verify_cmd->add_option("--hbar", hbar, "evaluation hbar");
    verify_cmd->add_option("--t", t_fixed, "evaluation time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (verify_cmd->parsed()) {
            std::ifstream in(series_path);
            if (!in) throw hatm::ConfigError("cannot open series file: " + series_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            for (const auto& [name, sum] : hatm::partial_sums_from_json(buf.str()))
                std::cout << name << " " << hatm::format_real(hatm::poly_eval(sum, hbar, t_fixed))
                          << "\n";
            return 0;
        }

        const auto sys = resolve_model(model);

        if (solve_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            auto out = open_output(out_path);
            out << hatm::series_to_json(series).dump(2) << "\n";
            summary("solve", order, std::nullopt, out_path);
        } else if (curve_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            const auto pts = grid_points(grid);
            auto out = open_output(out_path);
            // one block per state, prefixed by the state name
            for (int i = 0; i < sys.state_count(); ++i) {
                out << "# state " << sys.names[i] << "\n";
                hatm::write_hbar_curve_csv(out, hatm::hbar_curve(series, i, t_fixed, pts));
                const auto iv = hatm::detect_plateau(hatm::hbar_curve(series, i, t_fixed, pts));
                if (iv)
                    out << "# plateau " << hatm::format_real(iv->lo) << " "
                        << hatm::format_real(iv->hi) << "\n";
            }
            summary("hbar-curve", order, std::nullopt, out_path);
        } else if (residual_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            const auto grid_t = hatm::uniform_grid(t_range.lo, t_range.hi, samples);
            auto out = open_output(out_path);
            hatm::write_residual_grid_csv(out, hatm::residual_grid(series, hbar, grid_t), sys.names);
            summary("residual", order, hbar, out_path);
        } else if (opt_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            const double best = hatm::optimal_hbar(series, grid_points(grid), t_range.lo, t_range.hi);
            auto out = open_output(out_path);
            out << hatm::format_real(best) << "\n";
            summary("optimal-hbar", order, best, out_path);
        } else if (compare_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            const auto oracle = hatm::rk_reference(sys, t_range.hi, rel_tol, abs_tol);
            auto out = open_output(out_path);
            hatm::write_comparison_csv(out, series, hbar, oracle, t_range.lo, t_range.hi);
            summary("compare", order, hbar, out_path);
        } else if (telescope_cmd->parsed()) {
            const auto series = hatm::solve(sys, order);
            auto out = open_output(out_path);
            out << hatm::format_real(hatm::telescoping_check(series)) << "\n";
            summary("telescope", order, std::nullopt, out_path);
        }
    } catch (const hatm::StepUnderflow& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
