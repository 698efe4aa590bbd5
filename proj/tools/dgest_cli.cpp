// Batch harness for the IPDG solver and estimator studies.
//
//   dgest solve  --preset heat_decay --p 1 --levels 1
//   dgest study  --preset quasilinear_smooth --p 1,2 --levels 3 --out results
//   dgest verify --seed 7
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 numerical divergence.

#include "dgest/report.hpp"
#include "dgest/runner.hpp"
#include "dgest/solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_degrees(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

// Plain key = value file; '#' starts a comment.
void apply_config_file(const std::string& path, dgest::StudyConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "preset") cfg.preset = value;
        else if (key == "p") cfg.degrees = parse_degrees(value);
        else if (key == "levels") cfg.levels = std::stoi(value);
        else if (key == "theta") cfg.theta = std::stoi(value);
        else if (key == "c_sigma") cfg.c_sigma = std::stod(value);
        else if (key == "dt") cfg.dt = std::stod(value);
        else if (key == "dt_scale") cfg.dt_scale = std::stod(value);
        else if (key == "t_final") cfg.t_final = std::stod(value);
        else if (key == "out") cfg.out_dir = value;
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "base_nx") cfg.base_nx = std::stoi(value);
        else if (key == "dump_snapshots") cfg.dump_snapshots = (value == "1" || value == "true");
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
}

struct CliOptions {
    std::string config_path;
    std::string preset, degrees, out_dir;
    int levels = 0, theta = -5, base_nx = 0;
    double c_sigma = 0.0, dt = -1.0, t_final = 0.0, dt_scale = 0.0;
    unsigned long long seed = 0;
    bool dump_snapshots = false;
    bool dump_mesh = false;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "key = value configuration file");
    cmd->add_option("--preset", opt.preset,
                    "problem preset (heat_decay, quasilinear_smooth, steady_quasilinear)");
    cmd->add_option("--p", opt.degrees, "polynomial degrees, comma separated");
    cmd->add_option("--levels", opt.levels, "number of uniform refinement levels");
    cmd->add_option("--theta", opt.theta, "IPDG variant: -1, 0 or 1");
    cmd->add_option("--c-sigma", opt.c_sigma, "penalty constant (> 1)");
    cmd->add_option("--dt", opt.dt, "time step; 0 selects dt_scale*h^{p+1}");
    cmd->add_option("--dt-scale", opt.dt_scale, "automatic time step scale");
    cmd->add_option("--t-final", opt.t_final, "final time override");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "random seed for the property suites");
    cmd->add_option("--base-nx", opt.base_nx, "cells per side on the coarsest level");
    cmd->add_flag("--dump-snapshots", opt.dump_snapshots, "write per-step field CSV dumps");
    cmd->add_flag("--dump-mesh", opt.dump_mesh, "write a plain-text mesh dump");
}

dgest::StudyConfig build_config(const CLI::App* cmd, const CliOptions& opt) {
    dgest::StudyConfig cfg;
    if (cmd->count("--config")) apply_config_file(opt.config_path, cfg);
    if (cmd->count("--preset")) cfg.preset = opt.preset;
    if (cmd->count("--p")) cfg.degrees = parse_degrees(opt.degrees);
    if (cmd->count("--levels")) cfg.levels = opt.levels;
    if (cmd->count("--theta")) cfg.theta = opt.theta;
    if (cmd->count("--c-sigma")) cfg.c_sigma = opt.c_sigma;
    if (cmd->count("--dt")) cfg.dt = opt.dt;
    if (cmd->count("--dt-scale")) cfg.dt_scale = opt.dt_scale;
    if (cmd->count("--t-final")) cfg.t_final = opt.t_final;
    if (cmd->count("--out")) cfg.out_dir = opt.out_dir;
    if (cmd->count("--seed")) cfg.seed = opt.seed;
    if (cmd->count("--base-nx")) cfg.base_nx = opt.base_nx;
    if (cmd->count("--dump-snapshots")) cfg.dump_snapshots = true;
    return cfg;
}

int cmd_solve(const dgest::StudyConfig& cfg, bool dump_mesh) {
    const dgest::SolveResult result = dgest::run_solve(cfg);
    dgest::StudyResult wrapped;
    wrapped.rows.push_back(result.row);
    const std::string csv_path = cfg.out_dir + "/summary.csv";
    dgest::atomic_write_file(csv_path, dgest::study_to_csv(wrapped).to_string());
    std::cout << csv_path << "\n";
    if (dump_mesh) {
        const dgest::ProblemSpec spec = dgest::manufactured_problem(cfg.preset);
        const dgest::Mesh mesh = dgest::build_structured_mesh(
            spec.domain, cfg.base_nx << (cfg.levels - 1), cfg.base_nx << (cfg.levels - 1));
        std::ostringstream text;
        dgest::write_mesh_text(mesh, text);
        const std::string mesh_path = cfg.out_dir + "/mesh.txt";
        dgest::atomic_write_file(mesh_path, text.str());
        std::cout << mesh_path << "\n";
    }
    if (cfg.dump_snapshots) {
        int idx = 0;
        for (const auto& [t, u] : result.snapshots) {
            char name[64];
            std::snprintf(name, sizeof(name), "/snapshot_%05d.csv", idx++);
            const std::string path = cfg.out_dir + name;
            dgest::atomic_write_file(path, dgest::field_to_csv(u));
            std::cout << path << "\n";
        }
    }
    return 0;
}

int cmd_study(const dgest::StudyConfig& cfg) {
    const dgest::StudyResult result = dgest::run_study(cfg);
    const std::string csv_path = cfg.out_dir + "/summary.csv";
    const std::string svg_path = cfg.out_dir + "/convergence.svg";
    dgest::atomic_write_file(csv_path, dgest::study_to_csv(result).to_string());
    dgest::atomic_write_file(svg_path,
                             dgest::study_to_svg(result, cfg.preset + " convergence"));
    std::cout << csv_path << "\n" << svg_path << "\n";
    return 0;
}

int cmd_verify(const dgest::StudyConfig& cfg) {
    const dgest::VerifyReport report = dgest::run_verify(cfg);
    const std::string text = report.to_text();
    const std::string path = cfg.out_dir + "/verify.txt";
    dgest::atomic_write_file(path, text);
    std::cout << text << path << "\n";
    return report.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IPDG solver for quasilinear parabolic problems with energy-norm "
                 "a posteriori error bounds"};
    app.require_subcommand(1);

    CliOptions opt_solve, opt_study, opt_verify;
    CLI::App* solve = app.add_subcommand("solve", "run one steady or parabolic solve");
    CLI::App* study = app.add_subcommand("study", "degree x level convergence study");
    CLI::App* verify = app.add_subcommand("verify", "run every property suite");
    add_common(solve, opt_solve);
    add_common(study, opt_study);
    add_common(verify, opt_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(build_config(solve, opt_solve), opt_solve.dump_mesh);
        if (study->parsed()) return cmd_study(build_config(study, opt_study));
        if (verify->parsed()) return cmd_verify(build_config(verify, opt_verify));
    } catch (const dgest::NewtonDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
