#include "dgest/runner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dgest {

void StudyConfig::validate() const {
    if (degrees.empty()) throw std::invalid_argument("config: degrees must not be empty");
    for (int p : degrees)
        if (p < 1) throw std::invalid_argument("config: degrees must be >= 1");
    if (levels < 1) throw std::invalid_argument("config: levels must be >= 1");
    if (theta != -1 && theta != 0 && theta != 1)
        throw std::invalid_argument("config: theta must be -1, 0 or 1");
    if (!(c_sigma > 1.0)) throw std::invalid_argument("config: c_sigma must exceed 1");
    // negative t_final selects the preset default; an explicit zero is an error
    if (t_final == 0.0) throw std::invalid_argument("config: t_final must be positive");
    if (dt < 0.0) throw std::invalid_argument("config: dt must be nonnegative");
    if (base_nx < 1) throw std::invalid_argument("config: base mesh size must be >= 1");
    manufactured_problem(preset);  // throws on unknown preset
}

double fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

std::vector<std::shared_ptr<const Mesh>> mesh_chain(const Rect& domain, int base_nx,
                                                    int levels) {
    std::vector<std::shared_ptr<const Mesh>> chain;
    chain.push_back(
        std::make_shared<const Mesh>(build_structured_mesh(domain, base_nx, base_nx)));
    for (int l = 1; l < levels; ++l)
        chain.push_back(std::make_shared<const Mesh>(refine_uniform(*chain.back())));
    return chain;
}

DgFunction random_dg(const std::shared_ptr<const DgSpace>& space, std::mt19937_64& rng,
                     double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    DgFunction u(space);
    for (double& c : u.coeff) c = dist(rng);
    return u;
}

} // namespace

namespace {

// Worst ratio ||D^gamma (v - I_Os v)||^2 / sum_e w_e ||[v]||_e^2 as the top
// generalized eigenvalue of Q = (I - I_Os)^T B (I - I_Os) against the jump
// Gram S, found by steepest ascent with exact line search on two-dimensional
// spans. Both operators are explicit, so each iterate is cheap and the
// measurement converges instead of chasing random samples.
double worst_oswald_ratio(const DgSpace& space, bool h1_version, int iterations,
                          std::mt19937_64& rng) {
    const BlockSparseMatrix s_gram = jump_gram(
        space, h1_version ? FaceWeight::p2_over_h : FaceWeight::h_over_p2, 1.0);
    std::optional<BlockSparseMatrix> k_gram;
    if (h1_version) k_gram = broken_stiffness_gram(space);

    const auto q_apply = [&](const std::vector<double>& v) {
        std::vector<double> av = oswald_apply(space, v);
        for (size_t i = 0; i < av.size(); ++i) av[i] = v[i] - av[i];
        std::vector<double> mv = h1_version ? k_gram->multiply(av) : mass_apply(space, av);
        std::vector<double> out = oswald_apply_transpose(space, mv);
        for (size_t i = 0; i < out.size(); ++i) out[i] = mv[i] - out[i];
        return out;
    };

    std::normal_distribution<double> dist(0.0, 1.0);
    const int n = space.n_dofs();
    double best = 0.0;
    for (int restart = 0; restart < 3; ++restart) {
        std::vector<double> v(n);
        for (double& c : v) c = dist(rng);
        double lam = 0.0;
        for (int it = 0; it < iterations; ++it) {
            const std::vector<double> qv = q_apply(v);
            const std::vector<double> sv = s_gram.multiply(v);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < n; ++i) {
                num += qv[i] * v[i];
                den += sv[i] * v[i];
            }
            if (!(den > 1e-300)) break;
            const double prev = lam;
            lam = num / den;
            // ascent direction: pencil residual
            std::vector<double> g(n);
            for (int i = 0; i < n; ++i) g[i] = qv[i] - lam * sv[i];
            const std::vector<double> qg = q_apply(g);
            const std::vector<double> sg = s_gram.multiply(g);
            double qgg = 0.0, sgg = 0.0, qvg = 0.0, svg = 0.0;
            for (int i = 0; i < n; ++i) {
                qgg += qg[i] * g[i];
                sgg += sg[i] * g[i];
                qvg += qv[i] * g[i];
                svg += sv[i] * g[i];
            }
            // top eigenvalue of the 2x2 pencil on span{v, g}
            const double a2 = den * sgg - svg * svg;
            const double b2 = -(num * sgg + qgg * den - 2.0 * qvg * svg);
            const double c2 = num * qgg - qvg * qvg;
            const double disc = b2 * b2 - 4.0 * a2 * c2;
            if (!(a2 > 1e-300) || disc < 0.0) break;
            const double lam2 = (-b2 + std::sqrt(disc)) / (2.0 * a2);
            double ca = -(qvg - lam2 * svg);
            double cb = num - lam2 * den;
            if (std::abs(ca) + std::abs(cb) < 1e-300) break;
            for (int i = 0; i < n; ++i) v[i] = ca * v[i] + cb * g[i];
            // keep v on the S-unit sphere for conditioning
            const std::vector<double> sv2 = s_gram.multiply(v);
            double dd = 0.0;
            for (int i = 0; i < n; ++i) dd += sv2[i] * v[i];
            if (dd > 1e-300) {
                const double scale = 1.0 / std::sqrt(dd);
                for (double& c : v) c *= scale;
            }
            lam = std::max(lam, lam2);
            if (it > 20 && lam - prev <= 1e-6 * lam) break;
        }
        best = std::max(best, lam);
    }
    return best;
}

} // namespace

OswaldMeasurement measure_oswald_constants(const std::vector<int>& degrees,
                                           const std::vector<int>& mesh_sizes, int iterations,
                                           unsigned long long seed) {
    OswaldMeasurement m;
    double c0_min = 1e300, c0_max = 0.0, c1_min = 1e300, c1_max = 0.0;
    double c0_base = 0.0, c1_base = 0.0;  // maxima over the smallest degree
    const int p_base = *std::min_element(degrees.begin(), degrees.end());
    for (int p : degrees) {
        double l0_min = 1e300, l0_max = 0.0, l1_min = 1e300, l1_max = 0.0;
        for (int nx : mesh_sizes) {
            auto mesh =
                std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), nx, nx));
            auto space = std::make_shared<const DgSpace>(mesh, p);
            std::mt19937_64 rng(seed ^ (static_cast<unsigned long long>(p) << 32) ^
                                static_cast<unsigned long long>(nx));
            OswaldConfigResult cfg{p, nx, 0.0, 0.0};
            cfg.c0 = worst_oswald_ratio(*space, false, iterations, rng);
            cfg.c1 = worst_oswald_ratio(*space, true, iterations, rng);
            m.table.push_back(cfg);
            c0_min = std::min(c0_min, cfg.c0);
            c0_max = std::max(c0_max, cfg.c0);
            c1_min = std::min(c1_min, cfg.c1);
            c1_max = std::max(c1_max, cfg.c1);
            l0_min = std::min(l0_min, cfg.c0);
            l0_max = std::max(l0_max, cfg.c0);
            l1_min = std::min(l1_min, cfg.c1);
            l1_max = std::max(l1_max, cfg.c1);
        }
        if (p == p_base) {
            c0_base = l0_max;
            c1_base = l1_max;
        }
        m.c0_level_spread = std::max(m.c0_level_spread, l0_max / l0_min);
        m.c1_level_spread = std::max(m.c1_level_spread, l1_max / l1_min);
    }
    m.c0_spread = c0_max / c0_min;
    m.c1_spread = c1_max / c1_min;
    m.c0_growth = c0_max / c0_base;
    m.c1_growth = c1_max / c1_base;
    m.measured_c3 = 2.0 * std::max(c0_max, c1_max);
    return m;
}

namespace {

StudyRow run_single(const ProblemSpec& spec, const std::shared_ptr<const Mesh>& mesh, int p,
                    int level, const StudyConfig& config, double measured_c3,
                    std::vector<std::pair<double, DgFunction>>* snapshots_out) {
    DiscretizationParams params{config.theta, config.c_sigma};
    params.validate();
    auto space = std::make_shared<const DgSpace>(mesh, p);
    NewtonConfig newton;

    StudyRow row;
    row.preset = spec.name;
    row.theta = params.theta;
    row.c_sigma = params.c_sigma;
    row.p = p;
    row.level = level;
    row.nx = mesh->nx;
    row.ny = mesh->ny;
    row.h_max = mesh->h_max();
    row.dofs = space->n_dofs();

    if (spec.steady) {
        const DgFunction u = solve_elliptic(spec, space, params, newton);
        AssemblyContext ctx{space.get(), &spec.nonlinearity, params, 0.0};
        const ReconstructionData g = reconstruction_data(ctx, u, spec.source);
        const EstimatorBreakdown bd = eta_elliptic(ctx, u, g);
        row.estimator = std::sqrt(bd.total);
        row.term_elliptic = row.estimator;
        row.osc_total = bd.osc_total;
        if (spec.has_exact) {
            const auto& exact = spec.exact;
            const auto& grad = spec.exact_grad;
            row.err_energy = energy_norm_error(
                u, [&exact](Vec2 x) { return exact(0.0, x); },
                [&grad](Vec2 x) { return grad(0.0, x); }, params.c_sigma);
            row.effectivity = row.estimator / row.err_energy;
        }
        if (snapshots_out) snapshots_out->emplace_back(0.0, u);
        return row;
    }

    DtPolicy dtp;
    dtp.dt = config.dt;
    dtp.scale = config.dt_scale;
    const TimeSeries series = march_parabolic(spec, space, params, dtp, newton);
    row.steps = static_cast<int>(series.backward_diff.size());
    row.dt = row.steps > 0 ? series.times[1] - series.times[0] : 0.0;

    const BoundConstants constants =
        populate_constants(spec.nonlinearity, *mesh, params, measured_c3);
    ErrorReport rep = accumulate_parabolic(series, spec, params, constants);
    row.estimator = rep.bound_total;
    row.term_elliptic = rep.term_elliptic;
    row.term_init_l2 = rep.term_init_l2;
    row.term_init_jump = rep.term_init_jump;
    row.term_sigma_jump = rep.term_sigma_jump;
    row.term_ut_jump = rep.term_ut_jump;
    if (spec.has_exact) {
        row.err_energy = true_error(series, spec, params);
        row.effectivity = row.estimator / row.err_energy;
    }
    if (snapshots_out)
        for (size_t i = 0; i < series.snapshots.size(); ++i)
            snapshots_out->emplace_back(series.times[i], series.snapshots[i]);
    return row;
}

} // namespace

StudyResult run_study(const StudyConfig& config) {
    config.validate();
    ProblemSpec spec = manufactured_problem(config.preset);
    if (config.t_final > 0.0) spec.t_final = config.t_final;

    const auto chain = mesh_chain(spec.domain, config.base_nx, config.levels);

    StudyResult result;
    if (!spec.steady) {
        std::vector<int> sizes;
        for (const auto& mesh : chain) sizes.push_back(mesh->nx);
        const OswaldMeasurement osw =
            measure_oswald_constants(config.degrees, sizes, 150, config.seed);
        result.measured_c3 = osw.measured_c3;
    }

    for (int p : config.degrees) {
        std::vector<double> hs, errs, ests;
        const size_t first_row = result.rows.size();
        for (int level = 0; level < config.levels; ++level) {
            StudyRow row = run_single(spec, chain[level], p, level, config, result.measured_c3,
                                      nullptr);
            hs.push_back(row.h_max);
            errs.push_back(row.err_energy);
            ests.push_back(row.estimator);
            result.rows.push_back(std::move(row));
        }
        const double re = fit_rate(hs, errs);
        const double rs = fit_rate(hs, ests);
        for (size_t i = first_row; i < result.rows.size(); ++i) {
            result.rows[i].rate_err = re;
            result.rows[i].rate_est = rs;
        }
    }
    return result;
}

SolveResult run_solve(const StudyConfig& config) {
    config.validate();
    ProblemSpec spec = manufactured_problem(config.preset);
    if (config.t_final > 0.0) spec.t_final = config.t_final;
    const auto chain = mesh_chain(spec.domain, config.base_nx, config.levels);
    const int p = config.degrees.front();

    double c3 = 0.0;
    if (!spec.steady) {
        const OswaldMeasurement osw =
            measure_oswald_constants({p}, {chain.back()->nx}, 100, config.seed);
        c3 = osw.measured_c3;
    }
    SolveResult out;
    std::vector<std::pair<double, DgFunction>> snaps;
    out.row = run_single(spec, chain.back(), p, config.levels - 1, config, c3,
                         config.dump_snapshots ? &snaps : nullptr);
    out.snapshots = std::move(snaps);
    return out;
}

CsvTable study_to_csv(const StudyResult& result) {
    CsvTable t;
    t.columns = {"preset",          "theta",         "c_sigma",       "p",
                 "level",           "nx",            "ny",            "h_max",
                 "dofs",            "dt",            "steps",         "err_energy",
                 "estimator",       "effectivity",   "term_elliptic", "term_init_l2",
                 "term_init_jump",  "term_sigma_jump", "term_ut_jump", "osc_total",
                 "rate_err",        "rate_est"};
    for (const StudyRow& r : result.rows) {
        t.rows.push_back({r.preset, std::to_string(r.theta), format_double(r.c_sigma),
                          std::to_string(r.p), std::to_string(r.level), std::to_string(r.nx),
                          std::to_string(r.ny), format_double(r.h_max), std::to_string(r.dofs),
                          format_double(r.dt), std::to_string(r.steps),
                          format_double(r.err_energy), format_double(r.estimator),
                          format_double(r.effectivity), format_double(r.term_elliptic),
                          format_double(r.term_init_l2), format_double(r.term_init_jump),
                          format_double(r.term_sigma_jump), format_double(r.term_ut_jump),
                          format_double(r.osc_total), format_double(r.rate_err),
                          format_double(r.rate_est)});
    }
    return t;
}

std::string study_to_svg(const StudyResult& result, const std::string& title) {
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::vector<PlotSeries> series;
    std::vector<int> degrees;
    for (const auto& r : result.rows)
        if (std::find(degrees.begin(), degrees.end(), r.p) == degrees.end())
            degrees.push_back(r.p);
    int ci = 0;
    for (int p : degrees) {
        PlotSeries err, est;
        err.label = "error p=" + std::to_string(p);
        est.label = "estimator p=" + std::to_string(p);
        est.dashed = true;
        err.color = est.color = colors[ci++ % 5];
        for (const auto& r : result.rows) {
            if (r.p != p) continue;
            err.x.push_back(r.h_max);
            err.y.push_back(r.err_energy);
            est.x.push_back(r.h_max);
            est.y.push_back(r.estimator);
        }
        series.push_back(std::move(err));
        series.push_back(std::move(est));
    }
    return render_loglog_svg(series, title);
}

// ---------------------------------------------------------------- verify --

namespace {

std::string fmt(double v) { return format_double(v); }

SuiteResult suite_nonlinearity(const StudyConfig& config) {
    SuiteResult s{"nonlinearity_hypotheses", true, ""};
    std::ostringstream msg;
    for (const std::string name : {"linear", "hrs", "arctan"}) {
        const Nonlinearity nl = preset_nonlinearity(name);
        const HypothesisReport rep = check_hypotheses(nl, 10000, 1e3, config.seed);
        bool ok = rep.pass;
        if (name == "linear")
            ok = ok && std::abs(rep.worst_lipschitz - 1.0) <= 1e-12 &&
                 std::abs(rep.worst_monotonicity - 1.0) <= 1e-12;
        if (name == "hrs")
            ok = ok && rep.worst_lipschitz <= 3.0 * (1.0 + 1e-9) &&
                 rep.worst_monotonicity >= 2.0 * (1.0 - 1e-9);
        msg << name << ": lip=" << fmt(rep.worst_lipschitz)
            << " mono=" << fmt(rep.worst_monotonicity) << " (a=" << fmt(nl.a_lower) << ".."
            << fmt(nl.a_upper) << ") ";
        s.pass = s.pass && ok;
    }
    s.details = msg.str();
    return s;
}

SuiteResult suite_quadrature() {
    SuiteResult s{"quadrature_moments", true, ""};
    double worst = 0.0;
    for (int q = 1; q <= 10; ++q) {
        const QuadratureRule rule = QuadratureRule::gauss_legendre(q);
        for (int k = 0; k <= 2 * q - 1; ++k) {
            double acc = 0.0;
            for (int i = 0; i < q; ++i) acc += rule.weights[i] * std::pow(rule.points[i], k);
            const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            worst = std::max(worst, std::abs(acc - exact));
        }
    }
    s.pass = worst <= 1e-13;
    s.details = "max moment defect " + fmt(worst);
    return s;
}

SuiteResult suite_projection(const StudyConfig& config) {
    SuiteResult s{"projection_orthogonality", true, ""};
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), 4, 4));
    std::mt19937_64 rng(config.seed + 1);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double worst = 0.0;
    for (int p = 1; p <= 3; ++p) {
        auto space = std::make_shared<const DgSpace>(mesh, p);
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
        const ScalarField f = [a, b, c, d](Vec2 x) {
            return std::sin(3.0 * a * x.x + b) * std::cos(2.0 * c * x.y + d) +
                   0.5 * std::exp(0.3 * x.x * x.y);
        };
        const DgFunction pf = l2_project(f, space);
        std::vector<double> r = assemble_load(*space, f);
        const std::vector<double> mp = mass_apply(*space, pf.coeff);
        const double fnorm = l2_norm_field(*space, f);
        for (int e = 0; e < mesh->n_elements(); ++e)
            for (int k = 0; k < space->dofs_per_element(); ++k) {
                const int i = space->dof_offset(e) + k;
                worst = std::max(worst,
                                 std::abs(r[i] - mp[i]) / (fnorm * space->basis_norm(e, k)));
            }
    }
    s.pass = worst <= 1e-10;
    s.details = "max scaled defect " + fmt(worst);
    return s;
}

SuiteResult suite_jump_identity(const StudyConfig& config) {
    SuiteResult s{"jump_identity", true, ""};
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), 3, 3));
    std::mt19937_64 rng(config.seed + 2);
    double worst = 0.0;
    for (int p : {1, 2, 3}) {
        auto space = std::make_shared<const DgSpace>(mesh, p);
        for (int trial = 0; trial < 5; ++trial) {
            const DgFunction u = random_dg(space, rng);
            double lhs = 0.0, rhs = 0.0, scale = 0.0;
            for (int fid = 0; fid < mesh->n_faces(); ++fid) {
                const Face& f = mesh->faces[fid];
                const FaceTrace t = evaluate_face(u, fid);
                for (int q = 0; q < space->face_rule().size(); ++q) {
                    const double ds = space->face_rule().weights[q] * 0.5 * f.length;
                    const Vec2 ju = jump_scalar(t, q);
                    const Vec2 ag = average_gradient(t, q);
                    lhs += ds * dot(ju, ag);
                    rhs += ds * t.value_plus[q] * dot(t.grad_plus[q], f.normal);
                    if (t.has_minus) {
                        lhs += ds * average_scalar(t, q) * jump_gradient_normal(t, q);
                        rhs -= ds * t.value_minus[q] * dot(t.grad_minus[q], f.normal);
                    }
                    scale += ds * (std::abs(t.value_plus[q]) * norm(t.grad_plus[q]) + 1.0);
                }
            }
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
        }
    }
    s.pass = worst <= 1e-10;
    s.details = "max scaled defect " + fmt(worst);
    return s;
}

SuiteResult suite_oswald(const StudyConfig& config, OswaldMeasurement* out) {
    const OswaldMeasurement m =
        measure_oswald_constants({1, 2, 3, 4}, {4, 8, 16}, 300, config.seed);
    *out = m;
    // p-explicitness witness: no growth with p beyond a factor 2 and
    // h-robustness within a factor 2 across the refinements at every p
    const bool pass = m.c0_growth <= 2.0 && m.c1_growth <= 2.0 &&
                      m.c0_level_spread <= 2.0 && m.c1_level_spread <= 2.0;
    SuiteResult s{"oswald_constants", pass, ""};
    std::ostringstream msg;
    msg << "p-growth " << fmt(m.c0_growth) << "/" << fmt(m.c1_growth) << ", level spread "
        << fmt(m.c0_level_spread) << "/" << fmt(m.c1_level_spread) << ", grid spread "
        << fmt(m.c0_spread) << "/" << fmt(m.c1_spread) << ", c3 = " << fmt(m.measured_c3)
        << " [";
    for (const auto& cfg : m.table)
        msg << " p" << cfg.p << "/n" << cfg.nx << ": " << fmt(cfg.c0) << "," << fmt(cfg.c1);
    msg << " ]";
    s.details = msg.str();
    return s;
}

SuiteResult suite_jacobian_fd(const StudyConfig& config) {
    SuiteResult s{"jacobian_fd", true, ""};
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), 2, 2));
    std::mt19937_64 rng(config.seed + 3);
    double worst = 0.0;
    const double eps = 1e-7;
    for (const std::string preset : {"linear", "hrs"}) {
        const Nonlinearity nl = preset_nonlinearity(preset);
        for (int p : {1, 2, 3}) {
            auto space = std::make_shared<const DgSpace>(mesh, p);
            for (int theta : {-1, 0, 1}) {
                DiscretizationParams params{theta, 10.0};
                AssemblyContext ctx{space.get(), &nl, params, 0.25};
                const DgFunction u = random_dg(space, rng, 0.7);
                const DgFunction v = random_dg(space, rng, 0.7);
                const BlockSparseMatrix jac = assemble_jacobian(ctx, u);
                const std::vector<double> jv = jac.multiply(v.coeff);

                DgFunction up(space), um(space);
                for (size_t i = 0; i < u.coeff.size(); ++i) {
                    up.coeff[i] = u.coeff[i] + eps * v.coeff[i];
                    um.coeff[i] = u.coeff[i] - eps * v.coeff[i];
                }
                const std::vector<double> rp = assemble_form_vector(ctx, up);
                const std::vector<double> rm = assemble_form_vector(ctx, um);
                double num = 0.0, den = 0.0;
                for (size_t i = 0; i < jv.size(); ++i) {
                    const double fd = (rp[i] - rm[i]) / (2.0 * eps);
                    num += (fd - jv[i]) * (fd - jv[i]);
                    den += jv[i] * jv[i];
                }
                worst = std::max(worst, std::sqrt(num / den));
            }
        }
    }
    s.pass = worst <= 1e-6;
    s.details = "max relative defect " + fmt(worst);
    return s;
}

SuiteResult suite_galerkin(const StudyConfig& config) {
    SuiteResult s{"galerkin_identity", true, ""};
    const NewtonConfig newton;
    double worst = 0.0;

    {  // steady solve
        const ProblemSpec spec = manufactured_problem("steady_quasilinear");
        auto mesh =
            std::make_shared<const Mesh>(build_structured_mesh(spec.domain, 4, 4));
        auto space = std::make_shared<const DgSpace>(mesh, 2);
        DiscretizationParams params{config.theta, config.c_sigma};
        const DgFunction u = solve_elliptic(spec, space, params, newton);
        AssemblyContext ctx{space.get(), &spec.nonlinearity, params, 0.0};
        const ReconstructionData g = reconstruction_data(ctx, u, spec.source);
        const std::vector<double> b = assemble_form_vector(ctx, u);
        const std::vector<double> gau = mass_apply(*space, g.minus_au.coeff);
        const std::vector<double> gf = assemble_load(*space, g.f);
        const std::vector<double> gpf = mass_apply(*space, g.projected_f.coeff);
        std::vector<double> diff(b.size());
        for (size_t i = 0; i < b.size(); ++i) diff[i] = b[i] - (gau[i] + gf[i] - gpf[i]);
        worst = std::max(worst, residual_dual_norm(*space, diff));
    }
    {  // parabolic step
        ProblemSpec spec = manufactured_problem("heat_decay");
        spec.t_final = 3e-3;
        auto mesh =
            std::make_shared<const Mesh>(build_structured_mesh(spec.domain, 4, 4));
        auto space = std::make_shared<const DgSpace>(mesh, 1);
        DiscretizationParams params{config.theta, config.c_sigma};
        DtPolicy dtp;
        dtp.dt = 1e-3;
        const TimeSeries series = march_parabolic(spec, space, params, dtp, newton);
        const double t = series.times.back();
        AssemblyContext ctx{space.get(), &spec.nonlinearity, params, t};
        const ReconstructionData g = reconstruction_data(ctx, series.snapshots.back(),
                                                         spec.source);
        const std::vector<double> b = assemble_form_vector(ctx, series.snapshots.back());
        const std::vector<double> gau = mass_apply(*space, g.minus_au.coeff);
        const std::vector<double> gf = assemble_load(*space, g.f);
        const std::vector<double> gpf = mass_apply(*space, g.projected_f.coeff);
        std::vector<double> diff(b.size());
        for (size_t i = 0; i < b.size(); ++i) diff[i] = b[i] - (gau[i] + gf[i] - gpf[i]);
        worst = std::max(worst, residual_dual_norm(*space, diff));
    }
    s.pass = worst <= 10.0 * newton.tolerance;
    s.details = "max Galerkin defect " + fmt(worst) + " (allowance " +
                fmt(10.0 * newton.tolerance) + ")";
    return s;
}

SuiteResult suite_coercivity(const StudyConfig& config) {
    SuiteResult s{"coercivity", true, ""};
    std::mt19937_64 rng(config.seed + 4);
    double worst_margin = 1e300;
    std::string worst_cfg;
    for (const std::string preset : {"linear", "hrs"}) {
        const Nonlinearity nl = preset_nonlinearity(preset);
        for (int nx : {2, 4}) {
            auto mesh =
                std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), nx, nx));
            for (int p = 1; p <= 4; ++p) {
                auto space = std::make_shared<const DgSpace>(mesh, p);
                for (int theta : {-1, 0}) {
                    DiscretizationParams params{theta, config.c_sigma};
                    AssemblyContext ctx{space.get(), &nl, params, 0.0};
                    const BlockSparseMatrix gram = energy_gram(*space, params);
                    double min_ratio = 1e300;
                    for (int trial = 0; trial < 30; ++trial) {
                        const DgFunction v = random_dg(space, rng);
                        const std::vector<double> bv = assemble_form_vector(ctx, v);
                        const std::vector<double> gv = gram.multiply(v.coeff);
                        double num = 0.0, den = 0.0;
                        for (size_t i = 0; i < bv.size(); ++i) {
                            num += bv[i] * v.coeff[i];
                            den += gv[i] * v.coeff[i];
                        }
                        min_ratio = std::min(min_ratio, num / den);
                    }
                    // exact smallest generalized eigenvalue for the bilinear case
                    if (nl.linear && nx == 2) {
                        const int n = space->n_dofs();
                        const DgFunction zero(space);
                        const BlockSparseMatrix k = assemble_jacobian(ctx, zero);
                        std::vector<double> kd(static_cast<size_t>(n) * n, 0.0);
                        std::vector<double> gd(static_cast<size_t>(n) * n, 0.0);
                        std::vector<double> unit(n, 0.0);
                        for (int j = 0; j < n; ++j) {
                            std::fill(unit.begin(), unit.end(), 0.0);
                            unit[j] = 1.0;
                            const std::vector<double> kcol = k.multiply(unit);
                            const std::vector<double> gcol = gram.multiply(unit);
                            for (int i = 0; i < n; ++i) {
                                kd[static_cast<size_t>(i) * n + j] = kcol[i];
                                gd[static_cast<size_t>(i) * n + j] = gcol[i];
                            }
                        }
                        // symmetrize the form matrix: B(v,v) = v^T sym(K) v
                        for (int i = 0; i < n; ++i)
                            for (int j = i + 1; j < n; ++j) {
                                const double avg = 0.5 * (kd[static_cast<size_t>(i) * n + j] +
                                                          kd[static_cast<size_t>(j) * n + i]);
                                kd[static_cast<size_t>(i) * n + j] = avg;
                                kd[static_cast<size_t>(j) * n + i] = avg;
                            }
                        min_ratio =
                            std::min(min_ratio, min_generalized_eigenvalue(kd, gd, n));
                    }
                    const double margin = min_ratio - 0.25 * nl.a_lower;
                    if (margin < worst_margin) {
                        worst_margin = margin;
                        worst_cfg = preset + " nx=" + std::to_string(nx) +
                                    " p=" + std::to_string(p) +
                                    " theta=" + std::to_string(theta) +
                                    " ratio=" + fmt(min_ratio);
                    }
                    if (min_ratio < 0.25 * nl.a_lower) s.pass = false;
                }
            }
        }
    }
    s.details = "worst " + worst_cfg + " at c_sigma=" + fmt(config.c_sigma);
    return s;
}

SuiteResult suite_manufactured(const StudyConfig& config) {
    SuiteResult s{"manufactured_sources", true, ""};
    std::mt19937_64 rng(config.seed + 5);
    std::uniform_real_distribution<double> in(0.12, 0.88);
    std::uniform_real_distribution<double> tt(0.02, 0.09);
    double worst = 0.0;
    for (const std::string name : {"heat_decay", "quasilinear_smooth", "steady_quasilinear"}) {
        const ProblemSpec spec = manufactured_problem(name);
        for (int trial = 0; trial < 20; ++trial) {
            const double t = tt(rng);
            const Vec2 x{in(rng), in(rng)};
            const double closed = spec.source(t, x);
            const double fd = source_by_finite_differences(spec, t, x, 1e-3);
            worst = std::max(worst, std::abs(closed - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    s.pass = worst <= 1e-6;
    s.details = "max relative defect " + fmt(worst);
    return s;
}

SuiteResult suite_mesh() {
    SuiteResult s{"mesh_integrity", true, ""};
    std::ostringstream msg;
    double worst_area = 0.0, worst_shape = 0.0;
    for (int nx : {1, 2, 4, 8, 16}) {
        const Mesh m = build_structured_mesh(Rect::unit_square(), nx, nx);
        worst_area = std::max(worst_area, std::abs(m.total_area() - 1.0));
        worst_shape = std::max(worst_shape, m.shape_regularity_ratio);
        for (int fid : m.interior_face_ids) {
            const Face& f = m.faces[fid];
            const bool sym = m.element_faces[f.elem_plus][f.local_plus] == fid &&
                             m.element_faces[f.elem_minus][f.local_minus] == fid;
            if (!sym) s.pass = false;
            const double expect =
                0.5 * (m.element_diameter[f.elem_plus] + m.element_diameter[f.elem_minus]);
            if (std::abs(f.h_e - expect) > 1e-14) s.pass = false;
        }
    }
    const Mesh rect = build_structured_mesh({0.0, 0.0, 2.0, 1.0}, 3, 2);
    worst_area = std::max(worst_area, std::abs(rect.total_area() - 2.0) / 2.0);
    if (worst_area > 1e-12) s.pass = false;
    if (worst_shape > 4.0) s.pass = false;
    msg << "area defect " << fmt(worst_area) << ", shape ratio " << fmt(worst_shape);
    s.details = msg.str();
    return s;
}

} // namespace

std::string VerifyReport::to_text() const {
    std::ostringstream out;
    for (const SuiteResult& s : suites)
        out << (s.pass ? "PASS" : "FAIL") << " " << s.name << ": " << s.details << "\n";
    int npass = 0;
    for (const SuiteResult& s : suites) npass += s.pass ? 1 : 0;
    out << "RESULT: " << (all_pass ? "PASS" : "FAIL") << " (" << npass << "/" << suites.size()
        << " suites)\n";
    return out.str();
}

VerifyReport run_verify(const StudyConfig& config) {
    VerifyReport rep;
    rep.suites.push_back(suite_nonlinearity(config));
    rep.suites.push_back(suite_quadrature());
    rep.suites.push_back(suite_mesh());
    rep.suites.push_back(suite_projection(config));
    rep.suites.push_back(suite_jump_identity(config));
    rep.suites.push_back(suite_oswald(config, &rep.oswald));
    rep.measured_c3 = rep.oswald.measured_c3;
    rep.suites.push_back(suite_jacobian_fd(config));
    rep.suites.push_back(suite_galerkin(config));
    rep.suites.push_back(suite_coercivity(config));
    rep.suites.push_back(suite_manufactured(config));
    rep.all_pass = true;
    for (const SuiteResult& s : rep.suites) rep.all_pass = rep.all_pass && s.pass;
    return rep;
}

} // namespace dgest
