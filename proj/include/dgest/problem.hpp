// Model-problem data: quasilinear diffusion coefficients with certified
// monotonicity/Lipschitz constants, and manufactured problems used by the
// convergence and estimator studies.
#pragma once

#include "dgest/geometry.hpp"

#include <functional>
#include <optional>
#include <string>

namespace dgest {

// Scalar diffusion coefficient a(t, x, s) acting on s = |grad u|. The flux
// is Phi(y) = a(t,x,|y|) y; a_lower/a_upper are its strong-monotonicity and
// Lipschitz constants.
struct Nonlinearity {
    std::string name;
    std::function<double(double, Vec2, double)> mu;
    std::function<double(double, Vec2, double)> dmu_ds;
    double a_lower = 0.0;
    double a_upper = 0.0;
    bool linear = false;  // coefficient independent of s (and of the state)

    double flux_radial(double t, Vec2 x, double s) const {
        return mu(t, x, s) + dmu_ds(t, x, s) * s;
    }
};

// names: "linear", "hrs", "arctan"
Nonlinearity preset_nonlinearity(const std::string& name);

struct HypothesisReport {
    double worst_lipschitz = 0.0;     // max |Phi(y)-Phi(z)| / |y-z|
    double worst_monotonicity = 0.0;  // min (Phi(y)-Phi(z)).(y-z) / |y-z|^2
    int pairs_used = 0;
    bool pass = false;
};

// Samples random pairs |y|,|z| <= radius (log-uniform magnitudes plus
// near-coincident pairs) and checks the declared constants.
HypothesisReport check_hypotheses(const Nonlinearity& nl, int samples, double radius,
                                  unsigned long long seed = 20240817ULL);

struct ProblemSpec {
    std::string name;
    Rect domain = Rect::unit_square();
    double t_final = 0.1;
    bool steady = false;
    Nonlinearity nonlinearity;
    std::function<double(double, Vec2)> source;     // f(t, x)
    std::function<double(Vec2)> initial;            // u0(x)
    bool has_exact = false;
    std::function<double(double, Vec2)> exact;      // u(t, x)
    std::function<Vec2(double, Vec2)> exact_grad;   // grad u(t, x)
};

// names: "heat_decay", "quasilinear_smooth", "steady_quasilinear"
ProblemSpec manufactured_problem(const std::string& name);

// Finite-difference evaluation of u_t - div(a(|grad u|) grad u) from the
// exact solution alone; test oracle for the closed-form sources.
double source_by_finite_differences(const ProblemSpec& spec, double t, Vec2 x, double step);

} // namespace dgest
