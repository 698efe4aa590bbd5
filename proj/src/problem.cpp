#include "dgest/problem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dgest {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 flux(const Nonlinearity& nl, double t, Vec2 x, const Vec2& y) {
    return nl.mu(t, x, norm(y)) * y;
}

} // namespace

Nonlinearity preset_nonlinearity(const std::string& name) {
    Nonlinearity nl;
    nl.name = name;
    if (name == "linear") {
        nl.mu = [](double, Vec2, double) { return 1.0; };
        nl.dmu_ds = [](double, Vec2, double) { return 0.0; };
        nl.a_lower = 1.0;
        nl.a_upper = 1.0;
        nl.linear = true;
    } else if (name == "hrs") {
        // mu(s) = 2 + 1/(1+s): both eigenvalues of the flux derivative,
        // mu(s) and mu(s) + mu'(s) s = 2 + (1+s)^{-2}, lie in (2, 3].
        nl.mu = [](double, Vec2, double s) { return 2.0 + 1.0 / (1.0 + s); };
        nl.dmu_ds = [](double, Vec2, double s) {
            const double d = 1.0 + s;
            return -1.0 / (d * d);
        };
        nl.a_lower = 2.0;
        nl.a_upper = 3.0;
    } else if (name == "arctan") {
        // mu(s) = 1 + (2/pi) atan(s^2); the radial derivative peaks at
        // s^2 = sqrt(3) with value 5/3 + sqrt(3)/pi.
        nl.mu = [](double, Vec2, double s) { return 1.0 + (2.0 / kPi) * std::atan(s * s); };
        nl.dmu_ds = [](double, Vec2, double s) {
            const double s4 = s * s * s * s;
            return (4.0 / kPi) * s / (1.0 + s4);
        };
        nl.a_lower = 1.0;
        nl.a_upper = 5.0 / 3.0 + std::sqrt(3.0) / kPi;
    } else {
        throw std::invalid_argument("preset_nonlinearity: unknown preset '" + name +
                                    "' (expected linear, hrs or arctan)");
    }
    return nl;
}

HypothesisReport check_hypotheses(const Nonlinearity& nl, int samples, double radius,
                                  unsigned long long seed) {
    if (samples < 1) throw std::invalid_argument("check_hypotheses: need samples >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(radius));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const Vec2 x{0.3, 0.7};
    const double t = 0.5;

    HypothesisReport rep;
    rep.worst_lipschitz = 0.0;
    rep.worst_monotonicity = std::numeric_limits<double>::max();
    for (int i = 0; i < samples; ++i) {
        const double a1 = angle(rng), a2 = angle(rng);
        const double r1 = std::exp(logmag(rng));
        Vec2 y{r1 * std::cos(a1), r1 * std::sin(a1)};
        Vec2 z;
        if (unit(rng) < 0.25) {
            // near-coincident pair probing the derivative
            const double eps = r1 * 1e-6;
            z = {y.x + eps * std::cos(a2), y.y + eps * std::sin(a2)};
        } else {
            const double r2 = std::exp(logmag(rng));
            z = {r2 * std::cos(a2), r2 * std::sin(a2)};
        }
        const Vec2 d = y - z;
        const double dn2 = dot(d, d);
        if (dn2 == 0.0) continue;  // 0/0 pair, skipped
        const Vec2 fd = flux(nl, t, x, y) - flux(nl, t, x, z);
        rep.worst_lipschitz = std::max(rep.worst_lipschitz, norm(fd) / std::sqrt(dn2));
        rep.worst_monotonicity = std::min(rep.worst_monotonicity, dot(fd, d) / dn2);
        ++rep.pairs_used;
    }
    rep.pass = rep.worst_lipschitz <= nl.a_upper * (1.0 + 1e-9) &&
               rep.worst_monotonicity >= nl.a_lower * (1.0 - 1e-9);
    return rep;
}

namespace {

// Closed-form source for u = sin(pi x) sin(pi y) * amp(t) under the given
// coefficient: f = u_t - mu(s) Lap(u) - mu'(s) grad(s^2).grad(u) / (2 s).
double quasilinear_source(const Nonlinearity& nl, double t, Vec2 p, double amp,
                          double damp_dt) {
    const double sx = std::sin(kPi * p.x), cx = std::cos(kPi * p.x);
    const double sy = std::sin(kPi * p.y), cy = std::cos(kPi * p.y);
    const double u = sx * sy * amp;
    const double ut = sx * sy * damp_dt;
    const Vec2 grad{kPi * amp * cx * sy, kPi * amp * sx * cy};
    const double s = norm(grad);
    const double lap = -2.0 * kPi * kPi * u;
    const double pi3a2 = kPi * kPi * kPi * amp * amp;
    const Vec2 grad_s2{pi3a2 * std::sin(2.0 * kPi * p.x) * std::cos(2.0 * kPi * p.y),
                       pi3a2 * std::cos(2.0 * kPi * p.x) * std::sin(2.0 * kPi * p.y)};
    double div_flux = nl.mu(t, p, s) * lap;
    if (s > 1e-14) div_flux += nl.dmu_ds(t, p, s) * dot(grad_s2, grad) / (2.0 * s);
    return ut - div_flux;
}

} // namespace

ProblemSpec manufactured_problem(const std::string& name) {
    ProblemSpec spec;
    spec.name = name;
    spec.domain = Rect::unit_square();
    if (name == "heat_decay") {
        spec.nonlinearity = preset_nonlinearity("linear");
        spec.t_final = 0.1;
        spec.source = [](double, Vec2) { return 0.0; };
        spec.initial = [](Vec2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); };
        spec.has_exact = true;
        spec.exact = [](double t, Vec2 p) {
            return std::sin(kPi * p.x) * std::sin(kPi * p.y) * std::exp(-2.0 * kPi * kPi * t);
        };
        spec.exact_grad = [](double t, Vec2 p) {
            const double a = std::exp(-2.0 * kPi * kPi * t);
            return Vec2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y) * a,
                        kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y) * a};
        };
    } else if (name == "quasilinear_smooth") {
        spec.nonlinearity = preset_nonlinearity("hrs");
        spec.t_final = 0.1;
        const Nonlinearity nl = spec.nonlinearity;
        spec.source = [nl](double t, Vec2 p) {
            const double amp = std::exp(-t);
            return quasilinear_source(nl, t, p, amp, -amp);
        };
        spec.initial = [](Vec2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); };
        spec.has_exact = true;
        spec.exact = [](double t, Vec2 p) {
            return std::sin(kPi * p.x) * std::sin(kPi * p.y) * std::exp(-t);
        };
        spec.exact_grad = [](double t, Vec2 p) {
            const double a = std::exp(-t);
            return Vec2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y) * a,
                        kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y) * a};
        };
    } else if (name == "steady_quasilinear") {
        spec.nonlinearity = preset_nonlinearity("hrs");
        spec.steady = true;
        spec.t_final = 0.0;
        const Nonlinearity nl = spec.nonlinearity;
        spec.source = [nl](double t, Vec2 p) { return quasilinear_source(nl, t, p, 1.0, 0.0); };
        spec.initial = [](Vec2) { return 0.0; };
        spec.has_exact = true;
        spec.exact = [](double, Vec2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); };
        spec.exact_grad = [](double, Vec2 p) {
            return Vec2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y),
                        kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
        };
    } else {
        throw std::invalid_argument("manufactured_problem: unknown problem '" + name +
                                    "' (expected heat_decay, quasilinear_smooth or "
                                    "steady_quasilinear)");
    }
    return spec;
}

double source_by_finite_differences(const ProblemSpec& spec, double t, Vec2 x, double step) {
    if (!spec.has_exact)
        throw std::invalid_argument("source_by_finite_differences: no exact solution");
    const auto& u = spec.exact;
    const auto& nl = spec.nonlinearity;

    // 4th-order central gradient of u
    const auto grad_u = [&](Vec2 p) {
        const double h = step;
        const auto dx = (-u(t, {p.x + 2 * h, p.y}) + 8 * u(t, {p.x + h, p.y}) -
                         8 * u(t, {p.x - h, p.y}) + u(t, {p.x - 2 * h, p.y})) /
                        (12 * h);
        const auto dy = (-u(t, {p.x, p.y + 2 * h}) + 8 * u(t, {p.x, p.y + h}) -
                         8 * u(t, {p.x, p.y - h}) + u(t, {p.x, p.y - 2 * h})) /
                        (12 * h);
        return Vec2{dx, dy};
    };
    const auto flux_at = [&](Vec2 p) {
        const Vec2 g = grad_u(p);
        return nl.mu(t, p, norm(g)) * g;
    };
    const double h = step;
    const double div =
        (-flux_at({x.x + 2 * h, x.y}).x + 8 * flux_at({x.x + h, x.y}).x -
         8 * flux_at({x.x - h, x.y}).x + flux_at({x.x - 2 * h, x.y}).x) /
            (12 * h) +
        (-flux_at({x.x, x.y + 2 * h}).y + 8 * flux_at({x.x, x.y + h}).y -
         8 * flux_at({x.x, x.y - h}).y + flux_at({x.x, x.y - 2 * h}).y) /
            (12 * h);
    const double ut = spec.steady
                          ? 0.0
                          : (-u(t + 2 * h, x) + 8 * u(t + h, x) - 8 * u(t - h, x) +
                             u(t - 2 * h, x)) /
                                (12 * h);
    return ut - div;
}

} // namespace dgest
