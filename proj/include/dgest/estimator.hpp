// A posteriori machinery: the hp-explicit elliptic estimator with its data
// oscillation split, the time-accumulated energy-norm bound, the bound
// constants and true-error evaluation against manufactured solutions.
#pragma once

#include "dgest/ipdg.hpp"
#include "dgest/solver.hpp"

#include <vector>

namespace dgest {

struct EstimatorBreakdown {
    // per-element contributions
    std::vector<double> interior;   // (h^2/p^2) ||Pi~(g + div alpha(U))||^2
    std::vector<double> flux_jump;  // (h/p)  ||Pi~_Gamma [alpha(U)]||^2 on interior faces
    std::vector<double> penalty;    // C_sigma^2 (p^3/h) ||[U]||^2 on all faces
    std::vector<double> oscillation;
    double c_est = 1.0;
    double eta_total = 0.0;  // sum of the three eta terms
    double osc_total = 0.0;
    double total = 0.0;      // c_est * (eta_total + osc_total), the squared estimator
};

EstimatorBreakdown eta_elliptic(const AssemblyContext& ctx, const DgFunction& u,
                                const ReconstructionData& g);

// Per-element oscillation values alone.
std::vector<double> oscillation(const AssemblyContext& ctx, const DgFunction& u,
                                const ReconstructionData& g);

struct BoundConstants {
    double a_lower = 0.0, a_upper = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
    double c_pf = 0.0;
    double c_sigma = 0.0;
    double c_est = 1.0;
};

// c1 = 1 + sqrt(2) au/al, c2 = sqrt(2)/al, c4 = c1 sqrt(c3/c_sigma),
// c5 = c2 c_pf with the convex-domain value c_pf = diam(Omega)/pi.
BoundConstants populate_constants(const Nonlinearity& nl, const Mesh& mesh,
                                  const DiscretizationParams& params, double measured_c3);

struct ErrorReport {
    double term_elliptic = 0.0;    // c1 (int_0^T E)^{1/2}
    double term_init_l2 = 0.0;     // a_lower^{-1/2} ||u0 - U(0)||
    double term_init_jump = 0.0;   // a_lower^{-1/2} c3 ||(h/p^2)^{1/2}[U(0)]||
    double term_sigma_jump = 0.0;  // c4 || sqrt(sigma)[U] ||_{L2(0,T;L2)}
    double term_ut_jump = 0.0;     // c5 || (h/p^2)^{1/2}[U_t] ||_{L2(0,T;L2)}
    double bound_total = 0.0;
    std::vector<double> elliptic_profile;  // E(t_n), the squared spatial estimator
    double true_error = 0.0;
    std::vector<double> true_profile;      // energy error at snapshots
    double effectivity = 0.0;
};

// Evaluates every term of the accumulated bound along a computed series;
// time integrals by the trapezoid rule on the snapshot grid, U_t replaced by
// the stored backward differences.
ErrorReport accumulate_parabolic(const TimeSeries& series, const ProblemSpec& spec,
                                 const DiscretizationParams& params,
                                 const BoundConstants& constants);

// ||U - u||_{L2(0,T;H1)}: energy norm of the error at each snapshot,
// trapezoid in time. Fills true_error/true_profile of a report.
double true_error(const TimeSeries& series, const ProblemSpec& spec,
                  const DiscretizationParams& params, std::vector<double>* profile = nullptr);

} // namespace dgest
