// Newton solver for the steady IPDG problem, backward-Euler time stepping,
// and a conforming enriched-space oracle approximating the elliptic
// reconstruction for verification runs.
#pragma once

#include "dgest/ipdg.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace dgest {

struct NewtonConfig {
    double tolerance = 1e-10;  // absolute, in the scaled residual max-norm
    int max_iterations = 50;
    int max_halvings = 20;
};

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;  // residual norm after each update
};

class NewtonDivergence : public std::runtime_error {
public:
    NewtonDivergence(const std::string& what, int iterations, int step = -1)
        : std::runtime_error(what), iterations(iterations), step(step) {}
    int iterations;
    int step;  // time step index when raised inside a march, else -1
};

// Direct solve J x = r through the banded factorization.
std::vector<double> solve_linear(const BlockSparseMatrix& jacobian,
                                 const std::vector<double>& rhs);

// Reusable factorization for marches with a state-independent Jacobian.
struct LinearCache {
    bool valid = false;
    BandMatrix factors;
};

// Solves mass_shift * M u + B(u, .) = load by damped Newton, starting from
// the current content of u.
NewtonReport newton_solve(const AssemblyContext& ctx, DgFunction& u,
                          const std::vector<double>& load, const NewtonConfig& config,
                          double mass_shift = 0.0, LinearCache* cache = nullptr);

// Steady solve B(U, V) = <f, V> with f = spec.source at t = 0.
DgFunction solve_elliptic(const ProblemSpec& spec, const std::shared_ptr<const DgSpace>& space,
                          const DiscretizationParams& params, const NewtonConfig& config,
                          const DgFunction* initial_guess = nullptr,
                          NewtonReport* report = nullptr);

struct DtPolicy {
    double dt = 0.0;      // explicit step when positive
    double scale = 0.5;   // otherwise dt = scale * h_max^{p+1}

    double resolve(double h_max, int p) const;
};

struct TimeSeries {
    std::shared_ptr<const DgSpace> space;
    std::vector<double> times;                // t_0 = 0 .. t_N = T
    std::vector<DgFunction> snapshots;        // one per time, starting at Pi u0
    std::vector<DgFunction> backward_diff;    // (U^{n+1}-U^n)/dt per step
    std::vector<int> newton_iterations;       // per step
};

TimeSeries march_parabolic(const ProblemSpec& spec, const std::shared_ptr<const DgSpace>& space,
                           const DiscretizationParams& params, const DtPolicy& dt_policy,
                           const NewtonConfig& config);

// ---- conforming enriched space for the reconstruction oracle ----

// Continuous Q_k space built on the tensor Gauss-Lobatto nodes of a DG
// space; boundary nodes carry homogeneous Dirichlet values.
struct ConformingSpace {
    std::shared_ptr<const DgSpace> dg;   // supplies mesh, node map and quadrature
    std::vector<double> shape_value;     // Lagrange basis at cell points [q*ndof+a]
    std::vector<double> shape_gxi, shape_geta;
    std::vector<int> interior_index;     // global node -> equation index or -1
    int n_equations = 0;
    std::vector<Vec2> node_coords;       // global node coordinates

    int nodes_per_element() const { return dg->dofs_per_element(); }
};

std::shared_ptr<const ConformingSpace> build_conforming_space(
    const std::shared_ptr<const DgSpace>& dg_space);

// A member of the conforming space: one value per global node (boundary
// entries included, held at zero by the solver).
struct ConformingFunction {
    std::shared_ptr<const ConformingSpace> space;
    std::vector<double> nodal;
};

ConformingFunction cg_interpolate(const std::shared_ptr<const ConformingSpace>& cs,
                                  const ScalarField& f, bool zero_boundary);

// Value and gradient of a conforming function at the cell quadrature points
// of a fine element.
EvalResult cg_evaluate_at_cell_points(const ConformingFunction& w, int element);

struct OracleEnrichment {
    int refinements = 1;
    int degree_increment = 2;
};

// Conforming Newton solve of <alpha(w), grad v> = <g, v> on the enriched
// space; g is the reconstruction datum carried by ReconstructionData.
ConformingFunction reconstruction_oracle(const AssemblyContext& ctx, const DgFunction& u,
                                         const ReconstructionData& g,
                                         const NewtonConfig& config,
                                         const OracleEnrichment& enrichment = {});

// Energy distance ||| w - U ||| with broken gradients integrated on the fine
// mesh and the penalty jumps of U on the coarse faces.
double oracle_energy_distance(const ConformingFunction& w, const DgFunction& u,
                              const DiscretizationParams& params);

// Evaluates a coarse DgFunction at the cell quadrature points of a fine
// element, through the fine mesh's parent map.
EvalResult evaluate_on_fine_element(const DgFunction& coarse, const DgSpace& fine_space,
                                    int fine_element);

} // namespace dgest
