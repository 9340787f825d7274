#pragma once
// Steering quantifiers on assemblages: local-hidden-state feasibility, the
// steering weight, its star-graph relaxation where only the pairs (x*, x)
// need a common hidden-state ensemble, and the guessing-probability bound
// both imply.

#include <cstdint>
#include <vector>

#include "randcert/conic.hpp"
#include "randcert/qmath.hpp"
#include "randcert/scenario.hpp"

namespace randcert::steering {

// Hidden states indexed by deterministic outcome assignments; the strategy
// arity states which inputs mu covers (all m for a full LHS model, the pair
// (x*, x_i) for star-edge ensembles, in that order).
struct HiddenStateEnsemble {
    std::vector<DeterministicStrategy> strategies;
    std::vector<ComplexMatrix> states;
};

struct LhsReport {
    bool unsteerable = false;
    HiddenStateEnsemble ensemble;  // reproduces the assemblage when unsteerable
    double reconstruction_residual = 0.0;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

// Unsteerable within 1e-6 of weight; the returned ensemble then reproduces
// the input within 1e-7.
LhsReport lhs_feasibility(const Assemblage& a, const conic::SolveOptions& opts = {},
                          std::uint64_t cap = 1024);

struct SteeringWeightResult {
    double weight = 0.0;              // minimal steerable fraction, in [0, 1]
    Assemblage steerable_part;        // gamma; zeroed when weight < 1e-9
    HiddenStateEnsemble lhs_part;     // normalized when weight < 1 - 1e-9
    double reconstruction_residual = 0.0;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

SteeringWeightResult steering_weight(const Assemblage& a, const conic::SolveOptions& opts = {},
                                     std::uint64_t cap = 1024);

struct PartialSteeringWeightResult {
    double weight = 0.0;
    Assemblage steerable_part;
    // One ensemble per star edge (x*, x_i), x_i ascending over inputs != x*.
    std::vector<HiddenStateEnsemble> edge_ensembles;
    double reconstruction_residual = 0.0;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

// Star relaxation: hidden-state ensembles only per edge (x*, x_i) with a
// shared x* explanation; coincides with steering_weight at m = 2 and is 0
// at m = 1 by convention.
PartialSteeringWeightResult partial_steering_weight(const Assemblage& a, int x_star,
                                                    const conic::SolveOptions& opts = {});

// weight * max_a Tr(gamma_{a|x*}) + 1 - weight; a lower bound on the local
// guessing probability at x*.
double guess_bound(double weight, const Assemblage& steerable_part, int x_star);
double guess_bound(const SteeringWeightResult& r, int x_star);
double guess_bound(const PartialSteeringWeightResult& r, int x_star);

// Assemblage from per-edge ensembles tau^i over pair strategies (x*, x_i);
// the x* coarse grainings must agree across edges within tol.
Assemblage construct_partially_unsteerable(const std::vector<HiddenStateEnsemble>& edge_ensembles,
                                           int x_star, double tol = 1e-9);

struct TwoSettingScreen {
    bool steerable = false;
    int pair_x1 = 0, pair_x2 = 0;  // witnessing (or best) measurement pair
    double weight = 0.0;           // steering weight of that pair's assemblage
};

// Tests every pair of inputs of meas on rho; steerable when some pair's
// steering weight exceeds the threshold.
TwoSettingScreen two_setting_screen(const DensityMatrix& rho, const MeasurementSet& meas,
                                    const conic::SolveOptions& opts = {},
                                    double threshold = 1e-5);

}  // namespace randcert::steering
