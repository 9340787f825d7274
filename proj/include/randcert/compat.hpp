#pragma once
// Joint measurability of finite POVM collections: depolarizing-noise
// robustness via semidefinite programming, the hypergraph of maximal
// compatible subsets, and the star-shaped structures that make one input
// pairwise compatible with all others.

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "randcert/conic.hpp"
#include "randcert/qmath.hpp"
#include "randcert/scenario.hpp"

namespace randcert::compat {

// Parent POVM together with the outcome each of its effects assigns to every
// child measurement (inputs are 1-based indices into the tested subset).
struct ParentMeasurement {
    Povm povm;
    std::vector<DeterministicStrategy> assignments;
};

struct JointMeasurabilityReport {
    bool compatible = false;
    // Largest eta such that eta M_{a|x} + (1-eta) tr(M_{a|x}) I/dim has a
    // parent; capped at 1, so compatible means eta >= 1 - 1e-7.
    double eta = 0.0;
    // Worst entrywise error of the parent's coarse grainings against the
    // original effects; small only when compatible.
    double reproduction_residual = 0.0;
    ParentMeasurement parent;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

// All POVMs must share dimension and outcome count; cap bounds the parent
// outcome count d^subset. Throws std::length_error beyond the cap.
JointMeasurabilityReport joint_measurability(const std::vector<Povm>& povms,
                                             const conic::SolveOptions& opts = {},
                                             std::uint64_t cap = 4096);
// Convenience over a subset of inputs (1-based) of a measurement set.
JointMeasurabilityReport joint_measurability(const MeasurementSet& meas,
                                             const std::vector<int>& subset,
                                             const conic::SolveOptions& opts = {},
                                             std::uint64_t cap = 4096);

struct CompatHypergraph {
    int vertices = 0;
    // Maximal compatible subsets of size >= 2, each sorted ascending, listed
    // lexicographically. Singletons are implicit.
    std::vector<std::vector<int>> hyperedges;

    // Downward closure: subsets of size <= 1 are compatible by convention.
    bool is_compatible(const std::vector<int>& subset) const;
};

// Tests every subset of size >= 2, skipping those inside a known compatible
// set. Throws std::length_error when meas has more than max_inputs inputs.
CompatHypergraph compatibility_structure(const MeasurementSet& meas,
                                         const conic::SolveOptions& opts = {},
                                         int max_inputs = 5);

// x_star pairwise compatible with every other vertex.
bool contains_star(const CompatHypergraph& h, int x_star);
// Every one-element extension of the block is compatible; for the full
// vertex set the block itself must be compatible.
bool contains_block_star(const CompatHypergraph& h, const std::vector<int>& block);

nlohmann::json hypergraph_to_json(const CompatHypergraph& h);
CompatHypergraph hypergraph_from_json(const nlohmann::json& j);

}  // namespace randcert::compat
