#pragma once
// Steering and Bell scenario data types: assemblages, behaviors, deterministic
// strategies. Outcomes are 0-based, inputs are 1-based throughout.

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "randcert/qmath.hpp"

namespace randcert {

// Subnormalized conditional states sigma_{a|x} held by the trusted party.
// Invariants: each sigma PSD, sum_a sigma_{a|x} independent of x, total trace 1.
struct Assemblage {
    int m = 0;     // inputs
    int d = 0;     // outcomes per input
    int dim_b = 0; // trusted-side Hilbert dimension
    std::vector<ComplexMatrix> sigma_flat;  // index (x-1)*d + a

    const ComplexMatrix& sigma(int a, int x) const;
    ComplexMatrix& sigma(int a, int x);
    // sum_a sigma_{a|1}; equals the trusted party's reduced state when valid.
    ComplexMatrix reduced_state() const;
};

Assemblage make_assemblage(int m, int d, int dim_b);

struct AssemblageValidation {
    bool ok = false;
    double hermitian_residual = 0.0;
    double psd_floor = 0.0;
    double no_signaling_residual = 0.0;  // max entry deviation across inputs
    double trace_residual = 0.0;
};

AssemblageValidation validate_assemblage(const Assemblage& a, double tol = 1e-9);

// Joint conditional distribution p(ab|xy) for two untrusted parties.
struct Behavior {
    int m_a = 0, m_b = 0;  // inputs per party
    int d_a = 0, d_b = 0;  // outcomes per party
    std::vector<double> probs;  // index (((x-1)*m_b + (y-1))*d_a + a)*d_b + b

    double& p(int a, int b, int x, int y);
    double p(int a, int b, int x, int y) const;
    double marginal_a(int a, int x, int y) const;  // sum_b p(ab|xy)
    double marginal_b(int b, int x, int y) const;  // sum_a p(ab|xy)
};

Behavior make_behavior(int m_a, int m_b, int d_a, int d_b);

struct BehaviorValidation {
    bool ok = false;
    double negativity = 0.0;             // most negative entry (0 when clean)
    double normalization_residual = 0.0; // max |sum_ab p - 1| over (x,y)
};

BehaviorValidation validate_behavior(const Behavior& b, double tol = 1e-9);
// Largest marginal deviation across the other party's inputs.
double no_signaling_residual(const Behavior& b);
bool is_no_signaling(const Behavior& b, double tol = 1e-9);

// Assignment of one outcome to every input, mu(x) with x 1-based.
struct DeterministicStrategy {
    std::vector<int> outcome_for_input;
    int operator()(int x) const { return outcome_for_input.at(static_cast<size_t>(x) - 1); }
    int inputs() const { return static_cast<int>(outcome_for_input.size()); }
};

// All d^m strategies in lexicographic order (input 1 most significant).
// Throws std::length_error beyond the cap.
std::vector<DeterministicStrategy> enumerate_strategies(int m, int d,
                                                        std::uint64_t cap = 1000000);

Behavior deterministic_behavior(const DeterministicStrategy& alice,
                                const DeterministicStrategy& bob, int d_a, int d_b);

// sigma_{a|x} = Tr_A[(M_{a|x} (x) I) rho].
Assemblage assemblage_from_state(const DensityMatrix& rho, const MeasurementSet& meas,
                                 const Tolerances& tol = {});
// p(ab|xy) = Tr[(M_{a|x} (x) N_{b|y}) rho].
Behavior behavior_from_state(const DensityMatrix& rho, const MeasurementSet& meas_a,
                             const MeasurementSet& meas_b, const Tolerances& tol = {});

// Input pairs (x, y) selecting blocks of a behavior, 1-based.
struct InputPairSet {
    std::vector<std::pair<int, int>> pairs;
    // (1,1),(2,1),(2,2),(3,2),...,(m,m),(1,m): the cyclic chain blocks.
    static InputPairSet chain_pairs(int m);
    bool contains(int x, int y) const;
};

using BehaviorEntryKey = std::tuple<int, int, int, int>;  // (a, b, x, y)

// Sparse restriction of a behavior to the selected input pairs.
std::map<BehaviorEntryKey, double> project_behavior(const Behavior& b, const InputPairSet& pairs);

}  // namespace randcert
