#pragma once
// Chain Bell inequalities over d outcomes and m inputs per party: evaluation,
// classical bounds (dynamic program and brute force, bit-identical), the
// uniform-marginal no-signaling boxes saturating every chain term, partially
// deterministic boxes, and the offset decomposition of behaviors whose x*-th
// Alice marginal is deterministic.
//
// Offset conventions: entries of an offset vector live in [0, d); the cyclic
// wrap pairs input 1 with input m and carries a +1 outcome shift there
// (A_{m+1} = A_1 + 1). Decomposition offsets are expressed in the frame where
// x* has been relabeled to input 1.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "randcert/scenario.hpp"

namespace randcert::chain {

struct ChainInequality {
    int d = 0;
    int m = 0;
    Eigen::VectorXd alpha;  // coefficient alpha_k per residue k
};

// Validates d >= 2, m >= 2, alpha finite of length d.
ChainInequality make_chain_inequality(int d, int m, Eigen::VectorXd alpha);

struct ChainOffsetVector {
    int d = 0;
    std::vector<int> q;  // length 2m, entries in [0, d)
};

// All offsets zero; sums to 0, so boxes built on it can violate the bound.
ChainOffsetVector zero_offsets(int d, int m);
// Full-length vector, validated to satisfy sum q = -1 (mod d).
ChainOffsetVector constrained_offsets(int d, std::vector<int> q);
// Free mode: 2m-1 entries given, the last one derived from the constraint.
ChainOffsetVector free_completed_offsets(int d, std::vector<int> q_prefix);

// I = sum_k alpha_k sum_i [p(A_i - B_i = k) + p(B_i - A_{i+1} = k)], summed
// i-major with the A-B term first; this accumulation order is part of the
// contract (classical_bound_dp reproduces it bit-exactly).
double chain_value(const Behavior& b, const ChainInequality& ineq);

// Exact classical maximum over offset vectors with sum = -1 (mod d), by a
// dynamic program over partial-sum residues.
double classical_bound_dp(const ChainInequality& ineq);

// Same maximum by enumerating all d^(2m) deterministic strategy pairs.
double classical_bound_bruteforce(const ChainInequality& ineq, std::uint64_t cap = 10000000);

// Uniform-marginal no-signaling box hitting p(A_i - B_i = q_{2i-1}) =
// p(B_i - A_{i+1} = q_{2i}) = 1; off-chain blocks are uniform.
Behavior ns_box(int d, int m, const ChainOffsetVector& shift);

// Replace Alice's x*-th input by the deterministic outcome e, keeping Bob's
// marginals: p(ab|x*y) = delta_{a,e} p_B(b|y).
Behavior partially_deterministic_box(const Behavior& base, int x_star, int e);

struct ChainCheck {
    bool ok = false;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - value
};

ChainCheck verify_no_chain_violation(const Behavior& b, const ChainInequality& ineq);

// Weighted components of a partially deterministic behavior over the
// chain-consistent boxes P_q. Keys: l in [d]^(2m-2) for f, q = (q_1, l) in
// [d]^(2m-1) for pq. Component boxes are sparse maps over the chain input
// pairs in the original labeling.
struct ChainDecomposition {
    int d = 0, m = 0;
    int x_star = 1;
    int e = 0;  // forced outcome at x*
    std::map<std::vector<int>, double> f;
    std::map<std::vector<int>, double> pq;
    std::map<std::vector<int>, std::map<BehaviorEntryKey, double>> components;
    double f_sum = 0.0;
    double pq_sum = 0.0;
    double reconstruction_residual = 0.0;  // vs the projected chain entries
};

// Requires p_A(a|x*) deterministic within 1e-10 and no-signaling input.
ChainDecomposition decompose_partially_deterministic(const Behavior& b, int x_star,
                                                     bool include_components = true);

// Random no-signaling behavior: convex mixture of deterministic boxes and
// shifted ns boxes.
Behavior random_no_signaling_behavior(int d, int m, std::mt19937_64& rng);
// Random element of the deterministic-at-x* polytope slice with outcome e.
Behavior random_partially_deterministic(int d, int m, int x_star, int e, std::mt19937_64& rng);

// Chain functional as a flat coefficient tensor over behavior entries, for
// consumers that bound linear functionals; evaluate() need not reproduce
// chain_value bit-for-bit.
struct BellFunctional {
    int m_a = 0, m_b = 0, d_a = 0, d_b = 0;
    std::vector<double> coeffs;  // same indexing as Behavior::probs
    double& c(int a, int b, int x, int y);
    double c(int a, int b, int x, int y) const;
    double evaluate(const Behavior& b) const;
};

BellFunctional chain_functional(const ChainInequality& ineq);

namespace detail {

// Clamped chain blocks of the behavior with x* relabeled to input 1 and
// removed; exposed so the marginalization identities of the auxiliary
// function can be property-tested.
struct Kernel {
    int d = 0, m = 0, e = 0;
    std::vector<Eigen::MatrixXd> diag_block;   // index k = 2..m: block (k, k)
    std::vector<Eigen::MatrixXd> lower_block;  // index k = 2..m: block (k, k-1)
    std::vector<Eigen::VectorXd> marg_a;       // from diag_block, kappa_A(.|k)
    std::vector<Eigen::VectorXd> marg_b;       // from lower_block, kappa_B(.|k-1)
};

Kernel build_kernel(const Behavior& b, int x_star);
// The auxiliary function F^level_l(t); l must have at least 2*level-2 entries.
double curly_f(const Kernel& k, const std::vector<int>& l, int level, int t);

}  // namespace detail

}  // namespace randcert::chain
