#pragma once
// Randomness certified against an eavesdropper holding the steering-side
// purification: optimal guessing probability for the trusted-input outcomes,
// by splitting the observed assemblage over Eve's guesses.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "randcert/conic.hpp"
#include "randcert/scenario.hpp"

namespace randcert {

// Observed data admits no decomposition at all; distinct from solver failure.
class DataInfeasibleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace randcert

namespace randcert::randomness {

struct RandomnessResult {
    double p_guess = 1.0;
    double h_min = 0.0;  // -log2(p_guess), clamped at 0
    // Eve's guess strings over the queried inputs (ascending input order),
    // aligned with the subnormalized assemblage parts she would hold.
    std::vector<std::vector<int>> guesses;
    std::vector<Assemblage> parts;
    double eq_residual = 0.0;
    double psd_floor = 0.0;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

// Single-input guessing probability at x_star.
RandomnessResult p_guess_steering(const Assemblage& a, int x_star,
                                  const conic::SolveOptions& opts = {});

// Weighted multi-input version: Eve guesses a whole outcome string over the
// keyed inputs; weights must be positive and sum to 1 within 1e-9. The
// number of guess strings d^|X| is capped (std::length_error beyond).
RandomnessResult p_guess_steering_set(const Assemblage& a,
                                      const std::map<int, double>& input_weights,
                                      const conic::SolveOptions& opts = {},
                                      std::uint64_t cap = 4096);

// -log2(p) for p in (0, 1].
double min_entropy(double p_guess);

}  // namespace randcert::randomness
