#pragma once
// Device-independent certification through moment-matrix relaxations of the
// quantum set. Guessing probabilities are maximized over per-guess moment
// blocks whose induced behaviors sum to the observed one, so every reported
// value is an upper bound on the true quantum guessing probability and the
// derived min-entropy a valid certificate.

#include <utility>
#include <vector>

#include "randcert/chain.hpp"
#include "randcert/conic.hpp"
#include "randcert/randomness.hpp"
#include "randcert/scenario.hpp"

namespace randcert::npa {

enum class Level { One, OnePlusAB };

std::string to_string(Level level);

// Operator word: products of outcome projectors, one list per party, with
// (input, outcome) entries; inputs 1-based, outcomes 0-based, the last
// outcome of every input eliminated through completeness. Both lists empty
// is the identity.
struct Word {
    std::vector<std::pair<int, int>> alice;
    std::vector<std::pair<int, int>> bob;
};

struct MomentRelaxation {
    Level level = Level::One;
    int m_a = 0, m_b = 0;  // inputs per party
    int d_a = 0, d_b = 0;  // outcomes per party
    std::vector<Word> basis;  // identity first, then A, B, and AB words
    int size() const { return static_cast<int>(basis.size()); }
};

MomentRelaxation build_relaxation(Level level, int m_a, int m_b, int d_a, int d_b);

struct GuessingBound {
    double p_guess = 1.0;
    double h_min = 0.0;
    Level level = Level::One;
    // Guess strings aligned with block_weights: (e) when only the first
    // party's outcome is guessed, (e, e') for the joint guess.
    std::vector<std::vector<int>> guesses;
    std::vector<double> block_weights;
    double eq_residual = 0.0;
    conic::SolveStatus status = conic::SolveStatus::Failed;
};

// Upper bound on the probability that an eavesdropper guesses both outcomes
// at (x_star, y_star). Throws DataInfeasibleError when the observed behavior
// admits no decomposition at the chosen level.
GuessingBound p_guess_nl(const Behavior& b, int x_star, int y_star,
                         const MomentRelaxation& rel, const conic::SolveOptions& opts = {});

// Same bound for guessing only the first party's outcome at x_star.
GuessingBound p_guess_nl_marginal(const Behavior& b, int x_star,
                                  const MomentRelaxation& rel,
                                  const conic::SolveOptions& opts = {});

// Upper bound on the quantum value of a Bell functional at the given level.
double bell_value_bound(const chain::BellFunctional& f, const MomentRelaxation& rel,
                        const conic::SolveOptions& opts = {});

}  // namespace randcert::npa
