#include "randcert/randomness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randcert::randomness {

namespace {

// Guess strings over |xs| inputs, first input most significant.
std::vector<std::vector<int>> guess_strings(int d, std::size_t n_inputs,
                                            std::uint64_t cap) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n_inputs; ++i) {
        total *= static_cast<std::uint64_t>(d);
        if (total > cap) throw std::length_error("p_guess_steering_set: guess strings exceed cap");
    }
    std::vector<std::vector<int>> out;
    out.reserve(total);
    std::vector<int> cur(n_inputs, 0);
    for (std::uint64_t i = 0; i < total; ++i) {
        out.push_back(cur);
        for (std::size_t pos = n_inputs; pos-- > 0;) {
            if (++cur[pos] < d) break;
            cur[pos] = 0;
        }
    }
    return out;
}

}  // namespace

RandomnessResult p_guess_steering_set(const Assemblage& a,
                                      const std::map<int, double>& input_weights,
                                      const conic::SolveOptions& opts,
                                      std::uint64_t cap) {
    const auto check = validate_assemblage(a, 1e-7);
    if (!check.ok) throw std::invalid_argument("p_guess_steering_set: invalid assemblage");
    if (input_weights.empty()) throw std::invalid_argument("p_guess_steering_set: no inputs queried");
    double wsum = 0.0;
    for (const auto& [x, w] : input_weights) {
        if (x < 1 || x > a.m) throw std::invalid_argument("p_guess_steering_set: input out of range");
        if (w <= 0.0) throw std::invalid_argument("p_guess_steering_set: weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("p_guess_steering_set: weights must sum to 1");

    const int d = a.d;
    const int nb = a.dim_b;
    const auto guesses = guess_strings(d, input_weights.size(), cap);

    // Every part block must live inside the range of the observed block, so
    // solve in that compressed basis; this keeps the program strictly
    // feasible even for rank-deficient (e.g. pure-state) assemblages.
    struct Face {
        ComplexMatrix basis;  // dim_b x rank, orthonormal columns
        ComplexMatrix rhs;    // compressed observed block
        int rank = 0;
    };
    std::vector<Face> face(static_cast<std::size_t>(a.m * d));
    for (int i = 0; i < a.m * d; ++i) {
        const ComplexMatrix& s = a.sigma_flat[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (s + s.adjoint()));
        int lo = 0;
        while (lo < nb && es.eigenvalues()(lo) <= 1e-9) ++lo;
        Face& f = face[static_cast<std::size_t>(i)];
        f.rank = nb - lo;
        if (f.rank == nb) f.basis = ComplexMatrix::Identity(nb, nb);
        else if (f.rank > 0) f.basis = es.eigenvectors().rightCols(f.rank);
        if (f.rank > 0) f.rhs = f.basis.adjoint() * s * f.basis;
    }

    conic::ConicProgram prog;
    // One subnormalized assemblage per guess string; -1 marks a zero block.
    std::vector<std::vector<int>> var(guesses.size(), std::vector<int>(a.m * d, -1));
    for (std::size_t g = 0; g < guesses.size(); ++g)
        for (int i = 0; i < a.m * d; ++i)
            if (face[static_cast<std::size_t>(i)].rank > 0)
                var[g][static_cast<std::size_t>(i)] = prog.add_variable(
                    face[static_cast<std::size_t>(i)].rank, conic::VarKind::HermitianComplex);

    // Parts sum to the observed assemblage (in the compressed basis).
    for (int i = 0; i < a.m * d; ++i) {
        if (face[static_cast<std::size_t>(i)].rank == 0) continue;
        std::vector<conic::MatrixTerm> terms;
        for (std::size_t g = 0; g < guesses.size(); ++g)
            terms.push_back({var[g][static_cast<std::size_t>(i)], 1.0, {}});
        conic::add_matrix_equality(prog, terms, face[static_cast<std::size_t>(i)].rhs);
    }

    // Each part is no-signaling: reduced state independent of the input.
    // Entry (i,j) of the expanded block V X V^+ is tr(G X) with
    // G = (V^+ e_j)(V^+ e_i)^+, split into Hermitian real/imaginary parts.
    auto entry_coeff = [](const Face& f, int i, int j, bool imag) -> ComplexMatrix {
        ComplexMatrix g = f.basis.row(j).adjoint() * f.basis.row(i);
        if (imag) return std::complex<double>(0.0, -0.5) * (g - g.adjoint());
        return 0.5 * (g + g.adjoint());
    };
    for (std::size_t g = 0; g < guesses.size(); ++g)
        for (int x = 2; x <= a.m; ++x)
            for (int i = 0; i < nb; ++i)
                for (int j = i; j < nb; ++j)
                    for (int imag = 0; imag <= (i < j ? 1 : 0); ++imag) {
                        std::vector<conic::CoefficientTerm> terms;
                        for (int out = 0; out < d; ++out) {
                            const Face& fx = face[static_cast<std::size_t>((x - 1) * d + out)];
                            const Face& f1 = face[static_cast<std::size_t>(out)];
                            if (fx.rank > 0)
                                terms.push_back({var[g][static_cast<std::size_t>((x - 1) * d + out)],
                                                 entry_coeff(fx, i, j, imag != 0)});
                            if (f1.rank > 0)
                                terms.push_back({var[g][static_cast<std::size_t>(out)],
                                                 -entry_coeff(f1, i, j, imag != 0)});
                        }
                        if (!terms.empty()) prog.add_equality(std::move(terms), 0.0);
                    }

    // Eve wins input x exactly when her string matches her part there.
    std::vector<conic::CoefficientTerm> objective;
    for (std::size_t g = 0; g < guesses.size(); ++g) {
        std::size_t pos = 0;
        for (const auto& [x, w] : input_weights) {
            const int idx = (x - 1) * d + guesses[g][pos];
            const int r = face[static_cast<std::size_t>(idx)].rank;
            if (r > 0)
                objective.push_back(
                    {var[g][static_cast<std::size_t>(idx)], w * ComplexMatrix::Identity(r, r)});
            ++pos;
        }
    }
    prog.set_objective(std::move(objective), conic::Sense::Maximize);

    auto report = conic::solve(prog, opts);
    if (report.status == conic::SolveStatus::Infeasible)
        throw DataInfeasibleError("p_guess_steering_set: observed assemblage admits no decomposition");

    RandomnessResult res;
    res.status = report.status;
    res.eq_residual = report.eq_residual;
    res.psd_floor = report.psd_floor;
    if (report.status == conic::SolveStatus::Optimal ||
        report.status == conic::SolveStatus::Inaccurate) {
        res.p_guess = std::clamp(report.value, 1.0 / d, 1.0);
        res.h_min = min_entropy(res.p_guess);
        for (std::size_t g = 0; g < guesses.size(); ++g) {
            res.guesses.push_back(guesses[g]);
            Assemblage part = make_assemblage(a.m, d, nb);
            for (int i = 0; i < a.m * d; ++i) {
                const Face& f = face[static_cast<std::size_t>(i)];
                if (f.rank == 0) continue;
                const ComplexMatrix& x = report.primal[static_cast<std::size_t>(var[g][i])];
                part.sigma_flat[static_cast<std::size_t>(i)] = f.basis * x * f.basis.adjoint();
            }
            res.parts.push_back(std::move(part));
        }
    }
    return res;
}

RandomnessResult p_guess_steering(const Assemblage& a, int x_star,
                                  const conic::SolveOptions& opts) {
    return p_guess_steering_set(a, {{x_star, 1.0}}, opts);
}

double min_entropy(double p_guess) {
    if (!(p_guess > 0.0) || p_guess > 1.0)
        throw std::invalid_argument("min_entropy: p_guess must be in (0, 1]");
    return std::max(0.0, -std::log2(p_guess));
}

}  // namespace randcert::randomness
