#include <cmath>
#include <random>

#include "doctest.h"
#include "randcert/steering.hpp"

using namespace randcert;
using namespace randcert::steering;

namespace {

MeasurementSet xz_meas() {
    MeasurementSet ms;
    ms.povms = {pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Z)};
    return ms;
}

MeasurementSet xyz_meas() {
    MeasurementSet ms;
    ms.povms = {pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Y),
                pauli_projectors(PauliAxis::Z)};
    return ms;
}

DensityMatrix pure(const ComplexVector& ket) { return DensityMatrix{ket * ket.adjoint()}; }

bool solved(conic::SolveStatus s) {
    return s == conic::SolveStatus::Optimal || s == conic::SolveStatus::Inaccurate;
}

}  // namespace

TEST_CASE("product state assemblage has zero steering weight") {
    std::mt19937_64 rng(20260814);
    auto rho_a = random_density(2, rng);
    auto rho_b = random_density(2, rng);
    DensityMatrix rho{kron(rho_a.matrix, rho_b.matrix)};
    auto a = assemblage_from_state(rho, xz_meas());

    auto sw = steering_weight(a);
    REQUIRE(solved(sw.status));
    CHECK(sw.weight <= 1e-6);

    auto lhs = lhs_feasibility(a);
    REQUIRE(solved(lhs.status));
    CHECK(lhs.unsteerable);
    CHECK(lhs.reconstruction_residual <= 1e-6);
    for (const auto& st : lhs.ensemble.states) CHECK(min_eigenvalue(st) >= -1e-7);
}

TEST_CASE("maximally entangled state with two sharp bases is fully steerable") {
    auto a = assemblage_from_state(pure(phi_plus_ket()), xz_meas());
    auto sw = steering_weight(a);
    REQUIRE(solved(sw.status));
    CHECK(sw.weight >= 1.0 - 1e-6);
    // At full weight the steerable part is the assemblage itself, whose
    // largest outcome mass is 1/2 in either basis.
    CHECK(guess_bound(sw, 1) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(guess_bound(sw, 2) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("partially entangled pure state keeps full steering weight") {
    auto a = assemblage_from_state(pure(psi_theta_ket(M_PI / 8)), xz_meas());
    auto sw = steering_weight(a);
    REQUIRE(solved(sw.status));
    CHECK(sw.weight >= 1.0 - 1e-6);
    const double c2 = std::cos(M_PI / 8) * std::cos(M_PI / 8);
    CHECK(guess_bound(sw, 1) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(guess_bound(sw, 2) == doctest::Approx(c2).epsilon(1e-5));
}

TEST_CASE("isotropic noise threshold for two sharp bases") {
    // LHS model exists up to visibility 1/sqrt(2) for two unbiased bases.
    auto low = assemblage_from_state(rho_p_theta(0.65, M_PI / 4), xz_meas());
    auto sw_low = steering_weight(low);
    REQUIRE(solved(sw_low.status));
    CHECK(sw_low.weight <= 1e-6);

    auto high = assemblage_from_state(rho_p_theta(0.80, M_PI / 4), xz_meas());
    auto sw_high = steering_weight(high);
    REQUIRE(solved(sw_high.status));
    CHECK(sw_high.weight >= 0.01);

    // weight * steerable + (1 - weight) * hidden-state model reproduces the data.
    for (int x = 1; x <= 2; ++x)
        for (int aa = 0; aa < 2; ++aa) {
            ComplexMatrix acc = sw_high.weight * sw_high.steerable_part.sigma(aa, x);
            for (size_t li = 0; li < sw_high.lhs_part.strategies.size(); ++li)
                if (sw_high.lhs_part.strategies[li](x) == aa)
                    acc += (1.0 - sw_high.weight) * sw_high.lhs_part.states[li];
            CHECK((acc - high.sigma(aa, x)).cwiseAbs().maxCoeff() <= 1e-6);
        }
}

TEST_CASE("partial weight equals full weight on two inputs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 2; ++trial) {
        auto rho = random_density(4, rng);
        MeasurementSet ms;
        ms.povms = {random_povm(2, 2, rng), random_povm(2, 2, rng)};
        auto a = assemblage_from_state(rho, ms);
        auto sw = steering_weight(a);
        REQUIRE(solved(sw.status));
        for (int xs = 1; xs <= 2; ++xs) {
            auto psw = partial_steering_weight(a, xs);
            REQUIRE(solved(psw.status));
            CHECK(psw.weight == doctest::Approx(sw.weight).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("pairwise unsteerable but jointly steerable state separates the weights") {
    // Visibility between 1/sqrt(3) and 1/sqrt(2): every pair of the three
    // bases admits a hidden-state model, the triple does not.
    auto a = assemblage_from_state(rho_p_theta(0.65, M_PI / 4), xyz_meas());
    auto sw = steering_weight(a);
    REQUIRE(solved(sw.status));
    CHECK(sw.weight >= 1e-3);
    for (int xs = 1; xs <= 3; ++xs) {
        auto psw = partial_steering_weight(a, xs);
        REQUIRE(solved(psw.status));
        CHECK(psw.weight <= 1e-6);
        CHECK(psw.weight <= sw.weight + 1e-7);
        CHECK(guess_bound(psw, xs) >= 1.0 - 1e-5);
    }
}

TEST_CASE("partial weight never exceeds full weight") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 2; ++trial) {
        auto rho = random_density(4, rng);
        MeasurementSet ms;
        ms.povms = {random_povm(2, 2, rng), random_povm(2, 2, rng), random_povm(2, 2, rng)};
        auto a = assemblage_from_state(rho, ms);
        auto sw = steering_weight(a);
        auto psw = partial_steering_weight(a, 1);
        REQUIRE(solved(sw.status));
        REQUIRE(solved(psw.status));
        CHECK(psw.weight <= sw.weight + 1e-7);
    }
}

TEST_CASE("single input partial weight is zero by convention") {
    auto rho = rho_p_theta(0.9, M_PI / 4);
    MeasurementSet ms;
    ms.povms = {pauli_projectors(PauliAxis::Z)};
    auto a = assemblage_from_state(rho, ms);
    auto psw = partial_steering_weight(a, 1);
    CHECK(psw.status == conic::SolveStatus::Optimal);
    CHECK(psw.weight == 0.0);
    CHECK(psw.edge_ensembles.size() == 1);
}

TEST_CASE("star construction produces a partially unsteerable assemblage") {
    std::mt19937_64 rng(4242);
    const int d = 2, edges = 2;
    // Shared coarse graining at the star center, random split along each edge.
    std::vector<ComplexMatrix> f(d);
    double total = 0.0;
    for (int aa = 0; aa < d; ++aa) {
        f[aa] = random_psd(2, rng);
        total += f[aa].real().trace();
    }
    for (auto& m : f) m /= total;

    std::uniform_real_distribution<double> unif(0.05, 1.0);
    std::vector<HiddenStateEnsemble> ens(edges);
    for (int i = 0; i < edges; ++i)
        for (int aa = 0; aa < d; ++aa) {
            double c0 = unif(rng), c1 = unif(rng);
            const double s = c0 + c1;
            ens[i].strategies.push_back(DeterministicStrategy{{aa, 0}});
            ens[i].states.push_back((c0 / s) * f[aa]);
            ens[i].strategies.push_back(DeterministicStrategy{{aa, 1}});
            ens[i].states.push_back((c1 / s) * f[aa]);
        }

    for (int xs = 1; xs <= edges + 1; ++xs) {
        auto a = construct_partially_unsteerable(ens, xs);
        CHECK(validate_assemblage(a).ok);
        auto psw = partial_steering_weight(a, xs);
        REQUIRE(solved(psw.status));
        CHECK(psw.weight <= 1e-6);
    }

    // Mismatched star coarse grainings are rejected.
    auto bad = ens;
    bad[1].states[0] += 0.01 * ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(construct_partially_unsteerable(bad, 1), std::invalid_argument);

    // Hidden states must be over the input pair and positive.
    auto wrong_arity = ens;
    wrong_arity[0].strategies[0] = DeterministicStrategy{{0}};
    CHECK_THROWS_AS(construct_partially_unsteerable(wrong_arity, 1), std::invalid_argument);
    auto negative = ens;
    negative[0].states[0] = -negative[0].states[0];
    negative[1].states[0] = -negative[1].states[0];
    CHECK_THROWS_AS(construct_partially_unsteerable(negative, 1), std::invalid_argument);
}

TEST_CASE("two setting screen flags steerable pairs") {
    auto hit = two_setting_screen(pure(phi_plus_ket()), xyz_meas());
    CHECK(hit.steerable);
    CHECK(hit.weight > 0.1);
    CHECK(hit.pair_x1 >= 1);
    CHECK(hit.pair_x2 > hit.pair_x1);

    // Pairwise unsteerable visibility: no pair can witness steering.
    auto miss = two_setting_screen(rho_p_theta(0.65, M_PI / 4), xyz_meas());
    CHECK_FALSE(miss.steerable);
    CHECK(miss.weight <= 1e-5);
}
