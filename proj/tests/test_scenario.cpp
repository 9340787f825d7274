#include <cmath>
#include <random>

#include "doctest.h"
#include "randcert/scenario.hpp"

using namespace randcert;

namespace {

MeasurementSet paulis_xz() {
    MeasurementSet ms;
    ms.povms = {pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Z)};
    return ms;
}

double correlator(const Behavior& b, int x, int y) {
    double e = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) e += ((a + bb) % 2 == 0 ? 1.0 : -1.0) * b.p(a, bb, x, y);
    return e;
}

}  // namespace

TEST_CASE("enumerate_strategies is lexicographic and complete") {
    auto all = enumerate_strategies(2, 2);
    REQUIRE(all.size() == 4);
    CHECK(all[0].outcome_for_input == std::vector<int>{0, 0});
    CHECK(all[1].outcome_for_input == std::vector<int>{0, 1});
    CHECK(all[2].outcome_for_input == std::vector<int>{1, 0});
    CHECK(all[3].outcome_for_input == std::vector<int>{1, 1});
    CHECK(enumerate_strategies(1, 2).size() == 2);
    CHECK(enumerate_strategies(3, 3).size() == 27);
    CHECK_THROWS_AS(enumerate_strategies(30, 2, 1000), std::length_error);
}

TEST_CASE("assemblage from phi_plus with Z measurement") {
    MeasurementSet z;
    z.povms = {pauli_projectors(PauliAxis::Z)};
    ComplexVector v = phi_plus_ket();
    Assemblage a = assemblage_from_state(DensityMatrix{v * v.adjoint()}, z);
    ComplexMatrix e00 = ComplexMatrix::Zero(2, 2), e11 = ComplexMatrix::Zero(2, 2);
    e00(0, 0) = 0.5;
    e11(1, 1) = 0.5;
    CHECK((a.sigma(0, 1) - e00).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.sigma(1, 1) - e11).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("product states give product assemblages") {
    std::mt19937_64 rng(5);
    DensityMatrix rho_a = random_density(2, rng), rho_b = random_density(2, rng);
    DensityMatrix joint{kron(rho_a.matrix, rho_b.matrix)};
    MeasurementSet ms = paulis_xz();
    Assemblage a = assemblage_from_state(joint, ms);
    for (int x = 1; x <= 2; ++x)
        for (int out = 0; out < 2; ++out) {
            const double w = (ms.povm(x).effects[static_cast<std::size_t>(out)] * rho_a.matrix)
                                 .trace().real();
            CHECK((a.sigma(out, x) - w * rho_b.matrix).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("assemblage invariants hold for rho_p_theta with three paulis") {
    MeasurementSet ms;
    ms.povms = {pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Y),
                pauli_projectors(PauliAxis::Z)};
    Assemblage a = assemblage_from_state(rho_p_theta(0.7, M_PI / 4.0), ms);
    auto rep = validate_assemblage(a, 1e-10);
    CHECK(rep.ok);
    CHECK(rep.no_signaling_residual < 1e-10);
    CHECK(std::abs(a.reduced_state().trace().real() - 1.0) < 1e-10);
}

TEST_CASE("behavior from phi_plus, aligned Z measurements correlate perfectly") {
    MeasurementSet z;
    z.povms = {pauli_projectors(PauliAxis::Z)};
    ComplexVector v = phi_plus_ket();
    Behavior b = behavior_from_state(DensityMatrix{v * v.adjoint()}, z, z);
    CHECK(b.p(0, 0, 1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.p(1, 1, 1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(b.p(0, 1, 1, 1)) < 1e-12);
    CHECK(std::abs(b.p(1, 0, 1, 1)) < 1e-12);
}

TEST_CASE("chsh value at the optimal qubit angles") {
    MeasurementSet alice;
    alice.povms = {pauli_projectors(PauliAxis::Z), pauli_projectors(PauliAxis::X)};
    const double r = 1.0 / std::sqrt(2.0);
    MeasurementSet bob;
    bob.povms = {qubit_povm_from_bloch(r, 0.0, r), qubit_povm_from_bloch(-r, 0.0, r)};
    ComplexVector v = phi_plus_ket();
    Behavior b = behavior_from_state(DensityMatrix{v * v.adjoint()}, alice, bob);
    const double chsh = correlator(b, 1, 1) + correlator(b, 2, 1) + correlator(b, 1, 2) -
                        correlator(b, 2, 2);
    CHECK(chsh == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
    CHECK(is_no_signaling(b, 1e-10));
    CHECK(validate_behavior(b).ok);
}

TEST_CASE("maximally mixed state factorizes") {
    DensityMatrix mixed{ComplexMatrix::Identity(4, 4) / 4.0};
    MeasurementSet ms = paulis_xz();
    Behavior b = behavior_from_state(mixed, ms, ms);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb)
                    CHECK(b.p(a, bb, x, y) ==
                          doctest::Approx(b.marginal_a(a, x, y) * b.marginal_b(bb, x, y))
                              .epsilon(1e-10));
}

TEST_CASE("deterministic behaviors are no-signaling with unit entries") {
    DeterministicStrategy alice{{1, 0}}, bob{{0, 1}};
    Behavior b = deterministic_behavior(alice, bob, 2, 2);
    CHECK(b.p(1, 0, 1, 1) == 1.0);
    CHECK(b.p(0, 1, 2, 2) == 1.0);
    CHECK(no_signaling_residual(b) == 0.0);
    CHECK(validate_behavior(b).ok);
}

TEST_CASE("signaling is detected") {
    Behavior b = make_behavior(2, 1, 2, 2);
    // Alice marginal depends on y is impossible with m_b=1; make Bob's depend on x instead.
    b = make_behavior(2, 2, 2, 2);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) {
            b.p(0, 0, x, y) = (x == 1) ? 1.0 : 0.0;
            b.p(0, 1, x, y) = (x == 1) ? 0.0 : 1.0;
        }
    CHECK(validate_behavior(b).ok);
    CHECK(no_signaling_residual(b) == doctest::Approx(1.0));
    CHECK_FALSE(is_no_signaling(b));
}

TEST_CASE("chain pairs and projection") {
    InputPairSet pairs = InputPairSet::chain_pairs(2);
    REQUIRE(pairs.pairs.size() == 4);
    CHECK(pairs.contains(1, 1));
    CHECK(pairs.contains(2, 1));
    CHECK(pairs.contains(2, 2));
    CHECK(pairs.contains(1, 2));

    DeterministicStrategy alice{{0, 1}}, bob{{1, 1}};
    Behavior b = deterministic_behavior(alice, bob, 2, 2);
    auto proj = project_behavior(b, pairs);
    CHECK(proj.size() == 16);  // 4 pairs x d^2 entries
    for (const auto& [key, val] : proj) {
        auto [a, bb, x, y] = key;
        CHECK(val == b.p(a, bb, x, y));
    }
    InputPairSet none;
    CHECK(project_behavior(b, none).empty());
}
