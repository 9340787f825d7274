#include "randcert/compat.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "randcert/qmath.hpp"

using namespace randcert;
using namespace randcert::compat;

namespace {

// For qubit two-outcome POVMs with unit-trace effects and Bloch vectors
// v1, v2, the depolarizing robustness is min(1, 2/(|v1+v2| + |v1-v2|)).
double bloch_pair_eta(const Eigen::Vector3d& v1, const Eigen::Vector3d& v2) {
    double s = (v1 + v2).norm() + (v1 - v2).norm();
    return std::min(1.0, 2.0 / s);
}

Povm bloch_povm(const Eigen::Vector3d& v) { return qubit_povm_from_bloch(v(0), v(1), v(2)); }

}  // namespace

TEST_CASE("sharp orthogonal pair has robustness 1/sqrt(2)") {
    auto rep = joint_measurability({pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Z)});
    CHECK(rep.status == conic::SolveStatus::Optimal);
    CHECK_FALSE(rep.compatible);
    CHECK(rep.eta == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("sharp pauli triple has robustness 1/sqrt(3)") {
    auto rep = joint_measurability({pauli_projectors(PauliAxis::X), pauli_projectors(PauliAxis::Y),
                                    pauli_projectors(PauliAxis::Z)});
    CHECK_FALSE(rep.compatible);
    CHECK(rep.eta == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("noisy orthogonal pair is compatible with a reproducing parent") {
    auto rep = joint_measurability({bloch_povm({0.5, 0, 0}), bloch_povm({0, 0, 0.5})});
    CHECK(rep.compatible);
    CHECK(rep.eta == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.reproduction_residual <= 1e-6);
    Tolerances loose;
    loose.psd = 1e-6;
    loose.identity = 1e-6;
    loose.hermitian = 1e-6;
    CHECK(validate_povm(rep.parent.povm, loose).ok);
    CHECK(rep.parent.povm.outcomes() == 4);
    CHECK(rep.parent.assignments.size() == 4);
}

TEST_CASE("pair robustness matches the closed form on random qubit pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    int tested = 0;
    while (tested < 6) {
        Eigen::Vector3d v1, v2;
        for (int i = 0; i < 3; ++i) { v1(i) = unif(rng); v2(i) = unif(rng); }
        if (v1.norm() > 1.0 || v2.norm() > 1.0) continue;
        double expected = bloch_pair_eta(v1, v2);
        if (std::abs(expected - 1.0) < 1e-4 && expected < 1.0) continue;  // boundary flap
        auto rep = joint_measurability({bloch_povm(v1), bloch_povm(v2)});
        CHECK(rep.eta == doctest::Approx(expected).epsilon(1e-6));
        ++tested;
    }
}

TEST_CASE("single povm is trivially compatible") {
    auto rep = joint_measurability({pauli_projectors(PauliAxis::Z)});
    CHECK(rep.compatible);
    CHECK(rep.eta == 1.0);
    CHECK(rep.parent.povm.outcomes() == 2);
}

TEST_CASE("mixed families and caps are rejected") {
    CHECK_THROWS_AS(joint_measurability({}), std::invalid_argument);
    std::vector<Povm> four(4, pauli_projectors(PauliAxis::Z));
    CHECK_THROWS_AS(joint_measurability(four, {}, 8), std::length_error);
}

TEST_CASE("structure of a z z x z family") {
    MeasurementSet meas;
    meas.povms = {bloch_povm({0, 0, 0.3}), bloch_povm({0, 0, 0.7}), bloch_povm({0.9, 0, 0}),
                  bloch_povm({0, 0, 0.8})};
    auto h = compatibility_structure(meas);
    REQUIRE(h.vertices == 4);
    REQUIRE(h.hyperedges.size() == 2);
    CHECK(h.hyperedges[0] == std::vector<int>{1, 2, 4});
    CHECK(h.hyperedges[1] == std::vector<int>{1, 3});

    CHECK(h.is_compatible({1, 2}));
    CHECK(h.is_compatible({2, 4}));
    CHECK_FALSE(h.is_compatible({2, 3}));
    CHECK(h.is_compatible({3}));

    CHECK(contains_star(h, 1));
    CHECK_FALSE(contains_star(h, 3));
    CHECK_FALSE(contains_block_star(h, {2, 4}));
    CHECK_FALSE(contains_block_star(h, {1, 2, 4}));
}

TEST_CASE("pairwise compatible triple without a joint parent") {
    double eta = 0.6;  // above 1/sqrt(3), below 1/sqrt(2)
    MeasurementSet meas;
    meas.povms = {bloch_povm({eta, 0, 0}), bloch_povm({0, eta, 0}), bloch_povm({0, 0, eta})};
    auto h = compatibility_structure(meas);
    REQUIRE(h.hyperedges.size() == 3);
    CHECK(h.hyperedges[0] == std::vector<int>{1, 2});
    CHECK(h.hyperedges[1] == std::vector<int>{1, 3});
    CHECK(h.hyperedges[2] == std::vector<int>{2, 3});
    CHECK(contains_star(h, 1));
    CHECK(contains_block_star(h, {1}));
    CHECK_FALSE(contains_block_star(h, {2, 3}));
    CHECK_FALSE(h.is_compatible({1, 2, 3}));
}

TEST_CASE("fully compatible pair gives one full edge") {
    MeasurementSet meas;
    meas.povms = {bloch_povm({0.5, 0, 0}), bloch_povm({0, 0, 0.5})};
    auto h = compatibility_structure(meas);
    REQUIRE(h.hyperedges.size() == 1);
    CHECK(h.hyperedges[0] == std::vector<int>{1, 2});
    CHECK(contains_block_star(h, {1, 2}));
    CHECK(contains_star(h, 1));
    CHECK(contains_star(h, 2));
}

TEST_CASE("structure cap") {
    MeasurementSet meas;
    meas.povms.assign(6, pauli_projectors(PauliAxis::Z));
    CHECK_THROWS_AS(compatibility_structure(meas), std::length_error);
}

TEST_CASE("hypergraph json round trip") {
    CompatHypergraph h;
    h.vertices = 4;
    h.hyperedges = {{1, 2, 4}, {1, 3}};
    auto j = hypergraph_to_json(h);
    auto back = hypergraph_from_json(j);
    CHECK(back.vertices == 4);
    CHECK(back.hyperedges == h.hyperedges);
    CHECK_THROWS_AS(hypergraph_from_json(nlohmann::json{{"type", "behavior"}}),
                    std::invalid_argument);
}
