#include <cmath>
#include <random>

#include "doctest.h"
#include "randcert/qmath.hpp"

using namespace randcert;

namespace {

ComplexMatrix random_complex(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = std::complex<double>(g(rng), g(rng));
    return m;
}

// Entrywise definition, independent of the block implementation.
ComplexMatrix kron_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

}  // namespace

TEST_CASE("kron matches the entrywise definition") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 5; ++t) {
        ComplexMatrix a = random_complex(2 + t % 3, 3, rng);
        ComplexMatrix b = random_complex(2, 2 + t % 2, rng);
        CHECK((kron(a, b) - kron_oracle(a, b)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("kron is associative") {
    std::mt19937_64 rng(11);
    ComplexMatrix a = random_complex(2, 2, rng), b = random_complex(3, 3, rng),
                  c = random_complex(2, 2, rng);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace inverts kron up to the traced factor") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 5; ++t) {
        ComplexMatrix a = random_psd(2, rng), b = random_psd(3, rng);
        ComplexMatrix full = kron(a, b);
        CHECK((partial_trace(full, 2, 3, Subsystem::B) - a.trace() * b).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((partial_trace(full, 2, 3, Subsystem::A) - b.trace() * a).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(partial_trace(full, 2, 3, Subsystem::A).trace().real() ==
              doctest::Approx(full.trace().real()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(partial_trace(ComplexMatrix::Identity(5, 5), 2, 3, Subsystem::A),
                    std::invalid_argument);
}

TEST_CASE("pauli projectors are complete rank-1 projectors") {
    for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        Povm p = pauli_projectors(axis);
        REQUIRE(p.outcomes() == 2);
        ComplexMatrix sum = p.effects[0] + p.effects[1];
        CHECK((sum - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
        for (const auto& e : p.effects) {
            CHECK((e * e - e).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(e.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    // outcome 0 of Z is |0><0|
    Povm z = pauli_projectors(PauliAxis::Z);
    CHECK(std::abs(z.effects[0](0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(z.effects[0](1, 1)) < 1e-14);
}

TEST_CASE("qubit povm from bloch vector") {
    Povm p = qubit_povm_from_bloch(0.3, 0.4, 0.5);
    ComplexMatrix sum = p.effects[0] + p.effects[1];
    CHECK((sum - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(validate_povm(p).ok);
    CHECK_THROWS_AS(qubit_povm_from_bloch(1.0, 1.0, 0.0), std::invalid_argument);
    // unit vectors reproduce the sharp projectors
    Povm x = qubit_povm_from_bloch(1.0, 0.0, 0.0);
    CHECK((x.effects[0] - pauli_projectors(PauliAxis::X).effects[0]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("psi_theta and phi_plus") {
    ComplexVector v = psi_theta_ket(M_PI / 4.0);
    CHECK((v - phi_plus_ket()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
    ComplexVector w = psi_theta_ket(0.3);
    CHECK(std::abs(w(0) - std::cos(0.3)) < 1e-14);
    CHECK(std::abs(w(3) - std::sin(0.3)) < 1e-14);
    CHECK(std::abs(w(1)) + std::abs(w(2)) < 1e-14);
}

TEST_CASE("rho_p_theta limits and psd grid") {
    DensityMatrix pure = rho_p_theta(1.0, M_PI / 4.0);
    ComplexVector v = phi_plus_ket();
    CHECK((pure.matrix - v * v.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    DensityMatrix mixed = rho_p_theta(0.0, 0.3);
    ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
    const double c2 = std::cos(0.3) * std::cos(0.3), s2 = std::sin(0.3) * std::sin(0.3);
    expect(0, 0) = c2 / 2; expect(1, 1) = s2 / 2; expect(2, 2) = c2 / 2; expect(3, 3) = s2 / 2;
    CHECK((mixed.matrix - expect).cwiseAbs().maxCoeff() < 1e-14);

    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            DensityMatrix rho = rho_p_theta(i / 19.0, (j + 1) / 20.0 * M_PI / 4.0);
            auto rep = validate_density(rho);
            CHECK(rep.ok);
            CHECK(rep.psd_floor > -1e-12);
            CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-12);
        }
    CHECK_THROWS_AS(rho_p_theta(1.5, 0.3), std::invalid_argument);
}

TEST_CASE("validators flag broken inputs") {
    DensityMatrix bad{ComplexMatrix::Identity(2, 2)};  // trace 2
    CHECK_FALSE(validate_density(bad).ok);
    DensityMatrix good{ComplexMatrix::Identity(2, 2) / 2.0};
    CHECK(validate_density(good).ok);

    Povm broken;
    broken.effects = {ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)};
    CHECK_FALSE(validate_povm(broken).ok);  // sums to 2I

    Povm neg;
    neg.effects = {2.0 * ComplexMatrix::Identity(2, 2), -ComplexMatrix::Identity(2, 2)};
    auto rep = validate_povm(neg);
    CHECK_FALSE(rep.ok);
    CHECK(rep.psd_floor < -0.5);
}

TEST_CASE("random generators produce valid objects") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 5; ++t) {
        CHECK(min_eigenvalue(random_psd(3, rng)) > -1e-12);
        CHECK(validate_density(random_density(3, rng)).ok);
        Povm p = random_povm(2, 3, rng);
        CHECK(validate_povm(p).ok);
        CHECK(std::abs(random_ket(4, rng).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("min_eigenvalue on a known spectrum") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = -2.0;
    CHECK(min_eigenvalue(m) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(is_psd(ComplexMatrix::Identity(3, 3)));
    CHECK_FALSE(is_psd(m));
}
