#include <cmath>
#include <random>

#include "doctest.h"
#include "randcert/conic.hpp"

using namespace randcert;
using namespace randcert::conic;

namespace {

ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = std::complex<double>(g(rng), g(rng));
    return ComplexMatrix(0.5 * (m + m.adjoint()));
}

}  // namespace

TEST_CASE("normalization program attains value one") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.set_objective({{x, ComplexMatrix::Identity(2, 2)}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.eq_residual < 1e-7);
    CHECK(rep.psd_floor > -1e-7);
}

TEST_CASE("negative trace requirement is infeasible") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), -1.0);
    prog.set_objective({}, Sense::Maximize);
    auto rep = solve(prog);
    CHECK(rep.status == SolveStatus::Infeasible);
}

TEST_CASE("indefinite objective picks the top eigenvalue") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    ComplexMatrix c = ComplexMatrix::Zero(2, 2);
    c(0, 0) = 1.0;
    c(1, 1) = -1.0;
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.set_objective({{x, c}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.primal[0](0, 0).real() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("complex hermitian variables reach sigma_y eigenvalue") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::HermitianComplex, "X");
    ComplexMatrix sy = ComplexMatrix::Zero(2, 2);
    sy(0, 1) = std::complex<double>(0.0, -1.0);
    sy(1, 0) = std::complex<double>(0.0, 1.0);
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.set_objective({{x, sy}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-6));
    // optimal X is the +1 eigenprojector of sigma_y, with imaginary parts
    CHECK(rep.primal[0](0, 1).imag() == doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("largest eigenvalue sdp matches the eigensolver on random data") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 8; ++t) {
        const int n = 2 + t % 4;
        ComplexMatrix c = random_hermitian(n, rng);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
        const double lmax = es.eigenvalues().maxCoeff();
        ConicProgram prog;
        int x = prog.add_variable(n, VarKind::HermitianComplex, "X");
        prog.add_equality(x, ComplexMatrix::Identity(n, n), 1.0);
        prog.set_objective({{x, c}}, Sense::Maximize);
        auto rep = solve(prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        CHECK(rep.value == doctest::Approx(lmax).epsilon(1e-6));
        CHECK(rep.eq_residual < 1e-7);
        CHECK(rep.psd_floor > -1e-7);
    }
}

TEST_CASE("minimize sense and objective constant") {
    std::mt19937_64 rng(29);
    ComplexMatrix c = random_hermitian(3, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
    ConicProgram prog;
    int x = prog.add_variable(3, VarKind::HermitianComplex, "X");
    prog.add_equality(x, ComplexMatrix::Identity(3, 3), 1.0);
    prog.set_objective({{x, c}}, Sense::Minimize, 2.0);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(es.eigenvalues().minCoeff() + 2.0).epsilon(1e-6));
}

TEST_CASE("redundant constraints are tolerated, inconsistent ones rejected") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);  // duplicate row
    prog.set_objective({{x, ComplexMatrix::Identity(2, 2)}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-7));

    ConicProgram bad;
    int z = bad.add_variable(2, VarKind::RealSymmetric, "X");
    bad.add_equality(z, ComplexMatrix::Identity(2, 2), 1.0);
    bad.add_equality(z, ComplexMatrix::Identity(2, 2), 2.0);  // contradictory
    bad.set_objective({}, Sense::Maximize);
    CHECK(solve(bad).status == SolveStatus::Infeasible);
}

TEST_CASE("conic infeasibility is certified, not just linear inconsistency") {
    // X psd with X_00 = -1/2 has no solution though the linear system is fine.
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    prog.add_equality(x, sym_entry_real(2, 0, 0), -0.5);
    prog.set_objective({}, Sense::Maximize);
    CHECK(solve(prog).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded objective is reported") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    prog.add_equality(x, sym_entry_real(2, 0, 1), 0.0);
    prog.set_objective({{x, ComplexMatrix::Identity(2, 2)}}, Sense::Maximize);
    CHECK(solve(prog).status == SolveStatus::Unbounded);
}

TEST_CASE("entry extraction basis works on hermitian variables") {
    std::mt19937_64 rng(31);
    ComplexMatrix target = random_hermitian(3, rng);
    target += 4.0 * ComplexMatrix::Identity(3, 3);  // keep strictly positive
    ConicProgram prog;
    int x = prog.add_variable(3, VarKind::HermitianComplex, "X");
    add_matrix_equality(prog, {MatrixTerm{x, 1.0, {}}}, target);
    prog.set_objective({{x, ComplexMatrix::Identity(3, 3)}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK((rep.primal[0] - target).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("scalar variables with shaped terms") {
    // max eta subject to X = eta * diag(1,2) and tr X = 1.
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    int eta = prog.add_variable(1, VarKind::RealSymmetric, "eta");
    ComplexMatrix shape = ComplexMatrix::Zero(2, 2);
    shape(0, 0) = 1.0;
    shape(1, 1) = 2.0;
    add_matrix_equality(prog, {MatrixTerm{x, 1.0, {}}, MatrixTerm{eta, -1.0, shape}},
                        ComplexMatrix::Zero(2, 2));
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.set_objective({{eta, ComplexMatrix::Identity(1, 1)}}, Sense::Maximize);
    auto rep = solve(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.value == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("program json dump carries the full structure") {
    ConicProgram prog;
    int x = prog.add_variable(2, VarKind::HermitianComplex, "X");
    prog.add_equality(x, ComplexMatrix::Identity(2, 2), 1.0);
    prog.set_objective({{x, ComplexMatrix::Identity(2, 2)}}, Sense::Maximize);
    const std::string dump = dump_program_json(prog);
    CHECK(dump.find("\"conic_program\"") != std::string::npos);
    CHECK(dump.find("\"maximize\"") != std::string::npos);
    CHECK(dump.find("\"hermitian\"") != std::string::npos);
}

TEST_CASE("builder rejects malformed programs") {
    ConicProgram prog;
    CHECK_THROWS_AS(prog.add_variable(0, VarKind::RealSymmetric), std::invalid_argument);
    int x = prog.add_variable(2, VarKind::RealSymmetric, "X");
    CHECK_THROWS_AS(prog.add_equality(x, ComplexMatrix::Identity(3, 3), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(prog.add_equality(7, ComplexMatrix::Identity(2, 2), 1.0),
                    std::invalid_argument);
    ComplexMatrix nonherm = ComplexMatrix::Zero(2, 2);
    nonherm(0, 1) = 1.0;
    CHECK_THROWS_AS(prog.add_equality(x, nonherm, 1.0), std::invalid_argument);
}
