#pragma once
// Dense complex linear algebra helpers shared by every module.
// Conventions: kets are column vectors, composite indices are row-major
// (subsystem A major, B minor), tolerances default to 1e-9.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace randcert {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct Tolerances {
    double hermitian = 1e-9;
    double psd = 1e-9;
    double trace = 1e-9;
    double identity = 1e-9;
};

// Kronecker product, row-major composite index: (a o+ b)(i_a*rb + i_b, j_a*cb + j_b).
template <typename DerivedA, typename DerivedB>
ComplexMatrix kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                std::complex<double>(a(i, j)) * b.derived().template cast<std::complex<double>>();
    return out;
}

enum class Subsystem { A, B };

// Trace out the complementary subsystem of a dimA*dimB square matrix.
ComplexMatrix partial_trace(const ComplexMatrix& m, int dim_a, int dim_b, Subsystem keep);

double hermiticity_residual(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = 1e-9);
// Smallest eigenvalue of the symmetrized matrix (what PSD checks floor against).
double min_eigenvalue(const ComplexMatrix& m);
bool is_psd(const ComplexMatrix& m, double tol = 1e-9);

struct ValidationReport {
    bool ok = false;
    double hermitian_residual = 0.0;
    double psd_floor = 0.0;     // min eigenvalue, >= -tol when ok
    double trace_residual = 0.0;
    double identity_residual = 0.0;  // POVM completeness / normalization
    std::string detail;
};

struct DensityMatrix {
    ComplexMatrix matrix;
    int dim() const { return static_cast<int>(matrix.rows()); }
};

struct Povm {
    std::vector<ComplexMatrix> effects;
    int outcomes() const { return static_cast<int>(effects.size()); }
    int dim() const { return effects.empty() ? 0 : static_cast<int>(effects[0].rows()); }
};

// One POVM per input, uniform outcome count and dimension across inputs.
struct MeasurementSet {
    std::vector<Povm> povms;
    int inputs() const { return static_cast<int>(povms.size()); }
    int outcomes() const { return povms.empty() ? 0 : povms[0].outcomes(); }
    int dim() const { return povms.empty() ? 0 : povms[0].dim(); }
    // 1-based input index, matching the rest of the library.
    const Povm& povm(int x) const { return povms.at(static_cast<size_t>(x) - 1); }
};

ValidationReport validate_density(const DensityMatrix& rho, const Tolerances& tol = {});
ValidationReport validate_povm(const Povm& m, const Tolerances& tol = {});
ValidationReport validate_measurement_set(const MeasurementSet& ms, const Tolerances& tol = {});

enum class PauliAxis { X, Y, Z };

// Rank-1 projectors onto the +1/-1 eigenvectors, outcome 0 = +1 eigenvector.
Povm pauli_projectors(PauliAxis axis);
// Two-outcome POVM {(I + v.sigma)/2, (I - v.sigma)/2} for a Bloch vector v, |v| <= 1.
Povm qubit_povm_from_bloch(double vx, double vy, double vz);

ComplexVector psi_theta_ket(double theta);   // cos(theta)|00> + sin(theta)|11>
ComplexVector phi_plus_ket();                // psi_theta(pi/4)
// p * |psi_theta><psi_theta| + (1-p) * (I_2/2) (x) diag(cos^2, sin^2).
DensityMatrix rho_p_theta(double p, double theta);

// Seeded sampling helpers used by tests and CLI sweeps.
ComplexMatrix random_psd(int dim, std::mt19937_64& rng);
DensityMatrix random_density(int dim, std::mt19937_64& rng);
Povm random_povm(int dim, int outcomes, std::mt19937_64& rng);
ComplexVector random_ket(int dim, std::mt19937_64& rng);

}  // namespace randcert
