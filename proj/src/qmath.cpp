#include "randcert/qmath.hpp"

#include <cmath>

namespace randcert {

ComplexMatrix partial_trace(const ComplexMatrix& m, int dim_a, int dim_b, Subsystem keep) {
    if (m.rows() != m.cols()) throw std::invalid_argument("partial_trace: matrix not square");
    if (dim_a < 1 || dim_b < 1 || m.rows() != static_cast<Eigen::Index>(dim_a) * dim_b)
        throw std::invalid_argument("partial_trace: dimension mismatch");
    if (keep == Subsystem::B) {
        ComplexMatrix out = ComplexMatrix::Zero(dim_b, dim_b);
        for (int i = 0; i < dim_b; ++i)
            for (int j = 0; j < dim_b; ++j)
                for (int k = 0; k < dim_a; ++k)
                    out(i, j) += m(k * dim_b + i, k * dim_b + j);
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
    for (int i = 0; i < dim_a; ++i)
        for (int j = 0; j < dim_a; ++j)
            for (int k = 0; k < dim_b; ++k)
                out(i, j) += m(i * dim_b + k, j * dim_b + k);
    return out;
}

double hermiticity_residual(const ComplexMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
    return m.rows() == m.cols() && hermiticity_residual(m) <= tol;
}

double min_eigenvalue(const ComplexMatrix& m) {
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_psd(const ComplexMatrix& m, double tol) {
    return is_hermitian(m, tol) && min_eigenvalue(m) >= -tol;
}

static bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

ValidationReport validate_density(const DensityMatrix& rho, const Tolerances& tol) {
    ValidationReport r;
    const ComplexMatrix& m = rho.matrix;
    if (m.rows() != m.cols() || m.rows() == 0 || !all_finite(m)) {
        r.detail = "not a finite square matrix";
        return r;
    }
    r.hermitian_residual = hermiticity_residual(m);
    r.psd_floor = min_eigenvalue(m);
    r.trace_residual = std::abs(m.trace().real() - 1.0) + std::abs(m.trace().imag());
    r.ok = r.hermitian_residual <= tol.hermitian && r.psd_floor >= -tol.psd &&
           r.trace_residual <= tol.trace;
    return r;
}

ValidationReport validate_povm(const Povm& p, const Tolerances& tol) {
    ValidationReport r;
    if (p.effects.empty()) {
        r.detail = "no effects";
        return r;
    }
    const int d = p.dim();
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto& e : p.effects) {
        if (e.rows() != d || e.cols() != d || !all_finite(e)) {
            r.detail = "effect shape mismatch";
            return r;
        }
        r.hermitian_residual = std::max(r.hermitian_residual, hermiticity_residual(e));
        r.psd_floor = std::min(r.psd_floor, min_eigenvalue(e));
        sum += e;
    }
    r.identity_residual = (sum - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    r.ok = r.hermitian_residual <= tol.hermitian && r.psd_floor >= -tol.psd &&
           r.identity_residual <= tol.identity;
    return r;
}

ValidationReport validate_measurement_set(const MeasurementSet& ms, const Tolerances& tol) {
    ValidationReport r;
    if (ms.povms.empty()) {
        r.detail = "no measurements";
        return r;
    }
    const int d = ms.dim(), k = ms.outcomes();
    r.ok = true;
    for (const auto& p : ms.povms) {
        if (p.dim() != d || p.outcomes() != k) {
            r.ok = false;
            r.detail = "ragged measurement set";
            return r;
        }
        ValidationReport sub = validate_povm(p, tol);
        r.hermitian_residual = std::max(r.hermitian_residual, sub.hermitian_residual);
        r.psd_floor = std::min(r.psd_floor, sub.psd_floor);
        r.identity_residual = std::max(r.identity_residual, sub.identity_residual);
        r.ok = r.ok && sub.ok;
    }
    return r;
}

Povm pauli_projectors(PauliAxis axis) {
    using namespace std::complex_literals;
    ComplexMatrix p0(2, 2), p1(2, 2);
    switch (axis) {
        case PauliAxis::Z:
            p0 << 1, 0, 0, 0;
            p1 << 0, 0, 0, 1;
            break;
        case PauliAxis::X:
            p0 << 0.5, 0.5, 0.5, 0.5;
            p1 << 0.5, -0.5, -0.5, 0.5;
            break;
        case PauliAxis::Y:
            p0 << 0.5, -0.5i, 0.5i, 0.5;
            p1 << 0.5, 0.5i, -0.5i, 0.5;
            break;
    }
    return Povm{{p0, p1}};
}

Povm qubit_povm_from_bloch(double vx, double vy, double vz) {
    if (std::sqrt(vx * vx + vy * vy + vz * vz) > 1.0 + 1e-12)
        throw std::invalid_argument("qubit_povm_from_bloch: Bloch vector longer than 1");
    using namespace std::complex_literals;
    ComplexMatrix n(2, 2);
    n << vz, vx - 1i * vy, vx + 1i * vy, -vz;
    ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    return Povm{{0.5 * (id + n), 0.5 * (id - n)}};
}

ComplexVector psi_theta_ket(double theta) {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = std::cos(theta);
    v(3) = std::sin(theta);
    return v;
}

ComplexVector phi_plus_ket() { return psi_theta_ket(M_PI / 4.0); }

DensityMatrix rho_p_theta(double p, double theta) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("rho_p_theta: p outside [0,1]");
    ComplexVector psi = psi_theta_ket(theta);
    ComplexMatrix pure = psi * psi.adjoint();
    ComplexMatrix rho_b(2, 2);
    rho_b << std::cos(theta) * std::cos(theta), 0, 0, std::sin(theta) * std::sin(theta);
    ComplexMatrix noise = kron(0.5 * ComplexMatrix::Identity(2, 2), rho_b);
    return DensityMatrix{p * pure + (1.0 - p) * noise};
}

ComplexMatrix random_psd(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
    return a * a.adjoint();
}

DensityMatrix random_density(int dim, std::mt19937_64& rng) {
    ComplexMatrix m = random_psd(dim, rng);
    return DensityMatrix{m / m.trace().real()};
}

Povm random_povm(int dim, int outcomes, std::mt19937_64& rng) {
    // Conjugate random PSD pieces by S^{-1/2} so they sum to the identity.
    std::vector<ComplexMatrix> raw;
    ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < outcomes; ++k) {
        raw.push_back(random_psd(dim, rng));
        s += raw.back();
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s);
    ComplexMatrix si = es.operatorInverseSqrt();
    Povm p;
    for (auto& m : raw) p.effects.push_back(si * m * si);
    return p;
}

ComplexVector random_ket(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = std::complex<double>(g(rng), g(rng));
    return v / v.norm();
}

}  // namespace randcert
