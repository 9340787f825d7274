#pragma once
// Backend-neutral semidefinite programming layer. Programs are stated over
// Hermitian (or real symmetric) matrix variables with linear equality
// constraints and a real linear objective; complex variables are lowered to
// the real symmetric embedding [[Re, -Im], [Im, Re]] before solving.
// Every solve re-checks the returned point against the original constraints
// independently of the solver loop.

#include <string>
#include <vector>

#include "randcert/qmath.hpp"

namespace randcert::conic {

enum class VarKind { RealSymmetric, HermitianComplex };

struct VariableSpec {
    int dim = 0;
    VarKind kind = VarKind::HermitianComplex;
    std::string name;
};

// One addend <coeff, X_var> of a constraint or objective; coeff must be
// Hermitian, the pairing is tr(coeff * X) which is then real.
struct CoefficientTerm {
    int var = -1;
    ComplexMatrix coeff;
};

struct LinearConstraint {
    std::vector<CoefficientTerm> terms;
    double rhs = 0.0;
};

enum class Sense { Minimize, Maximize };

struct ConicProgram {
    std::vector<VariableSpec> variables;
    std::vector<LinearConstraint> constraints;
    std::vector<CoefficientTerm> objective;
    double objective_constant = 0.0;
    Sense sense = Sense::Maximize;

    int add_variable(int dim, VarKind kind, std::string name = "");
    void add_equality(std::vector<CoefficientTerm> terms, double rhs);
    // Convenience: single-variable equality <coeff, X_var> = rhs.
    void add_equality(int var, const ComplexMatrix& coeff, double rhs);
    void set_objective(std::vector<CoefficientTerm> terms, Sense sense, double constant = 0.0);
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate, Failed };

std::string to_string(SolveStatus s);

struct SolveOptions {
    double eps = 1e-8;
    int max_iter = 50000;
    bool verbose = false;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Failed;
    double value = 0.0;                  // objective in the stated sense, incl. constant
    std::vector<ComplexMatrix> primal;   // one matrix per variable (empty unless solved)
    int iterations = 0;
    // Independent post-solve check against the original program.
    double eq_residual = 0.0;   // max |<C_i, X> - b_i|
    double psd_floor = 0.0;     // min eigenvalue over all variables
    // Solver-internal relative accuracy measures.
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    std::string detail;
};

SolveReport solve(const ConicProgram& prog, const SolveOptions& opts = {});

// Documented JSON form of a program (matrices as row-major [re, im] pairs).
std::string dump_program_json(const ConicProgram& prog);

// One addend of a matrix-valued equality. With shape empty the term is
// scale * X_var; with shape set the variable must be 1x1 and the term is
// x * scale * shape.
struct MatrixTerm {
    int var = -1;
    double scale = 1.0;
    ComplexMatrix shape;
};

// Expands sum of terms = rhs into entrywise scalar equalities over the
// Hermitian basis (real part for i <= j, imaginary part for i < j).
void add_matrix_equality(ConicProgram& prog, const std::vector<MatrixTerm>& terms,
                         const ComplexMatrix& rhs);

// Hermitian basis elements: <sym_entry_real(n,i,j), X> = Re X_ij and
// <sym_entry_imag(n,i,j), X> = Im X_ij for Hermitian X.
ComplexMatrix sym_entry_real(int dim, int i, int j);
ComplexMatrix sym_entry_imag(int dim, int i, int j);

}  // namespace randcert::conic
