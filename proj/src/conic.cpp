#include "randcert/conic.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ipm.hpp"
#include "json.hpp"
#include "randcert/serialize.hpp"

namespace randcert::conic {

namespace {

void check_term(const ConicProgram& prog, const CoefficientTerm& t) {
    if (t.var < 0 || t.var >= static_cast<int>(prog.variables.size()))
        throw std::invalid_argument("coefficient references undeclared variable");
    const int n = prog.variables[static_cast<std::size_t>(t.var)].dim;
    if (t.coeff.rows() != n || t.coeff.cols() != n)
        throw std::invalid_argument("coefficient dimension does not match variable");
    if (hermiticity_residual(t.coeff) > 1e-9)
        throw std::invalid_argument("coefficient must be Hermitian");
}

// Lowered real-symmetric coefficient; Hermitian blocks use [[Re,-Im],[Im,Re]]/2
// so that <lowered, embedded X> = tr(coeff * H) for the recovered Hermitian H.
Eigen::MatrixXd lower_coeff(const ComplexMatrix& c, VarKind kind) {
    const Eigen::MatrixXd re = 0.5 * (c.real() + c.real().transpose());
    if (kind == VarKind::RealSymmetric) return re;
    const Eigen::MatrixXd im = 0.5 * (c.imag() - c.imag().transpose());
    const auto n = c.rows();
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = 0.5 * re;
    out.bottomRightCorner(n, n) = 0.5 * re;
    out.topRightCorner(n, n) = -0.5 * im;
    out.bottomLeftCorner(n, n) = 0.5 * im;
    return out;
}

int lowered_dim(const VariableSpec& v) {
    return v.kind == VarKind::RealSymmetric ? v.dim : 2 * v.dim;
}

ComplexMatrix recover_variable(const Eigen::MatrixXd& block, const VariableSpec& v) {
    if (v.kind == VarKind::RealSymmetric) {
        ComplexMatrix h = (0.5 * (block + block.transpose())).cast<std::complex<double>>();
        return h;
    }
    const int n = v.dim;
    ComplexMatrix h(n, n);
    h.real() = 0.5 * (block.topLeftCorner(n, n) + block.bottomRightCorner(n, n));
    h.imag() = 0.5 * (block.bottomLeftCorner(n, n) - block.topRightCorner(n, n));
    return ComplexMatrix(0.5 * (h + h.adjoint()));
}

int svec_len(int n) { return n * (n + 1) / 2; }

void fill_svec(Eigen::Ref<Eigen::VectorXd> dst, const Eigen::MatrixXd& c) {
    static const double rt2 = std::sqrt(2.0);
    int idx = 0;
    for (int j = 0; j < c.cols(); ++j)
        for (int i = 0; i <= j; ++i) dst(idx++) = (i == j) ? c(i, j) : rt2 * c(i, j);
}

double objective_on(const ConicProgram& prog, const std::vector<ComplexMatrix>& primal) {
    double v = prog.objective_constant;
    for (const auto& t : prog.objective)
        v += (t.coeff.adjoint() * primal[static_cast<std::size_t>(t.var)]).trace().real();
    return v;
}

}  // namespace

int ConicProgram::add_variable(int dim, VarKind kind, std::string name) {
    if (dim < 1) throw std::invalid_argument("variable dimension must be positive");
    variables.push_back({dim, kind, std::move(name)});
    return static_cast<int>(variables.size()) - 1;
}

void ConicProgram::add_equality(std::vector<CoefficientTerm> terms, double rhs) {
    for (const auto& t : terms) check_term(*this, t);
    constraints.push_back({std::move(terms), rhs});
}

void ConicProgram::add_equality(int var, const ComplexMatrix& coeff, double rhs) {
    add_equality(std::vector<CoefficientTerm>{{var, coeff}}, rhs);
}

void ConicProgram::set_objective(std::vector<CoefficientTerm> terms, Sense s, double constant) {
    for (const auto& t : terms) check_term(*this, t);
    objective = std::move(terms);
    sense = s;
    objective_constant = constant;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Inaccurate: return "inaccurate";
        case SolveStatus::Failed: return "failed";
    }
    return "failed";
}

ComplexMatrix sym_entry_real(int dim, int i, int j) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    if (i == j) {
        e(i, i) = 1.0;
    } else {
        e(i, j) = 0.5;
        e(j, i) = 0.5;
    }
    return e;
}

ComplexMatrix sym_entry_imag(int dim, int i, int j) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    e(i, j) = std::complex<double>(0.0, 0.5);
    e(j, i) = std::complex<double>(0.0, -0.5);
    return e;
}

void add_matrix_equality(ConicProgram& prog, const std::vector<MatrixTerm>& terms,
                         const ComplexMatrix& rhs) {
    const int n = static_cast<int>(rhs.rows());
    if (rhs.cols() != n) throw std::invalid_argument("matrix equality rhs must be square");
    for (const auto& t : terms) {
        if (t.var < 0 || t.var >= static_cast<int>(prog.variables.size()))
            throw std::invalid_argument("matrix equality references undeclared variable");
        const int vd = prog.variables[static_cast<std::size_t>(t.var)].dim;
        if (t.shape.size() == 0) {
            if (vd != n) throw std::invalid_argument("matrix equality term dimension mismatch");
        } else {
            if (vd != 1 || t.shape.rows() != n || t.shape.cols() != n)
                throw std::invalid_argument("shaped matrix equality term requires a 1x1 variable");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int part = 0; part < (i == j ? 1 : 2); ++part) {
                const bool real_part = part == 0;
                std::vector<CoefficientTerm> row;
                double maxc = 0.0;
                for (const auto& t : terms) {
                    ComplexMatrix coeff;
                    if (t.shape.size() == 0) {
                        coeff = t.scale * (real_part ? sym_entry_real(n, i, j) : sym_entry_imag(n, i, j));
                    } else {
                        const double s = t.scale * (real_part ? t.shape(i, j).real() : t.shape(i, j).imag());
                        coeff = ComplexMatrix::Constant(1, 1, s);
                    }
                    maxc = std::max(maxc, coeff.cwiseAbs().maxCoeff());
                    row.push_back({t.var, std::move(coeff)});
                }
                const double rv = real_part ? rhs(i, j).real() : rhs(i, j).imag();
                if (maxc == 0.0 && rv == 0.0) continue;
                prog.add_equality(std::move(row), rv);
            }
}

SolveReport solve(const ConicProgram& prog, const SolveOptions& opts) {
    if (prog.variables.empty()) throw std::invalid_argument("program has no variables");

    detail::LoweredProblem low;
    const int nvars = static_cast<int>(prog.variables.size());
    low.dims.resize(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v)
        low.dims[static_cast<std::size_t>(v)] = lowered_dim(prog.variables[static_cast<std::size_t>(v)]);
    low.c.reserve(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v) {
        const int n = low.dims[static_cast<std::size_t>(v)];
        low.c.push_back(Eigen::MatrixXd::Zero(n, n));
    }
    const double sign = prog.sense == Sense::Maximize ? -1.0 : 1.0;
    for (const auto& t : prog.objective)
        low.c[static_cast<std::size_t>(t.var)] +=
            sign * lower_coeff(t.coeff, prog.variables[static_cast<std::size_t>(t.var)].kind);

    const int k = static_cast<int>(prog.constraints.size());
    low.b.resize(k);
    low.rows.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const auto& con = prog.constraints[static_cast<std::size_t>(i)];
        std::map<int, Eigen::MatrixXd> merged;
        for (const auto& t : con.terms) {
            Eigen::MatrixXd m = lower_coeff(t.coeff, prog.variables[static_cast<std::size_t>(t.var)].kind);
            auto it = merged.find(t.var);
            if (it == merged.end())
                merged.emplace(t.var, std::move(m));
            else
                it->second += m;
        }
        std::vector<std::pair<int, Eigen::MatrixXd>> row(merged.begin(), merged.end());
        low.rows.push_back(std::move(row));
        low.b(i) = con.rhs;
    }

    SolveReport rep;
    rep.detail = "";

    // Presolve: drop linearly dependent rows, flag inconsistent systems.
    detail::LoweredProblem reduced = low;
    if (k > 0) {
        int total = 0;
        std::vector<int> offset(static_cast<std::size_t>(nvars));
        for (int v = 0; v < nvars; ++v) {
            offset[static_cast<std::size_t>(v)] = total;
            total += svec_len(low.dims[static_cast<std::size_t>(v)]);
        }
        Eigen::MatrixXd at = Eigen::MatrixXd::Zero(total, k);
        for (int i = 0; i < k; ++i)
            for (const auto& [blk, coeff] : low.rows[static_cast<std::size_t>(i)])
                fill_svec(at.col(i).segment(offset[static_cast<std::size_t>(blk)],
                                            svec_len(low.dims[static_cast<std::size_t>(blk)])),
                          coeff);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at);
        qr.setThreshold(1e-9);
        const int rank = static_cast<int>(qr.rank());
        if (rank < k) {
            Eigen::MatrixXd aug(total + 1, k);
            aug.topRows(total) = at;
            aug.bottomRows(1) = low.b.transpose();
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(aug);
            qr2.setThreshold(1e-9);
            if (static_cast<int>(qr2.rank()) > rank) {
                rep.status = SolveStatus::Infeasible;
                rep.detail = "equality constraints are linearly inconsistent";
                return rep;
            }
            std::vector<int> kept(qr.colsPermutation().indices().data(),
                                  qr.colsPermutation().indices().data() + rank);
            std::sort(kept.begin(), kept.end());
            reduced.rows.clear();
            reduced.b.resize(rank);
            int at = 0;
            for (int idx : kept) {
                reduced.rows.push_back(low.rows[static_cast<std::size_t>(idx)]);
                reduced.b(at++) = low.b(idx);
            }
        }
    }

    detail::IpmOptions iopts;
    iopts.eps = std::max(opts.eps * 1e-2, 1e-12);
    iopts.max_iter = opts.max_iter;
    iopts.verbose = opts.verbose;
    detail::IpmResult ir = solve_ipm(reduced, iopts);

    rep.iterations = ir.iterations;
    rep.primal_residual = ir.pres;
    rep.dual_residual = ir.dres;
    rep.gap = ir.gap;

    switch (ir.status) {
        case detail::IpmStatus::Optimal: rep.status = SolveStatus::Optimal; break;
        case detail::IpmStatus::PrimalInfeasible: rep.status = SolveStatus::Infeasible; break;
        case detail::IpmStatus::DualInfeasible: rep.status = SolveStatus::Unbounded; break;
        case detail::IpmStatus::Inaccurate: rep.status = SolveStatus::Inaccurate; break;
        case detail::IpmStatus::Failed: rep.status = SolveStatus::Failed; break;
    }
    if (rep.status == SolveStatus::Inaccurate &&
        std::max({ir.pres, ir.dres, ir.gap}) <= opts.eps)
        rep.status = SolveStatus::Optimal;

    if (rep.status != SolveStatus::Optimal && rep.status != SolveStatus::Inaccurate) {
        if (rep.detail.empty()) rep.detail = "no primal solution: " + to_string(rep.status);
        return rep;
    }

    rep.primal.reserve(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v)
        rep.primal.push_back(
            recover_variable(ir.x[static_cast<std::size_t>(v)], prog.variables[static_cast<std::size_t>(v)]));
    rep.value = objective_on(prog, rep.primal);

    // Independent feasibility re-check on the original program.
    double eq_res = 0.0;
    for (const auto& con : prog.constraints) {
        double lhs = 0.0;
        for (const auto& t : con.terms)
            lhs += (t.coeff.adjoint() * rep.primal[static_cast<std::size_t>(t.var)]).trace().real();
        eq_res = std::max(eq_res, std::abs(lhs - con.rhs));
    }
    double floor = 0.0;
    for (const auto& x : rep.primal) floor = std::min(floor, min_eigenvalue(x));
    rep.eq_residual = eq_res;
    rep.psd_floor = floor;
    if (rep.status == SolveStatus::Optimal &&
        (eq_res > 10.0 * opts.eps || floor < -10.0 * opts.eps)) {
        rep.status = SolveStatus::Inaccurate;
        rep.detail = "post-solve re-check exceeded tolerance";
    }
    return rep;
}

std::string dump_program_json(const ConicProgram& prog) {
    nlohmann::json j;
    j["type"] = "conic_program";
    j["sense"] = prog.sense == Sense::Maximize ? "maximize" : "minimize";
    j["objective_constant"] = prog.objective_constant;
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : prog.variables)
        vars.push_back({{"name", v.name},
                        {"dim", v.dim},
                        {"kind", v.kind == VarKind::RealSymmetric ? "real_symmetric" : "hermitian"}});
    j["variables"] = std::move(vars);
    nlohmann::json obj = nlohmann::json::array();
    for (const auto& t : prog.objective)
        obj.push_back({{"var", t.var}, {"coeff", complex_matrix_to_json(t.coeff)}});
    j["objective"] = std::move(obj);
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : prog.constraints) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : c.terms)
            terms.push_back({{"var", t.var}, {"coeff", complex_matrix_to_json(t.coeff)}});
        cons.push_back({{"rhs", c.rhs}, {"terms", std::move(terms)}});
    }
    j["constraints"] = std::move(cons);
    return j.dump(2);
}

}  // namespace randcert::conic
