#include "randcert/compat.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace randcert::compat {

namespace {

void check_povm_family(const std::vector<Povm>& povms) {
    if (povms.empty()) throw std::invalid_argument("joint_measurability: empty POVM list");
    int dim = povms.front().dim();
    int d = povms.front().outcomes();
    for (const auto& p : povms) {
        auto v = validate_povm(p);
        if (!v.ok) throw std::invalid_argument("joint_measurability: invalid POVM in input");
        if (p.dim() != dim) throw std::invalid_argument("joint_measurability: mixed dimensions");
        if (p.outcomes() != d) throw std::invalid_argument("joint_measurability: mixed outcome counts");
    }
}

}  // namespace

JointMeasurabilityReport joint_measurability(const std::vector<Povm>& povms,
                                             const conic::SolveOptions& opts, std::uint64_t cap) {
    check_povm_family(povms);
    const int s = static_cast<int>(povms.size());
    const int d = povms.front().outcomes();
    const int n = povms.front().dim();

    JointMeasurabilityReport rep;
    if (s == 1) {
        rep.compatible = true;
        rep.eta = 1.0;
        rep.status = conic::SolveStatus::Optimal;
        rep.parent.povm = povms.front();
        for (int a = 0; a < d; ++a)
            rep.parent.assignments.push_back(DeterministicStrategy{{a}});
        return rep;
    }

    auto lambdas = enumerate_strategies(s, d, cap);
    ComplexMatrix eye_n = ComplexMatrix::Identity(n, n);
    ComplexMatrix eye_1 = ComplexMatrix::Identity(1, 1);

    conic::ConicProgram prog;
    std::vector<int> g_var;
    for (const auto& lam : lambdas) {
        std::string name = "G";
        for (int x = 1; x <= s; ++x) name += std::to_string(lam(x));
        g_var.push_back(prog.add_variable(n, conic::VarKind::HermitianComplex, name));
    }
    int eta = prog.add_variable(1, conic::VarKind::RealSymmetric, "eta");
    int slack = prog.add_variable(1, conic::VarKind::RealSymmetric, "slack");

    // sum_{lam(x)=a} G_lam - eta (M - tr(M) I/n) = tr(M) I/n per effect.
    for (int x = 1; x <= s; ++x)
        for (int a = 0; a < d; ++a) {
            const ComplexMatrix& effect = povms[static_cast<size_t>(x - 1)].effects[static_cast<size_t>(a)];
            double t = effect.real().trace();
            std::vector<conic::MatrixTerm> terms;
            for (size_t li = 0; li < lambdas.size(); ++li)
                if (lambdas[li](x) == a) terms.push_back({g_var[li], 1.0, {}});
            terms.push_back({eta, -1.0, effect - (t / n) * eye_n});
            add_matrix_equality(prog, terms, (t / n) * eye_n);
        }
    prog.add_equality({{eta, eye_1}, {slack, eye_1}}, 1.0);
    prog.set_objective({{eta, eye_1}}, conic::Sense::Maximize);

    auto sol = conic::solve(prog, opts);
    rep.status = sol.status;
    if (sol.status != conic::SolveStatus::Optimal && sol.status != conic::SolveStatus::Inaccurate)
        return rep;
    rep.eta = sol.value;
    rep.compatible = rep.eta >= 1.0 - 1e-7;

    for (size_t li = 0; li < lambdas.size(); ++li) {
        rep.parent.povm.effects.push_back(sol.primal[static_cast<size_t>(g_var[li])]);
        rep.parent.assignments.push_back(lambdas[li]);
    }
    double resid = 0.0;
    for (int x = 1; x <= s; ++x)
        for (int a = 0; a < d; ++a) {
            ComplexMatrix acc = ComplexMatrix::Zero(n, n);
            for (size_t li = 0; li < lambdas.size(); ++li)
                if (lambdas[li](x) == a) acc += rep.parent.povm.effects[li];
            acc -= povms[static_cast<size_t>(x - 1)].effects[static_cast<size_t>(a)];
            resid = std::max(resid, acc.cwiseAbs().maxCoeff());
        }
    rep.reproduction_residual = resid;
    return rep;
}

JointMeasurabilityReport joint_measurability(const MeasurementSet& meas,
                                             const std::vector<int>& subset,
                                             const conic::SolveOptions& opts, std::uint64_t cap) {
    std::vector<Povm> povms;
    for (int x : subset) povms.push_back(meas.povm(x));
    return joint_measurability(povms, opts, cap);
}

bool CompatHypergraph::is_compatible(const std::vector<int>& subset) const {
    std::set<int> want(subset.begin(), subset.end());
    for (int v : want)
        if (v < 1 || v > vertices) throw std::invalid_argument("is_compatible: vertex out of range");
    if (want.size() <= 1) return true;
    for (const auto& edge : hyperedges)
        if (std::includes(edge.begin(), edge.end(), want.begin(), want.end())) return true;
    return false;
}

CompatHypergraph compatibility_structure(const MeasurementSet& meas,
                                         const conic::SolveOptions& opts, int max_inputs) {
    const int m = meas.inputs();
    if (m > max_inputs) throw std::length_error("compatibility_structure: input count exceeds cap");
    CompatHypergraph h;
    h.vertices = m;
    if (m < 2) return h;

    std::vector<std::vector<int>> compatible;
    auto covered = [&](const std::vector<int>& s) {
        for (const auto& c : compatible)
            if (std::includes(c.begin(), c.end(), s.begin(), s.end())) return true;
        return false;
    };
    // Size-descending scan; anything inside a known compatible set is skipped.
    for (int size = m; size >= 2; --size) {
        std::vector<int> pick(static_cast<size_t>(size));
        for (int i = 0; i < size; ++i) pick[static_cast<size_t>(i)] = i + 1;
        while (true) {
            if (!covered(pick)) {
                auto rep = joint_measurability(meas, pick, opts);
                if (rep.status != conic::SolveStatus::Optimal &&
                    rep.status != conic::SolveStatus::Inaccurate)
                    throw std::runtime_error("compatibility_structure: solver failed on a subset");
                if (rep.compatible) compatible.push_back(pick);
            }
            int i = size - 1;
            while (i >= 0 && pick[static_cast<size_t>(i)] == m - size + i + 1) --i;
            if (i < 0) break;
            ++pick[static_cast<size_t>(i)];
            for (int j = i + 1; j < size; ++j)
                pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
        }
    }
    // Keep maximal sets only.
    for (const auto& c : compatible) {
        bool maximal = true;
        for (const auto& other : compatible)
            if (&other != &c && other.size() > c.size() &&
                std::includes(other.begin(), other.end(), c.begin(), c.end())) {
                maximal = false;
                break;
            }
        if (maximal) h.hyperedges.push_back(c);
    }
    std::sort(h.hyperedges.begin(), h.hyperedges.end());
    return h;
}

bool contains_star(const CompatHypergraph& h, int x_star) {
    if (x_star < 1 || x_star > h.vertices) throw std::invalid_argument("contains_star: vertex out of range");
    for (int x = 1; x <= h.vertices; ++x)
        if (x != x_star && !h.is_compatible({x_star, x})) return false;
    return true;
}

bool contains_block_star(const CompatHypergraph& h, const std::vector<int>& block) {
    if (block.empty()) throw std::invalid_argument("contains_block_star: empty block");
    std::set<int> in(block.begin(), block.end());
    for (int v : in)
        if (v < 1 || v > h.vertices) throw std::invalid_argument("contains_block_star: vertex out of range");
    bool extended = false;
    for (int x = 1; x <= h.vertices; ++x) {
        if (in.count(x)) continue;
        extended = true;
        std::vector<int> probe(in.begin(), in.end());
        probe.push_back(x);
        if (!h.is_compatible(probe)) return false;
    }
    if (!extended) return h.is_compatible(std::vector<int>(in.begin(), in.end()));
    return true;
}

nlohmann::json hypergraph_to_json(const CompatHypergraph& h) {
    nlohmann::json j;
    j["type"] = "hypergraph";
    j["vertices"] = h.vertices;
    j["hyperedges"] = h.hyperedges;
    return j;
}

CompatHypergraph hypergraph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("type", "") != std::string("hypergraph"))
        throw std::invalid_argument("hypergraph_from_json: wrong type tag");
    CompatHypergraph h;
    h.vertices = j.at("vertices").get<int>();
    if (h.vertices < 1) throw std::invalid_argument("hypergraph_from_json: vertices must be positive");
    for (const auto& edge : j.at("hyperedges")) {
        std::vector<int> e = edge.get<std::vector<int>>();
        std::sort(e.begin(), e.end());
        for (int v : e)
            if (v < 1 || v > h.vertices)
                throw std::invalid_argument("hypergraph_from_json: vertex out of range");
        h.hyperedges.push_back(std::move(e));
    }
    return h;
}

}  // namespace randcert::compat
