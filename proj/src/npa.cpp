#include "randcert/npa.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

namespace randcert::npa {

namespace {

using Ops = std::vector<std::pair<int, int>>;

// Collapse adjacent projectors of the same input; orthogonal outcomes kill
// the word.
bool reduce_ops(Ops& ops) {
    Ops out;
    for (const auto& op : ops) {
        if (!out.empty() && out.back().first == op.first) {
            if (out.back().second != op.second) return false;
        } else {
            out.push_back(op);
        }
    }
    ops = std::move(out);
    return true;
}

// Flattened form used as the symbol key; empty means the word vanished.
std::vector<int> encode(const Ops& alice, const Ops& bob) {
    std::vector<int> key;
    key.reserve(2 + 2 * (alice.size() + bob.size()));
    key.push_back(static_cast<int>(alice.size()));
    for (const auto& [x, a] : alice) {
        key.push_back(x);
        key.push_back(a);
    }
    key.push_back(static_cast<int>(bob.size()));
    for (const auto& [y, b] : bob) {
        key.push_back(y);
        key.push_back(b);
    }
    return key;
}

// Canonical symbol of u^+ v; nullopt when the product is zero. The moment
// matrix is real, so a word and its adjoint share one symbol.
std::optional<std::vector<int>> cell_symbol(const Word& u, const Word& v) {
    Ops alice(u.alice.rbegin(), u.alice.rend());
    alice.insert(alice.end(), v.alice.begin(), v.alice.end());
    Ops bob(u.bob.rbegin(), u.bob.rend());
    bob.insert(bob.end(), v.bob.begin(), v.bob.end());
    if (!reduce_ops(alice) || !reduce_ops(bob)) return std::nullopt;
    auto key = encode(alice, bob);
    Ops ralice(alice.rbegin(), alice.rend());
    Ops rbob(bob.rbegin(), bob.rend());
    auto rkey = encode(ralice, rbob);
    return std::min(key, rkey);
}

// Moment-matrix skeleton shared by every block: representative cell per
// symbol, duplicate cells chained to it, vanished cells pinned to zero.
struct Skeleton {
    int n = 0;
    std::map<std::vector<int>, std::pair<int, int>> rep;
    std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> duplicate;
    std::vector<std::pair<int, int>> zero;
};

Skeleton build_skeleton(const MomentRelaxation& rel) {
    Skeleton sk;
    sk.n = rel.size();
    for (int i = 0; i < sk.n; ++i)
        for (int j = i; j < sk.n; ++j) {
            auto sym = cell_symbol(rel.basis[static_cast<std::size_t>(i)],
                                   rel.basis[static_cast<std::size_t>(j)]);
            if (!sym) {
                sk.zero.push_back({i, j});
                continue;
            }
            auto [it, fresh] = sk.rep.try_emplace(*sym, std::pair<int, int>{i, j});
            if (!fresh) sk.duplicate.push_back({{i, j}, it->second});
        }
    return sk;
}

// One addend of a probability in moment coordinates: a representative cell
// and its weight.
using CellTerms = std::vector<std::pair<std::pair<int, int>, double>>;

// Single-party operator content of outcome a at input x after eliminating
// the last outcome: either the projector itself, or identity minus the kept
// ones.
std::vector<std::pair<std::optional<std::pair<int, int>>, double>> outcome_ops(int a, int x,
                                                                               int d) {
    std::vector<std::pair<std::optional<std::pair<int, int>>, double>> parts;
    if (a < d - 1) {
        parts.push_back({std::pair<int, int>{x, a}, 1.0});
    } else {
        parts.push_back({std::nullopt, 1.0});
        for (int aa = 0; aa < d - 1; ++aa) parts.push_back({std::pair<int, int>{x, aa}, -1.0});
    }
    return parts;
}

CellTerms expand_probability(const Skeleton& sk, int a, int b, int x, int y, int d_a, int d_b) {
    CellTerms terms;
    for (const auto& [aop, ca] : outcome_ops(a, x, d_a))
        for (const auto& [bop, cb] : outcome_ops(b, y, d_b)) {
            Word w;
            if (aop) w.alice.push_back(*aop);
            if (bop) w.bob.push_back(*bop);
            auto sym = cell_symbol(Word{}, w);
            if (!sym) throw std::logic_error("expand_probability: vanished word");
            terms.push_back({sk.rep.at(*sym), ca * cb});
        }
    return terms;
}

// Structural rows for one block: duplicated cells equal, vanished cells zero.
void add_block_structure(conic::ConicProgram& prog, int var, const Skeleton& sk) {
    for (const auto& [cell, rep] : sk.duplicate) {
        std::vector<conic::CoefficientTerm> t;
        t.push_back({var, conic::sym_entry_real(sk.n, cell.first, cell.second)});
        t.push_back({var, -conic::sym_entry_real(sk.n, rep.first, rep.second)});
        prog.add_equality(std::move(t), 0.0);
    }
    for (const auto& cell : sk.zero)
        prog.add_equality(var, conic::sym_entry_real(sk.n, cell.first, cell.second), 0.0);
}

void check_relaxation(const MomentRelaxation& rel) {
    if (rel.m_a < 1 || rel.m_b < 1 || rel.d_a < 2 || rel.d_b < 2 || rel.basis.empty())
        throw std::invalid_argument("npa: relaxation not built");
}

GuessingBound solve_guessing(const Behavior& b, const MomentRelaxation& rel,
                             const std::vector<std::vector<int>>& guesses,
                             const std::vector<CellTerms>& win_terms,
                             const conic::SolveOptions& opts, double floor) {
    const Skeleton sk = build_skeleton(rel);
    conic::ConicProgram prog;
    std::vector<int> var;
    for (std::size_t g = 0; g < guesses.size(); ++g) {
        var.push_back(prog.add_variable(sk.n, conic::VarKind::RealSymmetric));
        add_block_structure(prog, var.back(), sk);
    }

    // Induced behaviors sum to the observed one entry by entry.
    for (int x = 1; x <= b.m_a; ++x)
        for (int y = 1; y <= b.m_b; ++y)
            for (int a = 0; a < b.d_a; ++a)
                for (int bo = 0; bo < b.d_b; ++bo) {
                    const auto cells = expand_probability(sk, a, bo, x, y, b.d_a, b.d_b);
                    std::vector<conic::CoefficientTerm> t;
                    for (std::size_t g = 0; g < guesses.size(); ++g)
                        for (const auto& [cell, coef] : cells)
                            t.push_back({var[g], coef * conic::sym_entry_real(
                                                            sk.n, cell.first, cell.second)});
                    prog.add_equality(std::move(t), b.p(a, bo, x, y));
                }

    std::vector<conic::CoefficientTerm> obj;
    for (std::size_t g = 0; g < guesses.size(); ++g)
        for (const auto& [cell, coef] : win_terms[g])
            obj.push_back({var[g], coef * conic::sym_entry_real(sk.n, cell.first, cell.second)});
    prog.set_objective(std::move(obj), conic::Sense::Maximize);

    auto report = conic::solve(prog, opts);
    if (report.status == conic::SolveStatus::Infeasible)
        throw DataInfeasibleError("p_guess_nl: behavior admits no decomposition at this level");

    GuessingBound res;
    res.level = rel.level;
    res.status = report.status;
    res.eq_residual = report.eq_residual;
    if (report.status == conic::SolveStatus::Optimal ||
        report.status == conic::SolveStatus::Inaccurate) {
        res.p_guess = std::clamp(report.value, floor, 1.0);
        res.h_min = randomness::min_entropy(res.p_guess);
        res.guesses = guesses;
        for (std::size_t g = 0; g < guesses.size(); ++g)
            res.block_weights.push_back(report.primal[static_cast<std::size_t>(var[g])](0, 0).real());
    }
    return res;
}

void check_behavior(const Behavior& b, const MomentRelaxation& rel) {
    check_relaxation(rel);
    if (b.m_a != rel.m_a || b.m_b != rel.m_b || b.d_a != rel.d_a || b.d_b != rel.d_b)
        throw std::invalid_argument("p_guess_nl: behavior shape does not match relaxation");
    if (!validate_behavior(b, 1e-7).ok || !is_no_signaling(b, 1e-7))
        throw std::invalid_argument("p_guess_nl: behavior invalid or signaling");
}

}  // namespace

std::string to_string(Level level) { return level == Level::One ? "1" : "1+AB"; }

MomentRelaxation build_relaxation(Level level, int m_a, int m_b, int d_a, int d_b) {
    if (m_a < 1 || m_b < 1 || d_a < 2 || d_b < 2)
        throw std::invalid_argument("build_relaxation: bad scenario shape");
    MomentRelaxation rel;
    rel.level = level;
    rel.m_a = m_a;
    rel.m_b = m_b;
    rel.d_a = d_a;
    rel.d_b = d_b;
    rel.basis.push_back({});
    for (int x = 1; x <= m_a; ++x)
        for (int a = 0; a < d_a - 1; ++a) rel.basis.push_back({{{x, a}}, {}});
    for (int y = 1; y <= m_b; ++y)
        for (int b = 0; b < d_b - 1; ++b) rel.basis.push_back({{}, {{y, b}}});
    if (level == Level::OnePlusAB)
        for (int x = 1; x <= m_a; ++x)
            for (int a = 0; a < d_a - 1; ++a)
                for (int y = 1; y <= m_b; ++y)
                    for (int b = 0; b < d_b - 1; ++b) rel.basis.push_back({{{x, a}}, {{y, b}}});
    return rel;
}

GuessingBound p_guess_nl(const Behavior& b, int x_star, int y_star,
                         const MomentRelaxation& rel, const conic::SolveOptions& opts) {
    check_behavior(b, rel);
    if (x_star < 1 || x_star > b.m_a || y_star < 1 || y_star > b.m_b)
        throw std::invalid_argument("p_guess_nl: guessed inputs out of range");
    const Skeleton sk = build_skeleton(rel);
    std::vector<std::vector<int>> guesses;
    std::vector<CellTerms> win;
    for (int e = 0; e < b.d_a; ++e)
        for (int ep = 0; ep < b.d_b; ++ep) {
            guesses.push_back({e, ep});
            win.push_back(expand_probability(sk, e, ep, x_star, y_star, b.d_a, b.d_b));
        }
    return solve_guessing(b, rel, guesses, win, opts, 1.0 / (b.d_a * b.d_b));
}

GuessingBound p_guess_nl_marginal(const Behavior& b, int x_star,
                                  const MomentRelaxation& rel,
                                  const conic::SolveOptions& opts) {
    check_behavior(b, rel);
    if (x_star < 1 || x_star > b.m_a)
        throw std::invalid_argument("p_guess_nl_marginal: x_star out of range");
    const Skeleton sk = build_skeleton(rel);
    std::vector<std::vector<int>> guesses;
    std::vector<CellTerms> win;
    for (int e = 0; e < b.d_a; ++e) {
        guesses.push_back({e});
        // Alice's marginal: sum her projector content against the identity.
        CellTerms terms;
        for (const auto& [aop, ca] : outcome_ops(e, x_star, b.d_a)) {
            Word w;
            if (aop) w.alice.push_back(*aop);
            auto sym = cell_symbol(Word{}, w);
            terms.push_back({sk.rep.at(*sym), ca});
        }
        win.push_back(std::move(terms));
    }
    return solve_guessing(b, rel, guesses, win, opts, 1.0 / b.d_a);
}

double bell_value_bound(const chain::BellFunctional& f, const MomentRelaxation& rel,
                        const conic::SolveOptions& opts) {
    check_relaxation(rel);
    if (f.m_a != rel.m_a || f.m_b != rel.m_b || f.d_a != rel.d_a || f.d_b != rel.d_b)
        throw std::invalid_argument("bell_value_bound: functional shape does not match relaxation");
    const Skeleton sk = build_skeleton(rel);
    conic::ConicProgram prog;
    const int var = prog.add_variable(sk.n, conic::VarKind::RealSymmetric);
    add_block_structure(prog, var, sk);
    prog.add_equality(var, conic::sym_entry_real(sk.n, 0, 0), 1.0);

    std::vector<conic::CoefficientTerm> obj;
    for (int x = 1; x <= f.m_a; ++x)
        for (int y = 1; y <= f.m_b; ++y)
            for (int a = 0; a < f.d_a; ++a)
                for (int b = 0; b < f.d_b; ++b) {
                    const double c = f.c(a, b, x, y);
                    if (c == 0.0) continue;
                    for (const auto& [cell, coef] :
                         expand_probability(sk, a, b, x, y, f.d_a, f.d_b))
                        obj.push_back({var, c * coef *
                                                conic::sym_entry_real(sk.n, cell.first,
                                                                      cell.second)});
                }
    prog.set_objective(std::move(obj), conic::Sense::Maximize);
    auto report = conic::solve(prog, opts);
    if (report.status != conic::SolveStatus::Optimal &&
        report.status != conic::SolveStatus::Inaccurate)
        throw std::runtime_error("bell_value_bound: solver failed: " +
                                 conic::to_string(report.status));
    return report.value;
}

}  // namespace randcert::npa
