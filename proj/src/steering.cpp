#include "randcert/steering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randcert::steering {

namespace {

void check_assemblage(const Assemblage& a, const char* who) {
    auto v = validate_assemblage(a, 1e-7);
    if (!v.ok) throw std::invalid_argument(std::string(who) + ": invalid assemblage");
}

bool solved(conic::SolveStatus s) {
    return s == conic::SolveStatus::Optimal || s == conic::SolveStatus::Inaccurate;
}

}  // namespace

SteeringWeightResult steering_weight(const Assemblage& a, const conic::SolveOptions& opts,
                                     std::uint64_t cap) {
    check_assemblage(a, "steering_weight");
    const int m = a.m, d = a.d, nb = a.dim_b;
    auto strategies = enumerate_strategies(m, d, cap);
    ComplexMatrix eye = ComplexMatrix::Identity(nb, nb);

    conic::ConicProgram prog;
    std::vector<int> lam_var;
    for (size_t i = 0; i < strategies.size(); ++i)
        lam_var.push_back(prog.add_variable(nb, conic::VarKind::HermitianComplex, "sig"));
    std::vector<int> slack_var(static_cast<size_t>(m * d));
    for (int x = 1; x <= m; ++x)
        for (int aa = 0; aa < d; ++aa)
            slack_var[static_cast<size_t>((x - 1) * d + aa)] =
                prog.add_variable(nb, conic::VarKind::HermitianComplex, "gam");

    // sum_{mu(x)=a} sigma_mu + p*gamma_{a|x} = sigma_obs_{a|x}.
    for (int x = 1; x <= m; ++x)
        for (int aa = 0; aa < d; ++aa) {
            std::vector<conic::MatrixTerm> terms;
            for (size_t li = 0; li < strategies.size(); ++li)
                if (strategies[li](x) == aa) terms.push_back({lam_var[li], 1.0, {}});
            terms.push_back({slack_var[static_cast<size_t>((x - 1) * d + aa)], 1.0, {}});
            add_matrix_equality(prog, terms, a.sigma(aa, x));
        }
    std::vector<conic::CoefficientTerm> obj;
    for (int v : lam_var) obj.push_back({v, eye});
    prog.set_objective(obj, conic::Sense::Maximize);

    auto sol = conic::solve(prog, opts);
    SteeringWeightResult r;
    r.status = sol.status;
    r.steerable_part = make_assemblage(m, d, nb);
    if (!solved(sol.status)) return r;

    r.weight = std::clamp(1.0 - sol.value, 0.0, 1.0);
    r.reconstruction_residual = sol.eq_residual;
    for (size_t li = 0; li < strategies.size(); ++li) {
        r.lhs_part.strategies.push_back(strategies[li]);
        ComplexMatrix st = sol.primal[static_cast<size_t>(lam_var[li])];
        if (1.0 - r.weight >= 1e-9) st /= 1.0 - r.weight;
        r.lhs_part.states.push_back(st);
    }
    if (r.weight >= 1e-9)
        for (int x = 1; x <= m; ++x)
            for (int aa = 0; aa < d; ++aa)
                r.steerable_part.sigma(aa, x) =
                    sol.primal[static_cast<size_t>(slack_var[static_cast<size_t>((x - 1) * d + aa)])] /
                    r.weight;
    return r;
}

LhsReport lhs_feasibility(const Assemblage& a, const conic::SolveOptions& opts, std::uint64_t cap) {
    auto sw = steering_weight(a, opts, cap);
    LhsReport rep;
    rep.status = sw.status;
    if (!solved(sw.status)) return rep;
    rep.unsteerable = sw.weight <= 1e-6;
    rep.ensemble = sw.lhs_part;
    // Residual of the pure LHS explanation against the input.
    double resid = 0.0;
    for (int x = 1; x <= a.m; ++x)
        for (int aa = 0; aa < a.d; ++aa) {
            ComplexMatrix acc = ComplexMatrix::Zero(a.dim_b, a.dim_b);
            for (size_t li = 0; li < rep.ensemble.strategies.size(); ++li)
                if (rep.ensemble.strategies[li](x) == aa) acc += rep.ensemble.states[li];
            resid = std::max(resid, (acc - a.sigma(aa, x)).cwiseAbs().maxCoeff());
        }
    rep.reconstruction_residual = resid;
    return rep;
}

PartialSteeringWeightResult partial_steering_weight(const Assemblage& a, int x_star,
                                                    const conic::SolveOptions& opts) {
    check_assemblage(a, "partial_steering_weight");
    if (x_star < 1 || x_star > a.m)
        throw std::invalid_argument("partial_steering_weight: x_star out of range");
    const int m = a.m, d = a.d, nb = a.dim_b;

    PartialSteeringWeightResult r;
    r.steerable_part = make_assemblage(m, d, nb);
    if (m == 1) {
        // Single input: trivially explained by its own hidden states.
        r.status = conic::SolveStatus::Optimal;
        HiddenStateEnsemble ens;
        for (int aa = 0; aa < d; ++aa) {
            ens.strategies.push_back(DeterministicStrategy{{aa, aa}});
            ens.states.push_back(a.sigma(aa, 1));
        }
        r.edge_ensembles.push_back(ens);
        return r;
    }

    std::vector<int> others;
    for (int x = 1; x <= m; ++x)
        if (x != x_star) others.push_back(x);
    auto pairs = enumerate_strategies(2, d);  // mu = (outcome at x*, outcome at x_i)
    ComplexMatrix eye = ComplexMatrix::Identity(nb, nb);

    conic::ConicProgram prog;
    std::vector<std::vector<int>> edge_var(others.size());
    for (size_t i = 0; i < others.size(); ++i)
        for (size_t li = 0; li < pairs.size(); ++li)
            edge_var[i].push_back(prog.add_variable(nb, conic::VarKind::HermitianComplex, "tau"));
    std::vector<int> star_slack(static_cast<size_t>(d));
    for (int aa = 0; aa < d; ++aa)
        star_slack[static_cast<size_t>(aa)] =
            prog.add_variable(nb, conic::VarKind::HermitianComplex, "gstar");
    std::vector<std::vector<int>> edge_slack(others.size(), std::vector<int>(static_cast<size_t>(d)));
    for (size_t i = 0; i < others.size(); ++i)
        for (int aa = 0; aa < d; ++aa)
            edge_slack[i][static_cast<size_t>(aa)] =
                prog.add_variable(nb, conic::VarKind::HermitianComplex, "gedge");

    for (size_t i = 0; i < others.size(); ++i)
        for (int aa = 0; aa < d; ++aa) {
            std::vector<conic::MatrixTerm> at_edge, at_star;
            for (size_t li = 0; li < pairs.size(); ++li) {
                if (pairs[li](2) == aa) at_edge.push_back({edge_var[i][li], 1.0, {}});
                if (pairs[li](1) == aa) at_star.push_back({edge_var[i][li], 1.0, {}});
            }
            at_edge.push_back({edge_slack[i][static_cast<size_t>(aa)], 1.0, {}});
            at_star.push_back({star_slack[static_cast<size_t>(aa)], 1.0, {}});
            add_matrix_equality(prog, at_edge, a.sigma(aa, others[i]));
            add_matrix_equality(prog, at_star, a.sigma(aa, x_star));
        }
    // All edges carry the same hidden-state mass; maximize it on the first.
    std::vector<conic::CoefficientTerm> obj;
    for (int v : edge_var[0]) obj.push_back({v, eye});
    prog.set_objective(obj, conic::Sense::Maximize);

    auto sol = conic::solve(prog, opts);
    r.status = sol.status;
    if (!solved(sol.status)) return r;
    r.weight = std::clamp(1.0 - sol.value, 0.0, 1.0);
    r.reconstruction_residual = sol.eq_residual;
    for (size_t i = 0; i < others.size(); ++i) {
        HiddenStateEnsemble ens;
        for (size_t li = 0; li < pairs.size(); ++li) {
            ens.strategies.push_back(pairs[li]);
            ComplexMatrix st = sol.primal[static_cast<size_t>(edge_var[i][li])];
            if (1.0 - r.weight >= 1e-9) st /= 1.0 - r.weight;
            ens.states.push_back(st);
        }
        r.edge_ensembles.push_back(std::move(ens));
    }
    if (r.weight >= 1e-9) {
        for (int aa = 0; aa < d; ++aa)
            r.steerable_part.sigma(aa, x_star) =
                sol.primal[static_cast<size_t>(star_slack[static_cast<size_t>(aa)])] / r.weight;
        for (size_t i = 0; i < others.size(); ++i)
            for (int aa = 0; aa < d; ++aa)
                r.steerable_part.sigma(aa, others[i]) =
                    sol.primal[static_cast<size_t>(edge_slack[i][static_cast<size_t>(aa)])] / r.weight;
    }
    return r;
}

double guess_bound(double weight, const Assemblage& steerable_part, int x_star) {
    if (x_star < 1 || x_star > steerable_part.m)
        throw std::invalid_argument("guess_bound: x_star out of range");
    double best = 0.0;
    for (int aa = 0; aa < steerable_part.d; ++aa)
        best = std::max(best, steerable_part.sigma(aa, x_star).real().trace());
    return weight * best + 1.0 - weight;
}

double guess_bound(const SteeringWeightResult& r, int x_star) {
    return guess_bound(r.weight, r.steerable_part, x_star);
}

double guess_bound(const PartialSteeringWeightResult& r, int x_star) {
    return guess_bound(r.weight, r.steerable_part, x_star);
}

Assemblage construct_partially_unsteerable(const std::vector<HiddenStateEnsemble>& edge_ensembles,
                                           int x_star, double tol) {
    if (edge_ensembles.empty())
        throw std::invalid_argument("construct_partially_unsteerable: no edges");
    const int m = static_cast<int>(edge_ensembles.size()) + 1;
    if (x_star < 1 || x_star > m)
        throw std::invalid_argument("construct_partially_unsteerable: x_star out of range");

    int d = 0, nb = 0;
    for (const auto& ens : edge_ensembles) {
        if (ens.strategies.size() != ens.states.size() || ens.states.empty())
            throw std::invalid_argument("construct_partially_unsteerable: malformed ensemble");
        for (const auto& mu : ens.strategies)
            if (mu.inputs() != 2)
                throw std::invalid_argument("construct_partially_unsteerable: strategies must cover the pair (x*, x_i)");
        for (const auto& st : ens.states) {
            if (nb == 0) nb = static_cast<int>(st.rows());
            if (st.rows() != nb || st.cols() != nb)
                throw std::invalid_argument("construct_partially_unsteerable: mixed state dimensions");
            if (!is_psd(st, tol))
                throw std::invalid_argument("construct_partially_unsteerable: hidden states must be PSD");
        }
        int dmax = 0;
        for (const auto& mu : ens.strategies) dmax = std::max({dmax, mu(1) + 1, mu(2) + 1});
        d = std::max(d, dmax);
    }

    // Coarse grainings at x* must agree across edges.
    std::vector<ComplexMatrix> star(static_cast<size_t>(d), ComplexMatrix::Zero(nb, nb));
    for (size_t i = 0; i < edge_ensembles.size(); ++i) {
        std::vector<ComplexMatrix> acc(static_cast<size_t>(d), ComplexMatrix::Zero(nb, nb));
        const auto& ens = edge_ensembles[i];
        for (size_t li = 0; li < ens.strategies.size(); ++li)
            acc[static_cast<size_t>(ens.strategies[li](1))] += ens.states[li];
        if (i == 0)
            star = acc;
        else
            for (int aa = 0; aa < d; ++aa)
                if ((acc[static_cast<size_t>(aa)] - star[static_cast<size_t>(aa)]).cwiseAbs().maxCoeff() >
                    tol)
                    throw std::invalid_argument(
                        "construct_partially_unsteerable: edges disagree at x_star");
    }

    Assemblage out = make_assemblage(m, d, nb);
    for (int aa = 0; aa < d; ++aa) out.sigma(aa, x_star) = star[static_cast<size_t>(aa)];
    std::vector<int> others;
    for (int x = 1; x <= m; ++x)
        if (x != x_star) others.push_back(x);
    for (size_t i = 0; i < others.size(); ++i) {
        const auto& ens = edge_ensembles[i];
        for (size_t li = 0; li < ens.strategies.size(); ++li)
            out.sigma(ens.strategies[li](2), others[i]) += ens.states[li];
    }
    auto v = validate_assemblage(out, std::max(tol, 1e-9));
    if (!v.ok)
        throw std::invalid_argument("construct_partially_unsteerable: result is not a valid assemblage");
    return out;
}

TwoSettingScreen two_setting_screen(const DensityMatrix& rho, const MeasurementSet& meas,
                                    const conic::SolveOptions& opts, double threshold) {
    if (meas.inputs() < 2)
        throw std::invalid_argument("two_setting_screen: need at least two measurements");
    TwoSettingScreen sc;
    for (int x1 = 1; x1 <= meas.inputs(); ++x1)
        for (int x2 = x1 + 1; x2 <= meas.inputs(); ++x2) {
            MeasurementSet pair;
            pair.povms = {meas.povm(x1), meas.povm(x2)};
            auto asm2 = assemblage_from_state(rho, pair);
            auto sw = steering_weight(asm2, opts);
            if (sw.weight > sc.weight) {
                sc.weight = sw.weight;
                sc.pair_x1 = x1;
                sc.pair_x2 = x2;
            }
            if (sw.weight > threshold) {
                sc.steerable = true;
                return sc;
            }
        }
    return sc;
}

}  // namespace randcert::steering
