#include "randcert/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace randcert::chain {

namespace {

int mod(int v, int d) {
    int r = v % d;
    return r < 0 ? r + d : r;
}

// Simultaneous cyclic input relabeling by s on both parties.
int shift_input(int i, int s, int m) { return (i - 1 + s) % m + 1; }

void check_square_scenario(const Behavior& b, const char* who) {
    if (b.m_a != b.m_b || b.d_a != b.d_b)
        throw std::invalid_argument(std::string(who) + ": behavior must have equal inputs and outcomes per party");
    if (b.m_a < 2 || b.d_a < 2)
        throw std::invalid_argument(std::string(who) + ": need m >= 2 and d >= 2");
}

}  // namespace

ChainInequality make_chain_inequality(int d, int m, Eigen::VectorXd alpha) {
    if (d < 2) throw std::invalid_argument("make_chain_inequality: d must be >= 2");
    if (m < 2) throw std::invalid_argument("make_chain_inequality: m must be >= 2");
    if (alpha.size() != d) throw std::invalid_argument("make_chain_inequality: alpha must have d entries");
    if (!alpha.allFinite()) throw std::invalid_argument("make_chain_inequality: alpha must be finite");
    return ChainInequality{d, m, std::move(alpha)};
}

ChainOffsetVector zero_offsets(int d, int m) {
    if (d < 2 || m < 2) throw std::invalid_argument("zero_offsets: need d >= 2 and m >= 2");
    return ChainOffsetVector{d, std::vector<int>(static_cast<size_t>(2 * m), 0)};
}

namespace {
void check_offset_entries(int d, const std::vector<int>& q, const char* who) {
    if (d < 2) throw std::invalid_argument(std::string(who) + ": d must be >= 2");
    for (int v : q)
        if (v < 0 || v >= d) throw std::invalid_argument(std::string(who) + ": offsets must lie in [0, d)");
}
}  // namespace

ChainOffsetVector constrained_offsets(int d, std::vector<int> q) {
    check_offset_entries(d, q, "constrained_offsets");
    if (q.size() < 4 || q.size() % 2 != 0)
        throw std::invalid_argument("constrained_offsets: need 2m entries with m >= 2");
    int sum = 0;
    for (int v : q) sum += v;
    if (mod(sum + 1, d) != 0)
        throw std::invalid_argument("constrained_offsets: offsets must sum to -1 mod d");
    return ChainOffsetVector{d, std::move(q)};
}

ChainOffsetVector free_completed_offsets(int d, std::vector<int> q_prefix) {
    check_offset_entries(d, q_prefix, "free_completed_offsets");
    if (q_prefix.size() < 3 || q_prefix.size() % 2 != 1)
        throw std::invalid_argument("free_completed_offsets: need 2m-1 entries with m >= 2");
    int sum = 0;
    for (int v : q_prefix) sum += v;
    q_prefix.push_back(mod(-sum - 1, d));
    return ChainOffsetVector{d, std::move(q_prefix)};
}

double chain_value(const Behavior& b, const ChainInequality& ineq) {
    check_square_scenario(b, "chain_value");
    if (b.m_a != ineq.m || b.d_a != ineq.d)
        throw std::invalid_argument("chain_value: behavior scenario does not match inequality");
    const int d = ineq.d, m = ineq.m;
    double value = 0.0;
    for (int i = 1; i <= m; ++i) {
        for (int k = 0; k < d; ++k) {
            double prob = 0.0;  // p(A_i - B_i = k)
            for (int j = 0; j < d; ++j) prob += b.p(mod(j + k, d), j, i, i);
            value += ineq.alpha(k) * prob;
        }
        for (int k = 0; k < d; ++k) {
            double prob = 0.0;  // p(B_i - A_{i+1} = k), with A_{m+1} = A_1 + 1
            if (i < m)
                for (int a = 0; a < d; ++a) prob += b.p(a, mod(a + k, d), i + 1, i);
            else
                for (int a = 0; a < d; ++a) prob += b.p(a, mod(a + k + 1, d), 1, m);
            value += ineq.alpha(k) * prob;
        }
    }
    return value;
}

double classical_bound_dp(const ChainInequality& ineq) {
    const int d = ineq.d, m = ineq.m;
    // best[r]: maximum left-accumulated sum of alpha over a prefix of offsets
    // with partial sum = r mod d. Floating-point addition is monotone, so
    // discarding dominated prefixes is exact.
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> best(static_cast<size_t>(d), ninf), next(static_cast<size_t>(d));
    best[0] = 0.0;
    for (int pos = 0; pos < 2 * m; ++pos) {
        std::fill(next.begin(), next.end(), ninf);
        for (int r = 0; r < d; ++r) {
            if (best[static_cast<size_t>(r)] == ninf) continue;
            for (int k = 0; k < d; ++k) {
                double cand = best[static_cast<size_t>(r)] + ineq.alpha(k);
                double& slot = next[static_cast<size_t>(mod(r + k, d))];
                if (cand > slot) slot = cand;
            }
        }
        best.swap(next);
    }
    return best[static_cast<size_t>(d - 1)];  // total offset sum = -1 mod d
}

double classical_bound_bruteforce(const ChainInequality& ineq, std::uint64_t cap) {
    const int d = ineq.d, m = ineq.m;
    double per_party = std::pow(static_cast<double>(d), m);
    if (per_party * per_party > static_cast<double>(cap))
        throw std::length_error("classical_bound_bruteforce: strategy pair count exceeds cap");
    auto alice = enumerate_strategies(m, d, cap);
    auto bob = alice;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& sa : alice)
        for (const auto& sb : bob) {
            double v = chain_value(deterministic_behavior(sa, sb, d, d), ineq);
            if (v > best) best = v;
        }
    return best;
}

Behavior ns_box(int d, int m, const ChainOffsetVector& shift) {
    if (shift.d != d) throw std::invalid_argument("ns_box: offset vector built for a different d");
    if (static_cast<int>(shift.q.size()) != 2 * m)
        throw std::invalid_argument("ns_box: offset vector length must be 2m");
    check_offset_entries(d, shift.q, "ns_box");
    Behavior b = make_behavior(m, m, d, d);
    const double on = 1.0 / d, off = 1.0 / (d * static_cast<double>(d));
    for (int x = 1; x <= m; ++x)
        for (int y = 1; y <= m; ++y)
            for (int a = 0; a < d; ++a)
                for (int bo = 0; bo < d; ++bo) {
                    double v;
                    if (x == y)
                        v = (mod(a - bo, d) == shift.q[static_cast<size_t>(2 * y - 2)]) ? on : 0.0;
                    else if (x == y + 1)
                        v = (mod(bo - a, d) == shift.q[static_cast<size_t>(2 * y - 1)]) ? on : 0.0;
                    else if (x == 1 && y == m)
                        v = (mod(bo - a, d) == mod(shift.q[static_cast<size_t>(2 * m - 1)] + 1, d)) ? on : 0.0;
                    else
                        v = off;
                    b.p(a, bo, x, y) = v;
                }
    return b;
}

Behavior partially_deterministic_box(const Behavior& base, int x_star, int e) {
    check_square_scenario(base, "partially_deterministic_box");
    if (x_star < 1 || x_star > base.m_a)
        throw std::invalid_argument("partially_deterministic_box: x_star out of range");
    if (e < 0 || e >= base.d_a)
        throw std::invalid_argument("partially_deterministic_box: outcome out of range");
    if (!is_no_signaling(base))
        throw std::invalid_argument("partially_deterministic_box: base behavior must be no-signaling");
    Behavior b = base;
    for (int y = 1; y <= b.m_b; ++y)
        for (int bo = 0; bo < b.d_b; ++bo) {
            double pb = base.marginal_b(bo, 1, y);
            for (int a = 0; a < b.d_a; ++a) b.p(a, bo, x_star, y) = (a == e) ? pb : 0.0;
        }
    return b;
}

ChainCheck verify_no_chain_violation(const Behavior& b, const ChainInequality& ineq) {
    ChainCheck c;
    c.value = chain_value(b, ineq);
    c.bound = classical_bound_dp(ineq);
    c.margin = c.bound - c.value;
    c.ok = c.margin >= -1e-9 * std::max(1.0, std::abs(c.bound));
    return c;
}

namespace detail {

Kernel build_kernel(const Behavior& b, int x_star) {
    check_square_scenario(b, "build_kernel");
    if (x_star < 1 || x_star > b.m_a) throw std::invalid_argument("build_kernel: x_star out of range");
    const int d = b.d_a, m = b.m_a, s = x_star - 1;
    Kernel k;
    k.d = d;
    k.m = m;
    int e = 0;
    double best = -1.0;
    for (int a = 0; a < d; ++a) {
        double pa = b.marginal_a(a, x_star, 1);
        if (pa > best) { best = pa; e = a; }
    }
    if (best < 1.0 - 1e-10)
        throw std::invalid_argument("build_kernel: marginal at x_star is not deterministic");
    k.e = e;
    auto clamp = [](double v) { return v < 1e-12 ? 0.0 : v; };
    k.diag_block.assign(static_cast<size_t>(m + 1), Eigen::MatrixXd());
    k.lower_block.assign(static_cast<size_t>(m + 1), Eigen::MatrixXd());
    k.marg_a.assign(static_cast<size_t>(m + 1), Eigen::VectorXd());
    k.marg_b.assign(static_cast<size_t>(m + 1), Eigen::VectorXd());
    for (int kk = 2; kk <= m; ++kk) {
        Eigen::MatrixXd diag(d, d), lower(d, d);
        int x = shift_input(kk, s, m);
        int y_diag = shift_input(kk, s, m), y_low = shift_input(kk - 1, s, m);
        for (int a = 0; a < d; ++a)
            for (int bo = 0; bo < d; ++bo) {
                diag(a, bo) = clamp(b.p(a, bo, x, y_diag));
                lower(a, bo) = clamp(b.p(a, bo, x, y_low));
            }
        k.diag_block[static_cast<size_t>(kk)] = diag;
        k.lower_block[static_cast<size_t>(kk)] = lower;
        k.marg_a[static_cast<size_t>(kk)] = diag.rowwise().sum();
        k.marg_b[static_cast<size_t>(kk)] = lower.colwise().sum().transpose();
    }
    return k;
}

double curly_f(const Kernel& k, const std::vector<int>& l, int level, int t) {
    const int d = k.d;
    if (level < 2 || level > k.m) throw std::invalid_argument("curly_f: level out of range");
    if (static_cast<int>(l.size()) < 2 * level - 2)
        throw std::invalid_argument("curly_f: offset list too short for level");
    // kappa_B(t + q_2 | 1) taken from the block feeding g^2.
    double val = k.marg_b[2](mod(t + l[0], d));
    int c = 0;  // c_2 = 0, then c_k = c_{k-1} + q_{2k-3} + q_{2k-2}
    for (int kk = 2; kk <= level; ++kk) {
        if (kk >= 3) c += l[static_cast<size_t>(2 * kk - 5)] + l[static_cast<size_t>(2 * kk - 4)];
        int u = mod(t - c, d);
        int q_even = l[static_cast<size_t>(2 * kk - 4)];  // q_{2k-2}
        int q_odd = l[static_cast<size_t>(2 * kk - 3)];   // q_{2k-1}
        double den_b = k.marg_b[static_cast<size_t>(kk)](mod(u + q_even, d));
        double den_a = k.marg_a[static_cast<size_t>(kk)](u);
        if (den_b == 0.0 || den_a == 0.0) return 0.0;
        double num = k.lower_block[static_cast<size_t>(kk)](u, mod(u + q_even, d)) *
                     k.diag_block[static_cast<size_t>(kk)](u, mod(u - q_odd, d));
        val *= num / (den_b * den_a);
        if (val == 0.0) return 0.0;
    }
    return val;
}

}  // namespace detail

ChainDecomposition decompose_partially_deterministic(const Behavior& b, int x_star,
                                                     bool include_components) {
    check_square_scenario(b, "decompose_partially_deterministic");
    double ns = no_signaling_residual(b);
    if (ns > 1e-9)
        throw std::invalid_argument("decompose_partially_deterministic: behavior is signaling");
    const int d = b.d_a, m = b.m_a, s = x_star - 1;
    detail::Kernel kernel = detail::build_kernel(b, x_star);

    ChainDecomposition out;
    out.d = d;
    out.m = m;
    out.x_star = x_star;
    out.e = kernel.e;

    const int llen = 2 * m - 2;
    std::vector<int> l(static_cast<size_t>(llen), 0);
    std::vector<double> ftab(static_cast<size_t>(d));
    std::map<BehaviorEntryKey, double> recon;
    bool more = true;
    while (more) {
        double fl = 0.0;
        for (int t = 0; t < d; ++t) {
            ftab[static_cast<size_t>(t)] = detail::curly_f(kernel, l, m, t);
            fl += ftab[static_cast<size_t>(t)];
        }
        out.f[l] = fl;
        out.f_sum += fl;

        // c_i for i = 2..m, needed to place the F values.
        std::vector<int> c(static_cast<size_t>(m + 1), 0);
        for (int i = 3; i <= m; ++i)
            c[static_cast<size_t>(i)] =
                c[static_cast<size_t>(i - 1)] + l[static_cast<size_t>(2 * i - 5)] + l[static_cast<size_t>(2 * i - 4)];

        for (int q1 = 0; q1 < d; ++q1) {
            std::vector<int> q(static_cast<size_t>(llen + 1));
            q[0] = q1;
            std::copy(l.begin(), l.end(), q.begin() + 1);
            double w = ftab[static_cast<size_t>(mod(kernel.e - q1 - l[0], d))];
            out.pq[q] = w;
            out.pq_sum += w;

            std::map<BehaviorEntryKey, double> box;
            int qsum = q1;
            for (int v : l) qsum += v;
            // Deterministic blocks pinned by the forced outcome at x*.
            box[{kernel.e, mod(kernel.e - q1, d), x_star, x_star}] = 1.0;
            box[{kernel.e, mod(kernel.e - qsum, d), x_star, shift_input(m, s, m)}] = 1.0;
            for (int i = 2; i <= m; ++i) {
                int x = shift_input(i, s, m);
                int y_low = shift_input(i - 1, s, m);
                int q_even = l[static_cast<size_t>(2 * i - 4)];
                int q_odd = l[static_cast<size_t>(2 * i - 3)];
                for (int t = 0; t < d; ++t) {
                    double fv = fl > 0.0
                                    ? ftab[static_cast<size_t>(mod(t + c[static_cast<size_t>(i)], d))] / fl
                                    : 1.0 / d;
                    box[{t, mod(t - q_odd, d), x, x}] = fv;
                    box[{t, mod(t + q_even, d), x, y_low}] = fv;
                }
            }
            if (w != 0.0)
                for (const auto& [key, val] : box) recon[key] += w * val;
            if (include_components) out.components[q] = std::move(box);
        }

        // Odometer over l, least significant entry first.
        more = false;
        for (size_t i = 0; i < l.size(); ++i) {
            if (++l[i] < d) { more = true; break; }
            l[i] = 0;
        }
    }

    auto target = project_behavior(b, InputPairSet::chain_pairs(m));
    double resid = 0.0;
    for (const auto& [key, val] : target) {
        auto it = recon.find(key);
        double r = it == recon.end() ? 0.0 : it->second;
        resid = std::max(resid, std::abs(val - r));
    }
    out.reconstruction_residual = resid;
    return out;
}

Behavior random_no_signaling_behavior(int d, int m, std::mt19937_64& rng) {
    if (d < 2 || m < 2) throw std::invalid_argument("random_no_signaling_behavior: need d >= 2 and m >= 2");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> outcome(0, d - 1);
    std::vector<Behavior> parts;
    for (int i = 0; i < 3; ++i) {
        DeterministicStrategy sa, sb;
        for (int x = 0; x < m; ++x) sa.outcome_for_input.push_back(outcome(rng));
        for (int y = 0; y < m; ++y) sb.outcome_for_input.push_back(outcome(rng));
        parts.push_back(deterministic_behavior(sa, sb, d, d));
    }
    for (int i = 0; i < 2; ++i) {
        std::vector<int> q(static_cast<size_t>(2 * m));
        for (auto& v : q) v = outcome(rng);
        parts.push_back(ns_box(d, m, ChainOffsetVector{d, q}));
    }
    std::vector<double> w(parts.size());
    double total = 0.0;
    for (auto& v : w) { v = unif(rng) + 0.05; total += v; }
    Behavior b = make_behavior(m, m, d, d);
    for (size_t i = 0; i < parts.size(); ++i)
        for (size_t j = 0; j < b.probs.size(); ++j) b.probs[j] += (w[i] / total) * parts[i].probs[j];
    return b;
}

Behavior random_partially_deterministic(int d, int m, int x_star, int e, std::mt19937_64& rng) {
    return partially_deterministic_box(random_no_signaling_behavior(d, m, rng), x_star, e);
}

double& BellFunctional::c(int a, int b, int x, int y) {
    size_t idx = static_cast<size_t>((((x - 1) * m_b + (y - 1)) * d_a + a) * d_b + b);
    return coeffs.at(idx);
}

double BellFunctional::c(int a, int b, int x, int y) const {
    size_t idx = static_cast<size_t>((((x - 1) * m_b + (y - 1)) * d_a + a) * d_b + b);
    return coeffs.at(idx);
}

double BellFunctional::evaluate(const Behavior& b) const {
    if (b.m_a != m_a || b.m_b != m_b || b.d_a != d_a || b.d_b != d_b)
        throw std::invalid_argument("BellFunctional::evaluate: scenario mismatch");
    double v = 0.0;
    for (size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * b.probs[i];
    return v;
}

BellFunctional chain_functional(const ChainInequality& ineq) {
    const int d = ineq.d, m = ineq.m;
    BellFunctional f;
    f.m_a = f.m_b = m;
    f.d_a = f.d_b = d;
    f.coeffs.assign(static_cast<size_t>(m) * m * d * d, 0.0);
    for (int i = 1; i <= m; ++i)
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j) f.c(mod(j + k, d), j, i, i) += ineq.alpha(k);
            if (i < m)
                for (int a = 0; a < d; ++a) f.c(a, mod(a + k, d), i + 1, i) += ineq.alpha(k);
            else
                for (int a = 0; a < d; ++a) f.c(a, mod(a + k + 1, d), 1, m) += ineq.alpha(k);
        }
    return f;
}

}  // namespace randcert::chain
