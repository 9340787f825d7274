#include "randcert/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace randcert {

static size_t assemblage_index(const Assemblage& s, int a, int x) {
    if (x < 1 || x > s.m || a < 0 || a >= s.d)
        throw std::out_of_range("assemblage index (a,x) out of range");
    return static_cast<size_t>(x - 1) * s.d + a;
}

const ComplexMatrix& Assemblage::sigma(int a, int x) const {
    return sigma_flat[assemblage_index(*this, a, x)];
}

ComplexMatrix& Assemblage::sigma(int a, int x) {
    return sigma_flat[assemblage_index(*this, a, x)];
}

ComplexMatrix Assemblage::reduced_state() const {
    ComplexMatrix r = ComplexMatrix::Zero(dim_b, dim_b);
    for (int a = 0; a < d; ++a) r += sigma(a, 1);
    return r;
}

Assemblage make_assemblage(int m, int d, int dim_b) {
    if (m < 1 || d < 2 || dim_b < 1) throw std::invalid_argument("make_assemblage: bad shape");
    Assemblage s;
    s.m = m;
    s.d = d;
    s.dim_b = dim_b;
    s.sigma_flat.assign(static_cast<size_t>(m) * d, ComplexMatrix::Zero(dim_b, dim_b));
    return s;
}

AssemblageValidation validate_assemblage(const Assemblage& s, double tol) {
    AssemblageValidation r;
    if (s.m < 1 || s.d < 2 || s.dim_b < 1 ||
        s.sigma_flat.size() != static_cast<size_t>(s.m) * s.d)
        return r;
    for (const auto& mat : s.sigma_flat) {
        if (mat.rows() != s.dim_b || mat.cols() != s.dim_b || !mat.allFinite()) return r;
        r.hermitian_residual = std::max(r.hermitian_residual, hermiticity_residual(mat));
        r.psd_floor = std::min(r.psd_floor, min_eigenvalue(mat));
    }
    ComplexMatrix first = s.reduced_state();
    for (int x = 2; x <= s.m; ++x) {
        ComplexMatrix sum = ComplexMatrix::Zero(s.dim_b, s.dim_b);
        for (int a = 0; a < s.d; ++a) sum += s.sigma(a, x);
        r.no_signaling_residual =
            std::max(r.no_signaling_residual, (sum - first).cwiseAbs().maxCoeff());
    }
    r.trace_residual = std::abs(first.trace().real() - 1.0) + std::abs(first.trace().imag());
    r.ok = r.hermitian_residual <= tol && r.psd_floor >= -tol &&
           r.no_signaling_residual <= tol && r.trace_residual <= tol;
    return r;
}

static size_t behavior_index(const Behavior& bh, int a, int b, int x, int y) {
    if (x < 1 || x > bh.m_a || y < 1 || y > bh.m_b || a < 0 || a >= bh.d_a || b < 0 ||
        b >= bh.d_b)
        throw std::out_of_range("behavior index (a,b,x,y) out of range");
    return ((static_cast<size_t>(x - 1) * bh.m_b + (y - 1)) * bh.d_a + a) * bh.d_b + b;
}

double& Behavior::p(int a, int b, int x, int y) { return probs[behavior_index(*this, a, b, x, y)]; }

double Behavior::p(int a, int b, int x, int y) const {
    return probs[behavior_index(*this, a, b, x, y)];
}

double Behavior::marginal_a(int a, int x, int y) const {
    double s = 0.0;
    for (int b = 0; b < d_b; ++b) s += p(a, b, x, y);
    return s;
}

double Behavior::marginal_b(int b, int x, int y) const {
    double s = 0.0;
    for (int a = 0; a < d_a; ++a) s += p(a, b, x, y);
    return s;
}

Behavior make_behavior(int m_a, int m_b, int d_a, int d_b) {
    if (m_a < 1 || m_b < 1 || d_a < 2 || d_b < 2)
        throw std::invalid_argument("make_behavior: bad shape");
    Behavior b;
    b.m_a = m_a;
    b.m_b = m_b;
    b.d_a = d_a;
    b.d_b = d_b;
    b.probs.assign(static_cast<size_t>(m_a) * m_b * d_a * d_b, 0.0);
    return b;
}

BehaviorValidation validate_behavior(const Behavior& b, double tol) {
    BehaviorValidation r;
    if (b.probs.size() != static_cast<size_t>(b.m_a) * b.m_b * b.d_a * b.d_b) return r;
    for (double v : b.probs) {
        if (!std::isfinite(v)) return r;
        r.negativity = std::min(r.negativity, v);
    }
    for (int x = 1; x <= b.m_a; ++x)
        for (int y = 1; y <= b.m_b; ++y) {
            double s = 0.0;
            for (int a = 0; a < b.d_a; ++a)
                for (int bb = 0; bb < b.d_b; ++bb) s += b.p(a, bb, x, y);
            r.normalization_residual = std::max(r.normalization_residual, std::abs(s - 1.0));
        }
    r.ok = r.negativity >= -tol && r.normalization_residual <= tol;
    return r;
}

double no_signaling_residual(const Behavior& b) {
    double res = 0.0;
    for (int x = 1; x <= b.m_a; ++x)
        for (int a = 0; a < b.d_a; ++a)
            for (int y = 2; y <= b.m_b; ++y)
                res = std::max(res, std::abs(b.marginal_a(a, x, y) - b.marginal_a(a, x, 1)));
    for (int y = 1; y <= b.m_b; ++y)
        for (int bb = 0; bb < b.d_b; ++bb)
            for (int x = 2; x <= b.m_a; ++x)
                res = std::max(res, std::abs(b.marginal_b(bb, x, y) - b.marginal_b(bb, 1, y)));
    return res;
}

bool is_no_signaling(const Behavior& b, double tol) { return no_signaling_residual(b) <= tol; }

std::vector<DeterministicStrategy> enumerate_strategies(int m, int d, std::uint64_t cap) {
    if (m < 1 || d < 1) throw std::invalid_argument("enumerate_strategies: bad shape");
    std::uint64_t count = 1;
    for (int i = 0; i < m; ++i) {
        count *= static_cast<std::uint64_t>(d);
        if (count > cap) throw std::length_error("enumerate_strategies: d^m exceeds cap");
    }
    std::vector<DeterministicStrategy> out;
    out.reserve(count);
    DeterministicStrategy cur;
    cur.outcome_for_input.assign(m, 0);
    for (std::uint64_t k = 0; k < count; ++k) {
        out.push_back(cur);
        // increment the least significant digit (last input)
        for (int pos = m - 1; pos >= 0; --pos) {
            if (++cur.outcome_for_input[pos] < d) break;
            cur.outcome_for_input[pos] = 0;
        }
    }
    return out;
}

Behavior deterministic_behavior(const DeterministicStrategy& alice,
                                const DeterministicStrategy& bob, int d_a, int d_b) {
    Behavior bh = make_behavior(alice.inputs(), bob.inputs(), d_a, d_b);
    for (int x = 1; x <= bh.m_a; ++x)
        for (int y = 1; y <= bh.m_b; ++y) bh.p(alice(x), bob(y), x, y) = 1.0;
    return bh;
}

Assemblage assemblage_from_state(const DensityMatrix& rho, const MeasurementSet& meas,
                                 const Tolerances& tol) {
    ValidationReport vr = validate_density(rho, tol);
    if (!vr.ok) throw std::invalid_argument("assemblage_from_state: invalid state");
    ValidationReport vm = validate_measurement_set(meas, tol);
    if (!vm.ok) throw std::invalid_argument("assemblage_from_state: invalid measurements");
    const int dim_a = meas.dim();
    if (rho.dim() % dim_a != 0)
        throw std::invalid_argument("assemblage_from_state: dimension mismatch");
    const int dim_b = rho.dim() / dim_a;
    Assemblage s = make_assemblage(meas.inputs(), meas.outcomes(), dim_b);
    ComplexMatrix id_b = ComplexMatrix::Identity(dim_b, dim_b);
    for (int x = 1; x <= s.m; ++x)
        for (int a = 0; a < s.d; ++a)
            s.sigma(a, x) =
                partial_trace(kron(meas.povm(x).effects[a], id_b) * rho.matrix, dim_a, dim_b,
                              Subsystem::B);
    return s;
}

Behavior behavior_from_state(const DensityMatrix& rho, const MeasurementSet& meas_a,
                             const MeasurementSet& meas_b, const Tolerances& tol) {
    ValidationReport vr = validate_density(rho, tol);
    if (!vr.ok) throw std::invalid_argument("behavior_from_state: invalid state");
    if (!validate_measurement_set(meas_a, tol).ok || !validate_measurement_set(meas_b, tol).ok)
        throw std::invalid_argument("behavior_from_state: invalid measurements");
    if (meas_a.dim() * meas_b.dim() != rho.dim())
        throw std::invalid_argument("behavior_from_state: dimension mismatch");
    Behavior bh = make_behavior(meas_a.inputs(), meas_b.inputs(), meas_a.outcomes(),
                                meas_b.outcomes());
    for (int x = 1; x <= bh.m_a; ++x)
        for (int y = 1; y <= bh.m_b; ++y)
            for (int a = 0; a < bh.d_a; ++a)
                for (int b = 0; b < bh.d_b; ++b)
                    bh.p(a, b, x, y) =
                        (kron(meas_a.povm(x).effects[a], meas_b.povm(y).effects[b]) * rho.matrix)
                            .trace()
                            .real();
    return bh;
}

InputPairSet InputPairSet::chain_pairs(int m) {
    if (m < 2) throw std::invalid_argument("chain_pairs: need m >= 2");
    InputPairSet s;
    for (int y = 1; y <= m; ++y) {
        s.pairs.emplace_back(y, y);
        s.pairs.emplace_back(y == m ? 1 : y + 1, y);
    }
    return s;
}

bool InputPairSet::contains(int x, int y) const {
    for (const auto& p : pairs)
        if (p.first == x && p.second == y) return true;
    return false;
}

std::map<BehaviorEntryKey, double> project_behavior(const Behavior& b, const InputPairSet& pairs) {
    std::map<BehaviorEntryKey, double> out;
    for (const auto& [x, y] : pairs.pairs)
        for (int a = 0; a < b.d_a; ++a)
            for (int bb = 0; bb < b.d_b; ++bb) out[{a, bb, x, y}] = b.p(a, bb, x, y);
    return out;
}

}  // namespace randcert
