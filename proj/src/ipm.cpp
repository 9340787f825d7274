#include "ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace randcert::conic::detail {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

Blocks zeros_like(const std::vector<int>& dims) {
    Blocks out;
    out.reserve(dims.size());
    for (int n : dims) out.push_back(MatrixXd::Zero(n, n));
    return out;
}

Blocks identities(const std::vector<int>& dims) {
    Blocks out;
    out.reserve(dims.size());
    for (int n : dims) out.push_back(MatrixXd::Identity(n, n));
    return out;
}

double bdot(const Blocks& u, const Blocks& v) {
    double s = 0.0;
    for (std::size_t b = 0; b < u.size(); ++b) s += u[b].cwiseProduct(v[b]).sum();
    return s;
}

double block_norm(const Blocks& u) { return std::sqrt(std::max(0.0, bdot(u, u))); }

VectorXd apply_a(const LoweredProblem& p, const Blocks& x) {
    VectorXd out(static_cast<Eigen::Index>(p.rows.size()));
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        double acc = 0.0;
        for (const auto& [blk, coeff] : p.rows[i]) acc += coeff.cwiseProduct(x[blk]).sum();
        out(static_cast<Eigen::Index>(i)) = acc;
    }
    return out;
}

Blocks apply_at(const LoweredProblem& p, const VectorXd& y) {
    Blocks out = zeros_like(p.dims);
    for (std::size_t i = 0; i < p.rows.size(); ++i)
        for (const auto& [blk, coeff] : p.rows[i]) out[blk] += y(static_cast<Eigen::Index>(i)) * coeff;
    return out;
}

bool chol_with_jitter(const MatrixXd& m, Eigen::LLT<MatrixXd>& llt) {
    llt.compute(m);
    if (llt.info() == Eigen::Success) return true;
    const int n = static_cast<int>(m.rows());
    double jitter = std::max(1e-14 * std::abs(m.trace()) / n, 1e-300);
    for (int k = 0; k < 6; ++k) {
        llt.compute(m + jitter * MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) return true;
        jitter *= 100.0;
    }
    return false;
}

// NT scaling of one block: X = R diag(l) R', S = R^{-T} diag(l) R^{-1}.
struct Scaling {
    MatrixXd r;
    MatrixXd rinv;
    VectorXd lambda;
};

bool nt_scaling(const MatrixXd& x, const MatrixXd& s, Scaling& out) {
    Eigen::LLT<MatrixXd> lltx, llts;
    if (!chol_with_jitter(x, lltx) || !chol_with_jitter(s, llts)) return false;
    const MatrixXd lx = lltx.matrixL();
    const MatrixXd ls = llts.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(ls.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd d = svd.singularValues();
    if (!(d.minCoeff() > 0.0)) return false;
    const VectorXd dh = d.cwiseSqrt();
    out.lambda = d;
    out.r = lx * svd.matrixV() * dh.cwiseInverse().asDiagonal();
    const MatrixXd lxinv =
        lx.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(lx.rows(), lx.cols()));
    out.rinv = dh.asDiagonal() * svd.matrixV().transpose() * lxinv;
    return true;
}

// Largest t with diag(l) + t*m psd, as a fraction guard for line search.
double max_step(const VectorXd& l, const MatrixXd& m) {
    const VectorXd li = l.cwiseSqrt().cwiseInverse();
    const MatrixXd n = li.asDiagonal() * m * li.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(n, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (-lmin);
}

struct Direction {
    Blocks dx, ds, dxbar, dsbar;
    VectorXd dy;
    double dtau = 0.0;
    double dkappa = 0.0;
};

struct ScaledTouch {
    int row;
    MatrixXd u;  // R' A_{row} R restricted to this block
};

}  // namespace

IpmResult solve_ipm(const LoweredProblem& p, const IpmOptions& opts) {
    const int nblocks = static_cast<int>(p.dims.size());
    const int k = static_cast<int>(p.rows.size());
    int nu = 0;
    for (int n : p.dims) nu += n;

    IpmResult res;
    Blocks x = identities(p.dims);
    Blocks s = identities(p.dims);
    VectorXd y = VectorXd::Zero(k);
    double tau = 1.0, kappa = 1.0;

    const double bn = p.b.norm();
    const double cn = block_norm(p.c);

    auto finish = [&](IpmStatus st) {
        res.status = st;
        res.x = x;
        res.s = s;
        res.y = y;
        if (st == IpmStatus::Optimal || st == IpmStatus::Inaccurate) {
            for (auto& m : res.x) m /= tau;
            for (auto& m : res.s) m /= tau;
            res.y /= tau;
        }
        return res;
    };

    // Best iterate seen; returned when the loop ends short of the target, so
    // late numerical breakdown cannot erase earlier convergence.
    double best_metric = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Blocks best_x = x, best_s = s;
    VectorXd best_y = y;
    double best_tau = tau;
    double best_pres = 0.0, best_dres = 0.0, best_gap = 0.0, best_pobj = 0.0, best_dobj = 0.0;

    auto finish_best = [&]() {
        x = best_x;
        s = best_s;
        y = best_y;
        tau = best_tau;
        res.pres = best_pres;
        res.dres = best_dres;
        res.gap = best_gap;
        res.pobj = best_pobj;
        res.dobj = best_dobj;
        return finish(best_metric <= 1e-5 ? IpmStatus::Inaccurate : IpmStatus::Failed);
    };

    for (int iter = 0;; ++iter) {
        res.iterations = iter;
        const VectorXd ax = apply_a(p, x);
        const Blocks aty = apply_at(p, y);
        const double cx = bdot(p.c, x);
        const double by = p.b.dot(y);

        // Residuals of the embedded system.
        const VectorXd f1 = ax - p.b * tau;
        Blocks f2 = aty;
        double atsn2 = 0.0;
        for (int b = 0; b < nblocks; ++b) {
            atsn2 += (aty[b] + s[b]).squaredNorm();
            f2[b] += s[b] - p.c[b] * tau;
        }
        const double f3 = by - cx - kappa;

        res.pres = f1.norm() / tau / (1.0 + bn);
        res.dres = block_norm(f2) / tau / (1.0 + cn);
        res.pobj = cx / tau;
        res.dobj = by / tau;
        res.gap = std::abs(res.pobj - res.dobj) /
                  (1.0 + std::max(std::abs(res.pobj), std::abs(res.dobj)));
        const double metric = std::max({res.pres, res.dres, res.gap});
        const double mu = (bdot(x, s) + tau * kappa) / (nu + 1);

        if (opts.verbose)
            std::printf("ipm %4d  mu %.3e  pres %.3e  dres %.3e  gap %.3e  tau %.3e\n", iter, mu,
                        res.pres, res.dres, res.gap, tau);

        if (metric <= opts.eps) return finish(IpmStatus::Optimal);

        // Farkas-type certificates, scale-normalized.
        const double atsn = std::sqrt(atsn2);
        if (by > 0.0 && atsn * std::max(1.0, bn) <= opts.eps * by)
            return finish(IpmStatus::PrimalInfeasible);
        if (cx < 0.0 && ax.norm() * std::max(1.0, cn) <= opts.eps * (-cx))
            return finish(IpmStatus::DualInfeasible);

        if (metric < best_metric) {
            since_best = metric < 0.9 * best_metric ? 0 : since_best + 1;
            best_metric = metric;
            best_x = x;
            best_s = s;
            best_y = y;
            best_tau = tau;
            best_pres = res.pres;
            best_dres = res.dres;
            best_gap = res.gap;
            best_pobj = res.pobj;
            best_dobj = res.dobj;
        } else {
            ++since_best;
            // Numerical floor: sharply worse after near-convergence.
            if (best_metric < 1e-6 && metric > 100.0 * best_metric) return finish_best();
        }
        const bool stalled = since_best > 25 || mu < 1e-17;
        if (iter >= opts.max_iter || stalled) return finish_best();

        // NT scaling and the scaled constraint data.
        std::vector<Scaling> sc(nblocks);
        bool ok = true;
        for (int b = 0; b < nblocks; ++b) ok = ok && nt_scaling(x[b], s[b], sc[b]);
        if (!ok) return finish_best();

        std::vector<std::vector<ScaledTouch>> scaled(nblocks);
        for (int i = 0; i < k; ++i)
            for (const auto& [blk, coeff] : p.rows[static_cast<std::size_t>(i)])
                scaled[blk].push_back({i, sc[blk].r.transpose() * coeff * sc[blk].r});

        Blocks ctil(nblocks);
        VectorXd v = VectorXd::Zero(k);
        double gamma_c = 0.0;
        for (int b = 0; b < nblocks; ++b) {
            ctil[b] = sc[b].r.transpose() * p.c[b] * sc[b].r;
            gamma_c += ctil[b].squaredNorm();
            for (const auto& t : scaled[b]) v(t.row) += t.u.cwiseProduct(ctil[b]).sum();
        }

        MatrixXd schur = MatrixXd::Zero(k, k);
        for (int b = 0; b < nblocks; ++b) {
            const auto& ts = scaled[b];
            if (ts.empty()) continue;
            const int t = static_cast<int>(ts.size());
            const int nn = p.dims[b] * p.dims[b];
            MatrixXd u(t, nn);
            for (int r = 0; r < t; ++r)
                u.row(r) = Eigen::Map<const VectorXd>(ts[static_cast<std::size_t>(r)].u.data(), nn);
            const MatrixXd part = u * u.transpose();
            for (int r = 0; r < t; ++r)
                for (int q = 0; q < t; ++q)
                    schur(ts[static_cast<std::size_t>(r)].row, ts[static_cast<std::size_t>(q)].row) +=
                        part(r, q);
        }
        Eigen::LLT<MatrixXd> schur_llt;
        if (k > 0 && !chol_with_jitter(schur, schur_llt))
            return finish_best();

        const VectorXd y1 = k > 0 ? VectorXd(schur_llt.solve(p.b + v)) : VectorXd(0);

        // Newton direction for given residual targets; rc is the scaled
        // complementarity target, solved via lambda o (dxbar+dsbar) = rc.
        auto newton = [&](const VectorXd& r1, const Blocks& r2, double r3, const Blocks& rc,
                          double rtk, Direction& d) -> bool {
            Blocks g(nblocks), r2til(nblocks);
            for (int b = 0; b < nblocks; ++b) {
                const VectorXd& l = sc[b].lambda;
                g[b].resize(p.dims[b], p.dims[b]);
                for (int i = 0; i < p.dims[b]; ++i)
                    for (int j = 0; j < p.dims[b]; ++j)
                        g[b](i, j) = 2.0 * rc[b](i, j) / (l(i) + l(j));
                r2til[b] = sc[b].r.transpose() * r2[b] * sc[b].r;
            }
            VectorXd rhs0 = r1;
            double cg = 0.0, cr2 = 0.0;
            for (int b = 0; b < nblocks; ++b) {
                const MatrixXd diff = r2til[b] - g[b];
                for (const auto& t : scaled[b]) rhs0(t.row) += t.u.cwiseProduct(diff).sum();
                cg += ctil[b].cwiseProduct(g[b]).sum();
                cr2 += ctil[b].cwiseProduct(r2til[b]).sum();
            }
            const VectorXd y0 = k > 0 ? VectorXd(schur_llt.solve(rhs0)) : VectorXd(0);
            const VectorXd bv = p.b - v;
            const double den = bv.dot(y1) + gamma_c + kappa / tau;
            if (!(std::isfinite(den)) || den <= 0.0) return false;
            d.dtau = (r3 + cg - cr2 + rtk / tau - bv.dot(y0)) / den;
            d.dy = y0 + d.dtau * y1;
            d.dxbar = zeros_like(p.dims);
            d.dsbar = zeros_like(p.dims);
            d.dx = zeros_like(p.dims);
            d.ds = zeros_like(p.dims);
            for (int b = 0; b < nblocks; ++b) {
                MatrixXd aty_s = MatrixXd::Zero(p.dims[b], p.dims[b]);
                for (const auto& t : scaled[b]) aty_s += d.dy(t.row) * t.u;
                d.dsbar[b] = r2til[b] + d.dtau * ctil[b] - aty_s;
                d.dxbar[b] = g[b] - d.dsbar[b];
                d.dx[b] = sc[b].r * d.dxbar[b] * sc[b].r.transpose();
                d.ds[b] = sc[b].rinv.transpose() * d.dsbar[b] * sc[b].rinv;
            }
            d.dkappa = (rtk - kappa * d.dtau) / tau;
            return true;
        };

        auto step_bound = [&](const Direction& d) {
            double a = std::numeric_limits<double>::infinity();
            for (int b = 0; b < nblocks; ++b) {
                a = std::min(a, max_step(sc[b].lambda, d.dxbar[b]));
                a = std::min(a, max_step(sc[b].lambda, d.dsbar[b]));
            }
            if (d.dtau < 0.0) a = std::min(a, tau / -d.dtau);
            if (d.dkappa < 0.0) a = std::min(a, kappa / -d.dkappa);
            return a;
        };

        // Predictor.
        VectorXd r1 = -f1;
        Blocks r2(nblocks), rc(nblocks);
        for (int b = 0; b < nblocks; ++b) {
            r2[b] = -f2[b];
            rc[b] = MatrixXd((-sc[b].lambda.cwiseProduct(sc[b].lambda)).asDiagonal());
        }
        Direction aff;
        if (!newton(r1, r2, -f3, rc, -tau * kappa, aff))
            return finish_best();
        const double a_aff = std::min(1.0, step_bound(aff));
        double mu_aff = (bdot(x, s) + a_aff * (bdot(x, aff.ds) + bdot(aff.dx, s)) +
                         a_aff * a_aff * bdot(aff.dx, aff.ds) +
                         (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa)) /
                        (nu + 1);
        mu_aff = std::max(mu_aff, 0.0);
        double sigma = std::pow(mu_aff / mu, 3);
        sigma = std::clamp(sigma, 1e-10, 0.999);

        // Corrector with Mehrotra second-order term.
        const double sh = 1.0 - sigma;
        r1 = -sh * f1;
        for (int b = 0; b < nblocks; ++b) {
            r2[b] = -sh * f2[b];
            const MatrixXd cross =
                0.5 * (aff.dxbar[b] * aff.dsbar[b] + aff.dsbar[b] * aff.dxbar[b]);
            rc[b] = MatrixXd((sigma * mu - sc[b].lambda.cwiseProduct(sc[b].lambda).array())
                                 .matrix()
                                 .asDiagonal()) -
                    cross;
        }
        Direction dir;
        if (!newton(r1, r2, -sh * f3, rc, sigma * mu - tau * kappa - aff.dtau * aff.dkappa, dir))
            return finish_best();
        const double alpha = std::min(1.0, 0.99 * step_bound(dir));
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            return finish_best();

        for (int b = 0; b < nblocks; ++b) {
            x[b] += alpha * dir.dx[b];
            s[b] += alpha * dir.ds[b];
            x[b] = 0.5 * (x[b] + x[b].transpose().eval());
            s[b] = 0.5 * (s[b] + s[b].transpose().eval());
        }
        y += alpha * dir.dy;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }
}

}  // namespace randcert::conic::detail
