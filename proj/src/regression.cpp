#include "nphoton/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "nphoton/error.hpp"

namespace nphoton {

DelayGrid DelayGrid::make(std::vector<double> delays, double rtol) {
    if (delays.empty()) throw InvalidArgument("delay grid is empty");
    if (!(rtol > 0.0)) throw InvalidArgument("delay grid tolerance must be > 0");
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (!std::isfinite(delays[i])) throw InvalidArgument("delay grid has non-finite entries");
        if (i == 0 && delays[i] < 0.0) throw InvalidArgument("delay grid must start at tau >= 0");
        if (i > 0 && delays[i] < delays[i - 1]) throw InvalidArgument("delay grid must be non-decreasing");
    }
    return DelayGrid{std::move(delays), rtol};
}

namespace detail {

namespace {

double round_step(double step) {
    const double s = std::pow(10.0, std::floor(std::log10(step)) - 1.0);
    return std::ceil(step / s) * s;
}

}  // namespace

DenseVec krylov_expv(const SparseMat& a, double a_norm_inf, const DenseVec& v, double t, double rtol, double atol,
                     int* steps) {
    if (t < 0.0) throw InvalidArgument("propagation time must be >= 0");
    const Eigen::Index n = v.size();
    double beta = v.norm();
    if (t == 0.0 || beta == 0.0 || a_norm_inf == 0.0) return v;
    if (n == 1) return v * std::exp(t * a.coeff(0, 0));

    const int m = static_cast<int>(std::min<Eigen::Index>(30, n));
    constexpr double gamma = 0.9;
    constexpr double delta = 1.2;
    const double breakdown = 1e-14 * a_norm_inf;

    // Initial step from the a-priori Krylov error bound.
    const double fact = std::pow((m + 1) / std::exp(1.0), m + 1) * std::sqrt(2.0 * M_PI * (m + 1));
    double t_new = (1.0 / a_norm_inf) * std::pow((fact * rtol) / (4.0 * a_norm_inf), 1.0 / m);
    t_new = round_step(std::min(t_new, t));

    DenseVec w = v;
    DenseMat basis(n, m + 1);
    DenseMat hess(m + 2, m + 2);
    double t_now = 0.0;
    int taken = 0;

    while (t_now < t) {
        double step = std::min(t - t_now, t_new);
        hess.setZero();
        basis.col(0) = w / beta;
        int mb = m;
        int k1 = 2;
        for (int j = 0; j < m; ++j) {
            DenseVec p = a * basis.col(j);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) {
                    const cplx h = basis.col(i).dot(p);
                    hess(i, j) += h;
                    p -= h * basis.col(i);
                }
            const double s = p.norm();
            if (s < breakdown) {
                k1 = 0;
                mb = j + 1;
                step = t - t_now;
                break;
            }
            hess(j + 1, j) = s;
            basis.col(j + 1) = p / s;
        }
        double avnorm = 0.0;
        if (k1 != 0) {
            hess(m + 1, m) = 1.0;
            avnorm = (a * basis.col(m)).norm();
        }

        const double tol_abs = std::max(rtol * beta, atol);
        double err = 0.0;
        double xm = 1.0 / m;
        DenseMat f;
        for (int reject = 0;; ++reject) {
            const int mx = mb + k1;
            f = (DenseMat(hess.topLeftCorner(mx, mx)) * cplx(step)).exp();
            if (k1 == 0) {
                err = 0.0;
                break;
            }
            const double phi1 = std::abs(beta * f(m, 0));
            const double phi2 = std::abs(beta * f(m + 1, 0) * avnorm);
            if (phi1 > 10.0 * phi2) {
                err = phi2;
                xm = 1.0 / m;
            } else if (phi1 > phi2) {
                err = (phi1 * phi2) / (phi1 - phi2);
                xm = 1.0 / m;
            } else {
                err = phi1;
                xm = 1.0 / (m - 1);
            }
            if (!std::isfinite(err)) throw ComputationError("propagation diverged");
            if (err <= delta * tol_abs) break;
            step = round_step(gamma * step * std::pow(tol_abs / err, xm));
            if (reject > 60 || step < 1e-14 * std::max(t, 1.0))
                throw ComputationError(fmt::format("propagation failed (step size underflow at tau = {:.6g})", t_now));
        }

        const int mx = mb + std::max(0, k1 - 1);
        w = basis.leftCols(mx) * (beta * f.col(0).head(mx));
        beta = w.norm();
        if (!std::isfinite(beta)) throw ComputationError("propagation diverged");
        t_now += step;
        ++taken;
        if (beta == 0.0) break;
        t_new = (err > 0.0) ? round_step(gamma * step * std::pow(tol_abs / err, xm)) : t - t_now;
        if (!(t_new > 0.0)) t_new = t - t_now;
    }
    if (steps) *steps += taken;
    return w;
}

}  // namespace detail

Propagator::Propagator(const Liouvillian& L, const DenseMat& sigma, double rtol) : L_(&L), rtol_(rtol) {
    if (!(rtol > 0.0)) throw InvalidArgument("propagation tolerance must be > 0");
    const DenseVec g = L.to_graded(sigma);
    atol_ = 1e-12 * g.norm();
    std::vector<int> part_of(L.blocks().size(), -1);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        if (g[k] == cplx(0.0)) continue;
        const int b = L.block_of(static_cast<int>(k));
        if (part_of[b] < 0) {
            part_of[b] = static_cast<int>(parts_.size());
            parts_.push_back(Part{b, DenseVec()});
        }
    }
    for (auto& p : parts_) {
        const auto& idx = L.blocks()[p.block].index;
        p.v.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) p.v[j] = g[idx[j]];
    }
}

void Propagator::advance_to(double tau) {
    if (tau < time_) throw InvalidArgument("propagator cannot move backwards in time");
    const double dt = tau - time_;
    if (dt == 0.0) return;
    for (auto& p : parts_) {
        const auto& b = L_->blocks()[p.block];
        p.v = detail::krylov_expv(b.matrix, b.norm_inf, p.v, dt, rtol_, atol_, &steps_);
    }
    time_ = tau;
}

DenseMat Propagator::state() const {
    DenseVec g = DenseVec::Zero(L_->dim());
    for (const auto& p : parts_) {
        const auto& idx = L_->blocks()[p.block].index;
        for (std::size_t j = 0; j < idx.size(); ++j) g[idx[j]] = p.v[j];
    }
    return L_->from_graded(g);
}

cplx Propagator::trace_with(const Operator& op) const {
    return expectation(state(), op);
}

DenseMat propagate(const Liouvillian& L, const DenseMat& sigma, double tau, double rtol) {
    if (tau < 0.0) throw InvalidArgument("propagation time must be >= 0");
    if (tau == 0.0) return sigma;
    Propagator p(L, sigma, rtol);
    p.advance_to(tau);
    return p.state();
}

cplx two_time_sandwich(const Liouvillian& L, const DensityMatrix& rho, const Operator& left, const Operator& mid,
                       const Operator& right, double tau, double rtol) {
    const DenseMat seed = right.matrix() * rho.matrix() * left.matrix();
    return expectation(propagate(L, seed, tau, rtol), mid);
}

std::vector<double> colorblind_g2(const Liouvillian& L, const DensityMatrix& rho, const Operator& a,
                                  const DelayGrid& grid) {
    const Operator ad = adjoint(a);
    const Operator n_op = ad * a;
    const double n = expectation(rho, n_op).real();
    if (!(n > 0.0)) throw ComputationError("normalization undefined (zero population)");
    const DenseMat seed = a.matrix() * rho.matrix() * ad.matrix();
    Propagator prop(L, seed, grid.rtol);
    std::vector<double> out;
    out.reserve(grid.delays.size());
    for (double tau : grid.delays) {
        prop.advance_to(tau);
        out.push_back(prop.trace_with(n_op).real() / (n * n));
    }
    return out;
}

}  // namespace nphoton
