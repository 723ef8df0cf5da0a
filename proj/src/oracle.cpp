#include "nphoton/oracle.hpp"

#include <cmath>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

void FilterSpec::validate() const {
    if (!std::isfinite(omega)) throw InvalidArgument("filter omega must be finite");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument(fmt::format("filter gamma must be > 0, got {}", gamma));
}

DenseMat resolvent_apply(const Liouvillian& L, cplx shift, const DenseMat& sigma) {
    if (!(shift.real() < 0.0)) throw InvalidArgument("resolvent shift needs a negative real part");
    const DenseVec g = L.to_graded(sigma);
    DenseVec out = DenseVec::Zero(g.size());
    std::vector<char> done(L.blocks().size(), 0);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        if (g[k] == cplx(0.0)) continue;
        const int b = L.block_of(static_cast<int>(k));
        if (done[b]) continue;
        done[b] = 1;
        const auto& blk = L.blocks()[b];
        const int n = static_cast<int>(blk.index.size());
        SparseMat a = blk.matrix;
        for (int j = 0; j < n; ++j) a.coeffRef(j, j) += shift;
        DenseVec rhs(n);
        for (int j = 0; j < n; ++j) rhs[j] = g[blk.index[j]];
        Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) throw ComputationError("resolvent singular");
        const DenseVec x = lu.solve(rhs);
        if (!x.allFinite()) throw ComputationError("resolvent singular");
        for (int j = 0; j < n; ++j) out[blk.index[j]] = -x[j];
    }
    return L.from_graded(out);
}

namespace {

cplx trace_with_creation(const DenseMat& x, const Operator& a) {
    // Tr[x a^+] = Tr[a^+ x]
    return expectation(x, adjoint(a));
}

struct Superops {
    SparseMat a;
    SparseMat ad;
    DenseMat minus(const DenseMat& x) const { return a * x; }
    DenseMat plus(const DenseMat& x) const { return DenseMat(x * ad); }
};

}  // namespace

OracleValue filtered_spectrum(const Liouvillian& L, const DensityMatrix& rho, const Operator& a, const FilterSpec& f) {
    f.validate();
    const cplx I(0.0, 1.0);
    const DenseMat x = resolvent_apply(L, -I * f.omega - f.gamma / 2.0, a.matrix() * rho.matrix());
    OracleValue r;
    r.value = trace_with_creation(x, a).real() / M_PI;
    if (r.value < 0.0) {
        r.value = 0.0;
        r.flags.push_back("clamped");
    }
    return r;
}

std::array<cplx, kS2ChainCount> s2_chains(const Liouvillian& L, const DensityMatrix& rho, const Operator& a,
                                          const FilterSpec& f1, const FilterSpec& f2) {
    f1.validate();
    f2.validate();
    const cplx I(0.0, 1.0);
    const double w1 = f1.omega, w2 = f2.omega, g1 = f1.gamma, g2 = f2.gamma;
    const Superops T{a.matrix(), SparseMat(a.matrix().adjoint())};
    const DenseMat& v = rho.matrix();
    auto R = [&](cplx s, const DenseMat& x) { return resolvent_apply(L, s, x); };

    const cplx s_out = -I * w2 - g1 - g2 / 2.0;
    const cplx s_inner2 = -I * w2 - g2 / 2.0;
    const cplx s_mid_a = I * w1 - I * w2 - (g1 + g2) / 2.0;
    const cplx s_mid_b = -I * w1 - I * w2 - (g1 + g2) / 2.0;
    const cplx s_in1_a = I * w1 - g1 / 2.0;
    const cplx s_in1_b = -I * w1 - g1 / 2.0;
    const double pref = g1 * g2 / ((g1 + g2) * 4.0 * M_PI * M_PI);

    auto close = [&](const DenseMat& x) { return pref * trace_with_creation(R(s_out, x), a); };

    std::array<cplx, kS2ChainCount> out;
    const DenseMat in2 = R(s_inner2, T.minus(v));
    out[0] = close(T.minus(R(s_mid_a, T.plus(in2))));                          // 1a
    out[1] = close(T.plus(R(s_mid_b, T.minus(in2))));                          // 1b
    const DenseMat in1a = R(s_in1_a, T.plus(v));
    const DenseMat in1b = R(s_in1_b, T.minus(v));
    out[2] = close(T.minus(R(s_mid_a, T.minus(in1a))));                        // 2a
    out[3] = close(T.plus(R(s_mid_b, T.minus(in1b))));                         // 2b
    out[4] = close(T.minus(R(cplx(-g1), T.minus(in1a))));                      // 3a
    out[5] = close(T.minus(R(cplx(-g1), T.plus(in1b))));                       // 3b
    return out;
}

double s2_zero_delay(const Liouvillian& L, const DensityMatrix& rho, const Operator& a, const FilterSpec& f1,
                     const FilterSpec& f2) {
    cplx total = 0.0;
    for (const cplx& c : s2_chains(L, rho, a, f1, f2)) total += c;
    for (const cplx& c : s2_chains(L, rho, a, f2, f1)) total += c;
    return 2.0 * total.real();
}

std::vector<cplx> EigenLiouvillian::eigenvalues() const {
    std::vector<cplx> out;
    for (const auto& b : blocks_)
        for (Eigen::Index i = 0; i < b.m.size(); ++i) out.push_back(b.m[i]);
    return out;
}

EigenLiouvillian eigendecompose(const Liouvillian& L) {
    if (L.dim() > kOracleMaxLiouvilleDim)
        throw InvalidArgument(fmt::format("oracle restricted to small systems (Liouville dimension {} > {})", L.dim(),
                                          kOracleMaxLiouvilleDim));
    EigenLiouvillian out;
    out.L_ = &L;
    const Eigen::VectorXd& w = L.weights();
    double res2 = 0.0, norm2 = 0.0;
    int near_zero = 0;
    for (const auto& blk : L.blocks()) {
        const int n = static_cast<int>(blk.index.size());
        // Physical (ungraded) restriction of L.
        DenseMat m = DenseMat(blk.matrix);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) *= w[blk.index[j]] / w[blk.index[i]];
        Eigen::ComplexEigenSolver<DenseMat> es(m);
        if (es.info() != Eigen::Success) throw ComputationError("defective Liouvillian (eigensolver failed)");
        EigenLiouvillian::Block b;
        b.index = blk.index;
        b.E = es.eigenvectors();
        b.m = es.eigenvalues();
        Eigen::PartialPivLU<DenseMat> lu(b.E);
        b.E_inv = lu.inverse();
        const double cond = b.E.norm() * b.E_inv.norm();
        if (!std::isfinite(cond) || cond > 1e10)
            throw ComputationError(fmt::format("defective Liouvillian (eigenvector condition {:.3e})", cond));
        res2 += (m * b.E - b.E * b.m.asDiagonal()).squaredNorm();
        norm2 += m.squaredNorm();
        for (int i = 0; i < n; ++i)
            if (std::abs(b.m[i].real()) < 1e-9) ++near_zero;
        out.blocks_.push_back(std::move(b));
    }
    out.norm_ = std::sqrt(norm2);
    if (std::sqrt(res2) > 1e-8 * out.norm_)
        throw ComputationError(fmt::format("defective Liouvillian (residual {:.3e})", std::sqrt(res2)));
    if (near_zero != 1)
        throw ComputationError(fmt::format("degenerate steady state ({} eigenvalues with |Re m| < 1e-9)", near_zero));
    return out;
}

namespace {

// psi(x) = exp(-g tau) (exp(x tau) - 1) / x, written to avoid overflow.
cplx psi(cplx x, double g, double tau) {
    const cplx z = x * tau;
    if (std::abs(z) < 0.5) {
        cplx term = tau, sum = 0.0;
        for (int k = 1; k < 30; ++k) {
            sum += term;
            term *= z / double(k + 1);
        }
        return std::exp(-g * tau) * sum;
    }
    return (std::exp((x - g) * tau) - std::exp(-g * tau)) / x;
}

// d psi / dx.
cplx psi_prime(cplx x, double g, double tau) {
    const cplx z = x * tau;
    if (std::abs(z) < 0.5) {
        // sum_{k>=2} (k-1) x^{k-2} tau^k / k!
        cplx sum = 0.0, pw = tau * tau / 2.0;  // x^{k-2} tau^k / k! at k = 2
        for (int k = 2; k < 32; ++k) {
            sum += double(k - 1) * pw;
            pw *= z / double(k + 1);
        }
        return std::exp(-g * tau) * sum;
    }
    const cplx e = std::exp((x - g) * tau);
    return (tau * e * x - (e - std::exp(-g * tau))) / (x * x);
}

DenseVec gather(const DenseVec& v, const std::vector<int>& index) {
    DenseVec out(static_cast<Eigen::Index>(index.size()));
    for (std::size_t j = 0; j < index.size(); ++j) out[j] = v[index[j]];
    return out;
}

}  // namespace

DenseMat apply_F(const EigenLiouvillian& eig, double omega2, double gamma2, double tau, const DenseMat& y) {
    const cplx I(0.0, 1.0);
    const int d = eig.liouvillian().hilbert_dim();
    const DenseVec v = vectorize(y);
    DenseVec out = DenseVec::Zero(v.size());
    for (const auto& b : eig.blocks()) {
        DenseVec c = b.E_inv * gather(v, b.index);
        for (Eigen::Index p = 0; p < c.size(); ++p) c[p] *= psi(b.m[p] - I * omega2 + gamma2 / 2.0, gamma2, tau);
        const DenseVec r = b.E * c;
        for (std::size_t j = 0; j < b.index.size(); ++j) out[b.index[j]] = r[j];
    }
    return unvectorize(out, d);
}

DenseMat apply_Z(const EigenLiouvillian& eig, const Operator& a, double omega2, double gamma2, double tau,
                 const DenseMat& y) {
    const cplx I(0.0, 1.0);
    const Liouvillian& L = eig.liouvillian();
    const int d = L.hilbert_dim();
    const int n = L.dim();
    const DenseVec v = vectorize(y);
    const double tiny = 1e-8 * eig.norm();

    // Left multiplication by a as a Liouville-space matrix: 1 (x) a.
    const SparseMat eye = identity(L.space()).matrix();
    std::vector<Eigen::Triplet<cplx>> t;
    for (int c = 0; c < a.matrix().outerSize(); ++c)
        for (SparseMat::InnerIterator it(a.matrix(), c); it; ++it)
            for (int j = 0; j < d; ++j) t.emplace_back(static_cast<int>(it.row()) + d * j, c + d * j, it.value());
    SparseMat tm(n, n);
    tm.setFromTriplets(t.begin(), t.end());

    DenseVec out = DenseVec::Zero(n);
    for (const auto& q : eig.blocks()) {
        const DenseVec c = q.E_inv * gather(v, q.index);
        if (c.squaredNorm() == 0.0) continue;
        // T_- E_Q, scattered into the target blocks.
        DenseMat full = DenseMat::Zero(n, q.index.size());
        for (std::size_t j = 0; j < q.index.size(); ++j) {
            DenseVec col = DenseVec::Zero(n);
            for (std::size_t i = 0; i < q.index.size(); ++i) col[q.index[i]] = q.E(i, j);
            full.col(j) = tm * col;
        }
        for (const auto& p : eig.blocks()) {
            DenseMat rows(p.index.size(), q.index.size());
            for (std::size_t i = 0; i < p.index.size(); ++i) rows.row(i) = full.row(p.index[i]);
            if (rows.squaredNorm() == 0.0) continue;
            const DenseMat B = p.E_inv * rows;
            DenseVec wp = DenseVec::Zero(p.index.size());
            for (Eigen::Index pi = 0; pi < B.rows(); ++pi)
                for (Eigen::Index qi = 0; qi < B.cols(); ++qi) {
                    if (B(pi, qi) == cplx(0.0) || c[qi] == cplx(0.0)) continue;
                    const cplx x = q.m[qi] + gamma2;
                    const cplx delta = p.m[pi] - q.m[qi] - I * omega2 - gamma2 / 2.0;
                    const cplx k = std::abs(delta) < tiny
                                       ? psi_prime(x, gamma2, tau)
                                       : (psi(x + delta, gamma2, tau) - psi(x, gamma2, tau)) / delta;
                    wp[pi] += B(pi, qi) * k * c[qi];
                }
            const DenseVec r = p.E * wp;
            for (std::size_t j = 0; j < p.index.size(); ++j) out[p.index[j]] += r[j];
        }
    }
    return unvectorize(out, d);
}

double s2_tau(const EigenLiouvillian& eig, const DensityMatrix& rho, const Operator& a, const FilterSpec& f1,
              const FilterSpec& f2, double tau) {
    f1.validate();
    f2.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("s2_tau needs tau > 0");
    const Liouvillian& L = eig.liouvillian();
    const cplx I(0.0, 1.0);
    const double w1 = f1.omega, w2 = f2.omega, g1 = f1.gamma, g2 = f2.gamma;
    const Superops T{a.matrix(), SparseMat(a.matrix().adjoint())};
    const DenseMat& v = rho.matrix();
    auto R = [&](cplx s, const DenseMat& x) { return resolvent_apply(L, s, x); };

    const cplx s_out = -I * w2 - g1 - g2 / 2.0;
    const cplx s_inner2 = -I * w2 - g2 / 2.0;
    const cplx s_mid_a = I * w1 - I * w2 - (g1 + g2) / 2.0;
    const cplx s_mid_b = -I * w1 - I * w2 - (g1 + g2) / 2.0;
    const cplx s_in1_a = I * w1 - g1 / 2.0;
    const cplx s_in1_b = -I * w1 - g1 / 2.0;
    const double pref = g1 * g2 / (4.0 * M_PI * M_PI);

    auto close_F = [&](const DenseMat& x) {
        return pref * trace_with_creation(apply_F(eig, w2, g2, tau, R(s_out, x)), a);
    };
    const DenseMat in2 = R(s_inner2, T.minus(v));
    const DenseMat in1a = R(s_in1_a, T.plus(v));
    const DenseMat in1b = R(s_in1_b, T.minus(v));
    const DenseMat z3a = R(cplx(-g1), T.minus(in1a));
    const DenseMat z3b = R(cplx(-g1), T.plus(in1b));

    cplx delta_i = 0.0;
    delta_i += close_F(T.minus(R(s_mid_a, T.plus(in2))));
    delta_i += close_F(T.plus(R(s_mid_b, T.minus(in2))));
    delta_i += close_F(T.minus(R(s_mid_a, T.minus(in1a))));
    delta_i += close_F(T.plus(R(s_mid_b, T.minus(in1b))));
    delta_i += close_F(T.minus(z3a));
    delta_i += close_F(T.minus(z3b));

    const cplx d3a = pref * trace_with_creation(apply_Z(eig, a, w2, g2, tau, z3a), a);
    const cplx d3b = pref * trace_with_creation(apply_Z(eig, a, w2, g2, tau, z3b), a);

    const double s0 = s2_zero_delay(L, rho, a, f1, f2);
    return std::exp(-g2 * tau) * s0 + 2.0 * (delta_i + d3a + d3b).real();
}

}  // namespace nphoton
