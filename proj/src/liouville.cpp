#include "nphoton/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

MasterEquation::MasterEquation(Operator hamiltonian, std::vector<Dissipator> dissipators)
    : hamiltonian_(std::move(hamiltonian)), dissipators_(std::move(dissipators)) {
    const SparseMat& h = hamiltonian_.matrix();
    const double hmax = max_abs(h);
    const double asym = max_abs(SparseMat(h - SparseMat(h.adjoint())));
    if (asym > 1e-12 * hmax) throw InvalidArgument(fmt::format("Hamiltonian is not Hermitian (|H-H^+|max = {:.3e})", asym));
    for (const auto& d : dissipators_) {
        if (!(d.rate >= 0.0) || !std::isfinite(d.rate))
            throw InvalidArgument(fmt::format("dissipator rate must be finite and >= 0, got {}", d.rate));
        if (!(*d.collapse.space() == *space())) throw InvalidArgument("dissipator acts on a different space");
    }
}

double MasterEquation::smallest_rate() const {
    double best = 0.0;
    for (const auto& d : dissipators_)
        if (d.rate > 0.0 && (best == 0.0 || d.rate < best)) best = d.rate;
    return best;
}

DenseVec vectorize(const DenseMat& m) {
    return Eigen::Map<const DenseVec>(m.data(), m.size());
}

DenseMat unvectorize(const DenseVec& v, int d) {
    return Eigen::Map<const DenseMat>(v.data(), d, d);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

// Appends coeff * (A (x) B) with A, B both d x d.
void add_kron(Triplets& out, const SparseMat& a, const SparseMat& b, cplx coeff) {
    const Eigen::Index d = b.rows();
    for (int ca = 0; ca < a.outerSize(); ++ca)
        for (SparseMat::InnerIterator ia(a, ca); ia; ++ia)
            for (int cb = 0; cb < b.outerSize(); ++cb)
                for (SparseMat::InnerIterator ib(b, cb); ib; ++ib)
                    out.emplace_back(static_cast<int>(ib.row() + d * ia.row()), static_cast<int>(cb + d * ca),
                                     coeff * ia.value() * ib.value());
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

SparseMat restrict_matrix(const SparseMat& m, const std::vector<int>& index, const std::vector<int>& local) {
    Triplets t;
    for (std::size_t j = 0; j < index.size(); ++j)
        for (SparseMat::InnerIterator it(m, index[j]); it; ++it)
            t.emplace_back(local[it.row()], static_cast<int>(j), it.value());
    SparseMat out(static_cast<Eigen::Index>(index.size()), static_cast<Eigen::Index>(index.size()));
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
}

double norm_inf(const SparseMat& m) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMat::InnerIterator it(m, c); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

Liouvillian build_liouvillian(const MasterEquation& me, const Eigen::VectorXd& grading) {
    Liouvillian L(me);
    const int d = me.space()->dim();
    const int n = d * d;
    const SparseMat& h = me.hamiltonian().matrix();
    const SparseMat eye = identity(me.space()).matrix();
    const cplx I(0.0, 1.0);

    Triplets t;
    // i(rho H - H rho)
    add_kron(t, SparseMat(h.transpose()), eye, I);
    add_kron(t, eye, h, -I);
    for (const auto& diss : me.dissipators()) {
        if (diss.rate == 0.0) continue;
        const SparseMat& c = diss.collapse.matrix();
        const SparseMat cdc = SparseMat(c.adjoint()) * c;
        const double half = 0.5 * diss.rate;
        add_kron(t, SparseMat(c.conjugate()), c, 2.0 * half);
        add_kron(t, eye, cdc, -half);
        add_kron(t, SparseMat(cdc.transpose()), eye, -half);
    }

    if (grading.size() != 0) {
        if (grading.size() != d || (grading.array() <= 0.0).any())
            throw InvalidArgument("grading must be a positive vector of the Hilbert dimension");
        L.graded_ = true;
        L.weights_.resize(n);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) L.weights_[i + d * j] = grading[i] * grading[j];
        for (auto& e : t) e = Eigen::Triplet<cplx>(e.row(), e.col(), e.value() * (L.weights_[e.row()] / L.weights_[e.col()]));
    } else {
        L.weights_ = Eigen::VectorXd::Ones(n);
    }

    L.superop_.resize(n, n);
    L.superop_.setFromTriplets(t.begin(), t.end());
    L.superop_.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx(0.0); });
    L.superop_.makeCompressed();
    L.frob_ = L.superop_.norm();

    UnionFind uf(n);
    for (int c = 0; c < L.superop_.outerSize(); ++c)
        for (SparseMat::InnerIterator it(L.superop_, c); it; ++it) uf.unite(static_cast<int>(it.row()), c);

    L.block_of_.assign(n, -1);
    std::vector<int> root_to_block(n, -1);
    for (int k = 0; k < n; ++k) {
        const int r = uf.find(k);
        if (root_to_block[r] < 0) {
            root_to_block[r] = static_cast<int>(L.blocks_.size());
            L.blocks_.emplace_back();
        }
        L.block_of_[k] = root_to_block[r];
        L.blocks_[root_to_block[r]].index.push_back(k);
    }
    std::vector<int> local(n, -1);
    for (auto& b : L.blocks_) {
        for (std::size_t j = 0; j < b.index.size(); ++j) local[b.index[j]] = static_cast<int>(j);
        b.matrix = restrict_matrix(L.superop_, b.index, local);
        b.norm_inf = norm_inf(b.matrix);
    }
    return L;
}

DenseVec Liouvillian::to_graded(const DenseMat& op) const {
    if (op.rows() != hilbert_dim() || op.cols() != hilbert_dim())
        throw InvalidArgument("operator dimension does not match the Liouvillian");
    DenseVec v = vectorize(op);
    if (graded_) v.array() *= weights_.array().cast<cplx>();
    return v;
}

DenseMat Liouvillian::from_graded(const DenseVec& v) const {
    if (!graded_) return unvectorize(v, hilbert_dim());
    DenseVec p = v.array() / weights_.array().cast<cplx>();
    return unvectorize(p, hilbert_dim());
}

DenseMat Liouvillian::apply(const DenseMat& rho) const {
    return from_graded(superop_ * to_graded(rho));
}

DensityMatrix::DensityMatrix(SpacePtr space, DenseMat matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != space_->dim() || matrix_.cols() != space_->dim())
        throw InvalidArgument("density matrix dimension does not match its space");
}

DensityMatrix steady_state(const Liouvillian& L, bool gap_check) {
    const int d = L.hilbert_dim();
    const int n = L.dim();

    // Components that carry diagonal elements (the trace).
    std::vector<char> use_block(L.blocks().size(), 0);
    for (int i = 0; i < d; ++i) use_block[L.block_of(i * (d + 1))] = 1;
    std::vector<int> index;
    for (std::size_t b = 0; b < L.blocks().size(); ++b)
        if (use_block[b]) index.insert(index.end(), L.blocks()[b].index.begin(), L.blocks()[b].index.end());
    std::sort(index.begin(), index.end());
    std::vector<int> local(n, -1);
    for (std::size_t j = 0; j < index.size(); ++j) local[index[j]] = static_cast<int>(j);
    const int m = static_cast<int>(index.size());
    const int row0 = local[0];

    std::vector<Eigen::Triplet<cplx>> t;
    for (int j = 0; j < m; ++j)
        for (SparseMat::InnerIterator it(L.superop(), index[j]); it; ++it)
            if (local[it.row()] != row0) t.emplace_back(local[it.row()], j, it.value());
    // Sum of graded populations: positive for every density matrix, and
    // well scaled whatever the grading. The physical trace is fixed below.
    for (int i = 0; i < d; ++i) t.emplace_back(row0, local[i * (d + 1)], 1.0);
    SparseMat a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();

    Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw ComputationError("degenerate steady state");

    DenseVec rhs = DenseVec::Zero(m);
    rhs[row0] = 1.0;
    DenseVec x = lu.solve(rhs);
    for (int iter = 0; iter < 2; ++iter) {
        DenseVec r = rhs - a * x;
        x += lu.solve(r);
    }
    if (!x.allFinite()) throw ComputationError("degenerate steady state");

    if (gap_check) {
        // A second (near) zero eigenvalue shows up as a huge inverse.
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> nd;
        DenseVec probe(m);
        for (int j = 0; j < m; ++j) probe[j] = cplx(nd(rng), nd(rng));
        probe /= probe.norm();
        const DenseVec y = lu.solve(probe);
        if (!y.allFinite() || y.norm() * a.norm() > 1e13) throw ComputationError("degenerate steady state");
    }

    DenseVec full = DenseVec::Zero(n);
    for (int j = 0; j < m; ++j) full[index[j]] = x[j];
    const double res = (L.superop() * full).norm();
    if (res > 1e-10 * L.frobenius_norm() * full.norm()) throw ComputationError(fmt::format("steady state not converged (residual {:.3e})", res));

    DenseMat rho = L.from_graded(full);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const cplx tr = rho.trace();
    if (std::abs(tr) == 0.0 || !std::isfinite(std::abs(tr))) throw ComputationError("degenerate steady state");
    rho /= tr.real();
    return DensityMatrix(L.space(), std::move(rho));
}

cplx expectation(const DenseMat& rho, const Operator& a) {
    if (rho.rows() != a.dim()) throw InvalidArgument("expectation: space mismatch");
    cplx acc = 0.0;
    const SparseMat& m = a.matrix();
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMat::InnerIterator it(m, c); it; ++it) acc += it.value() * rho(c, it.row());
    return acc;
}

cplx expectation(const DensityMatrix& rho, const Operator& a) {
    if (!(*rho.space() == *a.space())) throw InvalidArgument("expectation: space mismatch");
    return expectation(rho.matrix(), a);
}

}  // namespace nphoton
