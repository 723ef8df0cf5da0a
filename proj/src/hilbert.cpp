#include "nphoton/hilbert.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

FactorSpec FactorSpec::boson(std::string label, int n_max) {
    return FactorSpec{std::move(label), Kind::Boson, n_max};
}

FactorSpec FactorSpec::qubit(std::string label) {
    return FactorSpec{std::move(label), Kind::Qubit, 1};
}

CompositeSpace::CompositeSpace(std::vector<FactorSpec> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw InvalidArgument("space needs at least one factor");
    std::set<std::string> seen;
    for (const auto& f : factors_) {
        if (f.kind == FactorSpec::Kind::Boson && f.n_max < 1)
            throw InvalidArgument(fmt::format("boson factor '{}' needs n_max >= 1", f.label));
        if (!seen.insert(f.label).second)
            throw InvalidArgument(fmt::format("duplicate factor label '{}'", f.label));
    }
    strides_.assign(factors_.size(), 1);
    for (int k = static_cast<int>(factors_.size()) - 1; k >= 0; --k) {
        strides_[k] = dim_;
        dim_ *= factors_[k].local_dim();
    }
}

int CompositeSpace::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
        if (factors_[k].label == label) return static_cast<int>(k);
    throw InvalidArgument(fmt::format("unknown factor label '{}'", label));
}

bool CompositeSpace::has(const std::string& label) const {
    for (const auto& f : factors_)
        if (f.label == label) return true;
    return false;
}

SpacePtr make_space(std::vector<FactorSpec> factors) {
    return std::make_shared<const CompositeSpace>(std::move(factors));
}

SpacePtr extend_space(const CompositeSpace& base, const std::vector<FactorSpec>& extra) {
    auto factors = base.factors();
    factors.insert(factors.end(), extra.begin(), extra.end());
    return make_space(std::move(factors));
}

Operator::Operator(SpacePtr space, SparseMat matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    if (!space_) throw InvalidArgument("operator without a space");
    if (matrix_.rows() != space_->dim() || matrix_.cols() != space_->dim())
        throw InvalidArgument(fmt::format("operator is {}x{} but space dimension is {}", matrix_.rows(),
                                          matrix_.cols(), space_->dim()));
    matrix_.makeCompressed();
}

namespace {

SparseMat from_triplets(int dim, const std::vector<Eigen::Triplet<cplx>>& t) {
    SparseMat m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

void require_same_space(const Operator& a, const Operator& b) {
    if (a.space() != b.space() && !(*a.space() == *b.space()))
        throw InvalidArgument("operators act on different spaces");
}

SparseMat pruned(SparseMat m) {
    m.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx(0.0); });
    m.makeCompressed();
    return m;
}

}  // namespace

Operator identity(const SpacePtr& space) {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(space->dim());
    for (int i = 0; i < space->dim(); ++i) t.emplace_back(i, i, 1.0);
    return Operator(space, from_triplets(space->dim(), t));
}

Operator zero_operator(const SpacePtr& space) {
    return Operator(space, SparseMat(space->dim(), space->dim()));
}

Operator annihilator(const SpacePtr& space, const std::string& label) {
    const int k = space->index_of(label);
    const int stride = space->stride(k);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < space->dim(); ++i) {
        const int n = space->level(i, k);
        if (n > 0) t.emplace_back(i - stride, i, std::sqrt(static_cast<double>(n)));
    }
    return Operator(space, from_triplets(space->dim(), t));
}

Operator creator(const SpacePtr& space, const std::string& label) {
    return adjoint(annihilator(space, label));
}

Operator number(const SpacePtr& space, const std::string& label) {
    const int k = space->index_of(label);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < space->dim(); ++i) {
        const int n = space->level(i, k);
        if (n > 0) t.emplace_back(i, i, static_cast<double>(n));
    }
    return Operator(space, from_triplets(space->dim(), t));
}

Operator add(const Operator& a, const Operator& b) {
    require_same_space(a, b);
    return Operator(a.space(), pruned(a.matrix() + b.matrix()));
}

Operator scale(cplx c, const Operator& a) {
    return Operator(a.space(), pruned(c * a.matrix()));
}

Operator matmul(const Operator& a, const Operator& b) {
    require_same_space(a, b);
    return Operator(a.space(), pruned(a.matrix() * b.matrix()));
}

Operator adjoint(const Operator& a) {
    return Operator(a.space(), SparseMat(a.matrix().adjoint()));
}

Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
Operator operator-(const Operator& a, const Operator& b) { return add(a, scale(-1.0, b)); }
Operator operator*(const Operator& a, const Operator& b) { return matmul(a, b); }
Operator operator*(cplx c, const Operator& a) { return scale(c, a); }
Operator operator*(double c, const Operator& a) { return scale(cplx(c), a); }

Operator embed(const Operator& op, const SpacePtr& larger) {
    const auto& small = op.space()->factors();
    const auto& big = larger->factors();
    if (small.size() > big.size() || !std::equal(small.begin(), small.end(), big.begin()))
        throw InvalidArgument("embed: target space does not start with the operator's factors");
    const int tail = larger->dim() / op.dim();
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(op.matrix().nonZeros() * tail);
    for (int col = 0; col < op.matrix().outerSize(); ++col)
        for (SparseMat::InnerIterator it(op.matrix(), col); it; ++it)
            for (int r = 0; r < tail; ++r)
                t.emplace_back(static_cast<int>(it.row()) * tail + r, col * tail + r, it.value());
    return Operator(larger, from_triplets(larger->dim(), t));
}

double max_abs(const SparseMat& m) {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
    return best;
}

void write_coordinate_list(std::ostream& os, const SparseMat& m) {
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseMat::InnerIterator it(m, col); it; ++it)
            os << fmt::format("{} {} {:.16e} {:.16e}\n", it.row(), it.col(), it.value().real(),
                              it.value().imag());
}

void write_coordinate_list(std::ostream& os, const DenseMat& m) {
    for (Eigen::Index col = 0; col < m.cols(); ++col)
        for (Eigen::Index row = 0; row < m.rows(); ++row) {
            const cplx v = m(row, col);
            if (v != cplx(0.0))
                os << fmt::format("{} {} {:.16e} {:.16e}\n", row, col, v.real(), v.imag());
        }
}

}  // namespace nphoton
