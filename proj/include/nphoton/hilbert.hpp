#pragma once

// Truncated tensor-product Hilbert spaces and sparse operators on them.
//
// Index convention: the first factor varies slowest. For factors with local
// dimensions d_0, d_1, ..., the basis state |n_0, n_1, ...> has flat index
//   n_0 * (d_1 d_2 ...) + n_1 * (d_2 ...) + ...
// Within a factor, index n is the Fock state |n> (boson) or |g>=0, |e>=1
// (qubit).

#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nphoton {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;

struct FactorSpec {
    enum class Kind { Boson, Qubit };

    std::string label;
    Kind kind = Kind::Qubit;
    int n_max = 1;  // boson truncation; 1 for qubits

    static FactorSpec boson(std::string label, int n_max);
    static FactorSpec qubit(std::string label);

    int local_dim() const { return kind == Kind::Boson ? n_max + 1 : 2; }
    bool operator==(const FactorSpec&) const = default;
};

class CompositeSpace {
public:
    explicit CompositeSpace(std::vector<FactorSpec> factors);

    int dim() const { return dim_; }
    const std::vector<FactorSpec>& factors() const { return factors_; }

    /// Position of the factor with this label; throws on unknown labels.
    int index_of(const std::string& label) const;
    bool has(const std::string& label) const;

    /// Flat-index stride of factor k (product of the dims to its right).
    int stride(int k) const { return strides_[k]; }

    /// Local level of factor k in flat basis state i.
    int level(int i, int k) const { return (i / strides_[k]) % factors_[k].local_dim(); }

    bool operator==(const CompositeSpace& other) const { return factors_ == other.factors_; }

private:
    std::vector<FactorSpec> factors_;
    std::vector<int> strides_;
    int dim_ = 1;
};

using SpacePtr = std::shared_ptr<const CompositeSpace>;

SpacePtr make_space(std::vector<FactorSpec> factors);

/// Space formed by appending `extra` factors to `base` (base factors first).
SpacePtr extend_space(const CompositeSpace& base, const std::vector<FactorSpec>& extra);

class Operator {
public:
    Operator(SpacePtr space, SparseMat matrix);

    const SpacePtr& space() const { return space_; }
    const SparseMat& matrix() const { return matrix_; }
    int dim() const { return space_->dim(); }

    DenseMat dense() const { return DenseMat(matrix_); }

private:
    SpacePtr space_;
    SparseMat matrix_;
};

Operator identity(const SpacePtr& space);
Operator zero_operator(const SpacePtr& space);
Operator annihilator(const SpacePtr& space, const std::string& label);
Operator creator(const SpacePtr& space, const std::string& label);
Operator number(const SpacePtr& space, const std::string& label);

Operator add(const Operator& a, const Operator& b);
Operator scale(cplx c, const Operator& a);
Operator matmul(const Operator& a, const Operator& b);
Operator adjoint(const Operator& a);

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cplx c, const Operator& a);
Operator operator*(double c, const Operator& a);

/// Embed an operator into a larger space whose leading factors are the
/// operator's own factors: A -> A (x) 1.
Operator embed(const Operator& op, const SpacePtr& larger);

/// Largest absolute entry of a sparse matrix.
double max_abs(const SparseMat& m);

/// Coordinate-list dump: one line per stored nonzero, `row col re im`,
/// 0-based indices, 17 significant digits, column-major entry order.
void write_coordinate_list(std::ostream& os, const SparseMat& m);
void write_coordinate_list(std::ostream& os, const DenseMat& m);

}  // namespace nphoton
