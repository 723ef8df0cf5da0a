#pragma once

// Lindblad generator in Liouville space and its steady state.
//
// Master equation (rates enter as gamma/2 times the Lindblad form):
//   d rho/dt = i [rho, H] + sum_c (gamma_c / 2) (2 c rho c^+ - c^+ c rho - rho c^+ c)
// which equals the common convention -i[H, rho] + gamma_c D[c] rho with
// D[c] rho = c rho c^+ - {c^+ c, rho}/2.
//
// Vectorization is column stacking: vec(rho)[i + d*j] = rho(i, j), so that
// vec(A rho B) = (B^T (x) A) vec(rho).

#include <vector>

#include "nphoton/hilbert.hpp"

namespace nphoton {

struct Dissipator {
    double rate = 0.0;
    Operator collapse;
};

class MasterEquation {
public:
    MasterEquation(Operator hamiltonian, std::vector<Dissipator> dissipators);

    const SpacePtr& space() const { return hamiltonian_.space(); }
    const Operator& hamiltonian() const { return hamiltonian_; }
    const std::vector<Dissipator>& dissipators() const { return dissipators_; }

    /// Smallest strictly positive dissipator rate; 0 if there is none.
    double smallest_rate() const;

private:
    Operator hamiltonian_;
    std::vector<Dissipator> dissipators_;
};

/// Column-stacking helpers.
DenseVec vectorize(const DenseMat& m);
DenseMat unvectorize(const DenseVec& v, int d);

/// Sparse superoperator of a master equation.
///
/// The stored matrix may be expressed in a graded basis: given a positive
/// diagonal Hilbert-space weight D, the stored matrix acts on vec(D rho D)
/// rather than vec(rho). This is an exact similarity transform used to keep
/// hierarchies of very small matrix elements (weakly coupled sensors) at
/// comparable magnitude. All public entry points take and return physical
/// operators; grading is internal.
///
/// The superoperator is also split into the connected components of its
/// sparsity graph. Each component is an exactly invariant subspace.
class Liouvillian {
public:
    struct Block {
        std::vector<int> index;  // sorted global Liouville indices
        SparseMat matrix;        // restriction of the (graded) superoperator
        double norm_inf = 0.0;
    };

    const MasterEquation& master_equation() const { return me_; }
    const SpacePtr& space() const { return me_.space(); }
    int hilbert_dim() const { return me_.space()->dim(); }
    int dim() const { return hilbert_dim() * hilbert_dim(); }

    /// Superoperator in the graded basis (equal to the physical one when
    /// no grading was requested).
    const SparseMat& superop() const { return superop_; }
    bool graded() const { return graded_; }
    /// Liouville-space weights w with vec(D rho D) = w .* vec(rho).
    const Eigen::VectorXd& weights() const { return weights_; }

    DenseVec to_graded(const DenseMat& op) const;
    DenseMat from_graded(const DenseVec& v) const;

    /// Physical action L(rho).
    DenseMat apply(const DenseMat& rho) const;

    const std::vector<Block>& blocks() const { return blocks_; }
    int block_of(int liouville_index) const { return block_of_[liouville_index]; }

    double frobenius_norm() const { return frob_; }

private:
    friend Liouvillian build_liouvillian(const MasterEquation&, const Eigen::VectorXd&);
    explicit Liouvillian(MasterEquation me) : me_(std::move(me)) {}

    MasterEquation me_;
    SparseMat superop_;
    bool graded_ = false;
    Eigen::VectorXd weights_;
    std::vector<Block> blocks_;
    std::vector<int> block_of_;
    double frob_ = 0.0;
};

/// Build the superoperator. `grading` is an optional positive Hilbert-space
/// diagonal D (size d); empty means no grading.
Liouvillian build_liouvillian(const MasterEquation& me, const Eigen::VectorXd& grading = {});

class DensityMatrix {
public:
    DensityMatrix(SpacePtr space, DenseMat matrix);

    const SpacePtr& space() const { return space_; }
    const DenseMat& matrix() const { return matrix_; }

private:
    SpacePtr space_;
    DenseMat matrix_;
};

/// Unique steady state: one sparse LU solve on the components carrying the
/// trace, with the equation of the (0,0) element replaced by a
/// normalization row.
/// Throws ComputationError("degenerate steady state") or
/// ComputationError("steady state not converged").
///
/// The degeneracy test estimates |A^-1| |A| from one random solve. It is
/// only meaningful for an ungraded (or mildly graded) superoperator; pass
/// gap_check = false when the grading spans many orders of magnitude and
/// uniqueness has been established otherwise.
DensityMatrix steady_state(const Liouvillian& L, bool gap_check = true);

/// Tr[A rho].
cplx expectation(const DensityMatrix& rho, const Operator& a);
cplx expectation(const DenseMat& rho, const Operator& a);

}  // namespace nphoton
