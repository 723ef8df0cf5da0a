#pragma once

// Propagation in Liouville space and quantum-regression correlators.

#include <vector>

#include "nphoton/liouville.hpp"

namespace nphoton {

inline constexpr double kDefaultRtol = 1e-8;

/// Sorted, non-negative delays (units of 1/reference rate) plus the
/// propagation tolerance used when marching through them.
struct DelayGrid {
    std::vector<double> delays;
    double rtol = kDefaultRtol;

    /// Validates: non-empty, finite, first >= 0, non-decreasing.
    static DelayGrid make(std::vector<double> delays, double rtol = kDefaultRtol);
};

/// Marches sigma(tau) = exp(L tau) sigma(0) forward, keeping the state
/// between calls so successive grid points cost only the increment.
///
/// Integration is an adaptive Krylov exponential integrator applied per
/// invariant block of L, with local error per step bounded by
/// max(rtol * |sigma|, 1e-12 * |sigma(0)|) in the graded Frobenius norm.
class Propagator {
public:
    Propagator(const Liouvillian& L, const DenseMat& sigma, double rtol = kDefaultRtol);

    void advance_to(double tau);
    double time() const { return time_; }

    /// Physical sigma(time()).
    DenseMat state() const;

    /// Tr[op sigma(time())].
    cplx trace_with(const Operator& op) const;

    int steps_taken() const { return steps_; }

private:
    struct Part {
        int block;
        DenseVec v;
    };

    const Liouvillian* L_;
    std::vector<Part> parts_;
    double rtol_;
    double atol_;
    double time_ = 0.0;
    int steps_ = 0;
};

/// exp(L tau) sigma. tau = 0 returns sigma unchanged.
/// Throws ComputationError("propagation failed") on step-size underflow and
/// ComputationError("propagation diverged") on non-finite values.
DenseMat propagate(const Liouvillian& L, const DenseMat& sigma, double tau, double rtol = kDefaultRtol);

/// Tr[mid exp(L tau)(right rho left)].
cplx two_time_sandwich(const Liouvillian& L, const DensityMatrix& rho, const Operator& left, const Operator& mid,
                       const Operator& right, double tau, double rtol = kDefaultRtol);

/// Unfiltered g2(tau) = Tr[a^+ a exp(L tau)(a rho a^+)] / <a^+ a>^2 at each
/// grid delay. Throws ComputationError("normalization undefined") when the
/// population vanishes.
std::vector<double> colorblind_g2(const Liouvillian& L, const DensityMatrix& rho, const Operator& a,
                                  const DelayGrid& grid);

namespace detail {

/// exp(t A) v by adaptive Krylov steps. Exposed for tests.
DenseVec krylov_expv(const SparseMat& a, double a_norm_inf, const DenseVec& v, double t, double rtol, double atol,
                     int* steps = nullptr);

}  // namespace detail

}  // namespace nphoton
