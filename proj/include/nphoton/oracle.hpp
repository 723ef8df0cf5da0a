#pragma once

// Integral method: filtered one- and two-photon spectra written as chains of
// Liouvillian resolvents acting on the steady state.
//
// Correspondence used throughout: with <X O Y> = Tr[O (Y rho X)],
//   applying a on the left        <->  annihilation in the correlator,
//   applying a^+ on the right     <->  creation in the correlator,
//   R(s) sigma = -(L + s)^-1 sigma is the Laplace transform of exp(L t).

#include <array>
#include <string>
#include <vector>

#include "nphoton/liouville.hpp"

namespace nphoton {

struct FilterSpec {
    double omega = 0.0;
    double gamma = 1.0;

    void validate() const;
};

struct OracleValue {
    double value = 0.0;
    std::vector<std::string> flags;
};

/// -(L + shift)^-1 sigma. Requires Re(shift) < 0.
DenseMat resolvent_apply(const Liouvillian& L, cplx shift, const DenseMat& sigma);

/// S(omega) = (1/pi) Re Tr[R(-i omega - gamma/2)(a rho) a^+]. Small negative
/// values are clamped to 0 and flagged "clamped".
OracleValue filtered_spectrum(const Liouvillian& L, const DensityMatrix& rho, const Operator& a, const FilterSpec& f);

inline constexpr int kS2ChainCount = 6;

/// The six independent chains I_1a, I_1b, I_2a, I_2b, I_3a, I_3b (with their
/// prefactor) for filter order (f1, f2), before symmetrization.
std::array<cplx, kS2ChainCount> s2_chains(const Liouvillian& L, const DensityMatrix& rho, const Operator& a,
                                          const FilterSpec& f1, const FilterSpec& f2);

/// Two-photon spectrum at zero delay: 2 Re sum(chains) + [1 <-> 2].
double s2_zero_delay(const Liouvillian& L, const DensityMatrix& rho, const Operator& a, const FilterSpec& f1,
                     const FilterSpec& f2);

/// Eigendecomposition of L, done per invariant block.
class EigenLiouvillian {
public:
    struct Block {
        std::vector<int> index;
        DenseMat E;
        DenseMat E_inv;
        DenseVec m;
    };

    const Liouvillian& liouvillian() const { return *L_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<cplx> eigenvalues() const;
    double norm() const { return norm_; }

private:
    friend EigenLiouvillian eigendecompose(const Liouvillian& L);
    const Liouvillian* L_ = nullptr;
    std::vector<Block> blocks_;
    double norm_ = 0.0;
};

inline constexpr int kOracleMaxLiouvilleDim = 4096;

/// Throws InvalidArgument("oracle restricted to small systems") beyond the
/// size guard, ComputationError("defective Liouvillian") when the
/// eigenvectors do not reconstruct L, and ComputationError("degenerate steady
/// state") unless exactly one eigenvalue has |Re m| < 1e-9.
EigenLiouvillian eigendecompose(const Liouvillian& L);

/// Two-photon spectrum with the second photon detected tau > 0 after the
/// first: exp(-gamma_2 tau) S2(w1; w2) + 2 Re[dI + dI_3alpha + dI_3beta].
double s2_tau(const EigenLiouvillian& eig, const DensityMatrix& rho, const Operator& a, const FilterSpec& f1,
              const FilterSpec& f2, double tau);

/// Pieces of s2_tau exposed for tests: the kernels applied to a vector.
DenseMat apply_F(const EigenLiouvillian& eig, double omega2, double gamma2, double tau, const DenseMat& y);
DenseMat apply_Z(const EigenLiouvillian& eig, const Operator& a, double omega2, double gamma2, double tau,
                 const DenseMat& y);

}  // namespace nphoton
