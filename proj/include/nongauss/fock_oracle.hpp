#pragma once

// Brute-force reference states in truncated Fock space (m <= 3 modes).
//
// Mode operators follow the phase-space conventions: x_j = a_j + a_j^dagger,
// p_j = -i (a_j - a_j^dagger), so a mode vector g = (g_x, g_p) maps to
// a(g) = sum_j (g_x,j - i g_p,j) a_j. The Wigner function is returned in
// phase-space units, where the vacuum gives (2 pi)^-m exp(-|beta|^2 / 2).

#include "nongauss/gaussian.hpp"
#include "nongauss/photon_ops.hpp"

#include <complex>
#include <span>
#include <vector>

namespace nongauss::fock {

using cplx = std::complex<double>;

inline constexpr int kMaxModes = 3;
inline constexpr int kDefaultCutoff = 20;
inline constexpr double kLeakageTolerance = 1e-8;
inline constexpr double kMaxSqueezingNats = 1.2;
/// Truncation errors in amplitudes scale like sqrt(leakage), so comparisons
/// at the 1e-8 level need the discarded probability far below kLeakageTolerance.
inline constexpr double kComparisonLeakage = 1e-22;

/// Pure state on `modes` modes with photon numbers 0 .. dim-1 per mode,
/// stored row-major (mode 0 slowest).
struct FockState {
    int modes = 1;
    int dim = 1;
    std::vector<cplx> amplitudes;
    double leakage = 0.0; ///< probability discarded by truncation

    FockState() = default;
    FockState(int modes, int dim);

    std::size_t size() const noexcept { return amplitudes.size(); }
    std::size_t stride(int mode) const noexcept;
    double norm2() const noexcept;

    cplx& at(std::span<const int> n);
    cplx at(std::span<const int> n) const;

    /// Same state with a larger per-mode dimension (zero padded).
    FockState padded(int new_dim) const;
};

FockState vacuum(int modes, int cutoff);

/// Smallest cutoff (total photon number bound) whose discarded probability
/// for the pure Gaussian V is below `leakage_tol`.
int suggest_cutoff(const CovarianceMatrix& V, double leakage_tol = kLeakageTolerance);

/// Pure Gaussian state: squeezed vacua from the Bloch-Messiah values, then
/// the passive interferometer as a sequence of two-mode rotations. Photon
/// numbers are truncated to a total below `cutoff`.
///
/// Throws CutoffError when the discarded probability exceeds `leakage_tol`.
FockState build_gaussian_fock(const CovarianceMatrix& V, int cutoff = kDefaultCutoff,
                              double leakage_tol = kLeakageTolerance);

/// D(xi) |psi>, displacing quadrature means by +xi; output per-mode dim `cutoff`.
FockState displace(const FockState& state, const Vec& xi, int cutoff,
                   double leakage_tol = kLeakageTolerance);

/// Passive transformation with a_k^dagger -> sum_j U_jk a_j^dagger. Exact on
/// states whose total photon number is below `state.dim`.
FockState apply_passive(const FockState& state, const Eigen::MatrixXcd& U);

struct PhotonOpResult {
    FockState state;
    double norm2 = 0.0; ///< squared norm before renormalization
};

/// Normalized a^dagger(g)|psi> or a(g)|psi>. Throws UndefinedSubtraction when
/// the unnormalized result has squared norm below 1e-12.
PhotonOpResult apply_photon_op_fock(const FockState& state, const PhotonOp& op);

/// <psi| D(gamma_1) Pi_1 (x) ... |psi> / (2 pi)^m with gamma_j = beta_x,j + i beta_p,j.
double wigner_from_fock(const FockState& state, const Vec& beta);

/// Matrix elements <r|D(gamma)|c> for r < rows, c < cols. Exact (not a
/// truncation of the operator exponential).
Eigen::MatrixXcd displacement_matrix(cplx gamma, int rows, int cols);

Vec mean_from_fock(const FockState& state);
Mat covariance_from_fock(const FockState& state);

/// <a^dagger(g) a(g)>.
double photon_number_from_fock(const FockState& state, const ModeVector& g);

inline constexpr int kMaxCumulantOrder = 6;

/// Truncated correlation <Q(f_1) ... Q(f_n)>_T from fully symmetrized
/// moments (average over operator orderings), n <= 6.
double cumulants_from_fock(const FockState& state, std::span<const Vec> fs);

/// Symmetrized moment <Q(f_1) ... Q(f_n)>_sym, n <= 6.
double symmetrized_moment(const FockState& state, std::span<const Vec> fs);

} // namespace nongauss::fock
