#pragma once

#include "nongauss/gaussian.hpp"
#include "nongauss/phase_space.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>

namespace nongauss {

enum class PhotonOpKind { add, subtract };

/// Conditional single-photon addition (a^dagger(g)) or subtraction (a(g)).
struct PhotonOp {
    PhotonOpKind kind;
    ModeVector mode;

    /// +1 for addition, -1 for subtraction: the sign in V +- 1.
    int sign() const noexcept { return kind == PhotonOpKind::add ? 1 : -1; }
};

PhotonOpKind parse_op_kind(std::string_view s);
std::string_view to_string(PhotonOpKind kind);

/// Below this mean photon number, subtraction is treated as undefined.
inline constexpr double kMinSubtractionPhotons = 1e-12;

/// <n(g)> = tr{(V - 1) P'} / 4 for the undisplaced state.
double mean_photon_number(const CovarianceMatrix& V, const ModeVector& g);

/// A = 2 (V +- 1) P' (V +- 1) / tr{(V +- 1) P'}, with P' = P_g + P_{Jg}.
/// Symmetric, positive semidefinite, rank <= 2.
Mat a_matrix(const CovarianceMatrix& V, const PhotonOp& op);

/// Covariance of the photon-added/subtracted state, V + A.
CovarianceMatrix output_covariance(const CovarianceMatrix& V, const PhotonOp& op);

/// <Q(f1) Q(f2)> of the output state, commutator part included.
std::complex<double> two_point(const CovarianceMatrix& V, const PhotonOp& op, const Vec& f1,
                               const Vec& f2);

/// Largest number of arguments accepted by truncated_correlation.
inline constexpr int kMaxPairPartitionOrder = 12;

/// n-point truncated correlation of the output state for n >= 3:
/// zero for odd n, and for n = 2k
///   (-1)^(k-1) (k-1)! * sum over pair partitions of prod (f_i, A f_j).
double truncated_correlation(const Mat& A, std::span<const Vec> fs);

/// chi(alpha) = tr(exp(i Q(alpha)) rho) = (1 - (alpha, A alpha)/2) exp(-(alpha, V alpha)/2).
/// See docs/derivations.md for the cumulant resummation.
double characteristic_fn(const CovarianceMatrix& V, const PhotonOp& op, const Vec& alpha);

/// W(beta) = [z^t M z + b^t z + c] * N(z; 0, cov), z = beta - mean.
///
/// Closed under marginalization; used for both the undisplaced output state
/// and displaced pure components of the mixture decomposition.
struct PolyGaussianWigner {
    Mat M;
    Vec b;
    double c = 1.0;
    Mat cov;
    Vec mean;

    int dim() const noexcept { return static_cast<int>(cov.rows()); }

    /// Integral over phase space from the Gaussian moment identity tr(M cov) + c.
    double total_integral() const { return (M * cov).trace() + c; }

    static PolyGaussianWigner gaussian(const CovarianceMatrix& V);
};

struct Moments {
    Vec mean;
    Mat cov;
};

/// Mean and covariance of the represented distribution:
/// mean + cov b and cov + 2 cov M cov - (cov b)(cov b)^t for a normalized W.
Moments moments(const PolyGaussianWigner& W);

PolyGaussianWigner wigner_nongaussian(const CovarianceMatrix& V, const PhotonOp& op);

double evaluate_wigner(const PolyGaussianWigner& W, const Vec& beta);

/// V = V_s + V_c with V_s = S S^t pure and V_c = S (diag(nu) - 1) S^t.
struct NoiseSplit {
    CovarianceMatrix pure;
    Mat noise;
};

NoiseSplit decompose_cov(const CovarianceMatrix& V);

/// Wigner function of the state obtained by adding/subtracting a photon
/// from the Gaussian (V_s, displaced by xi). V_s must be pure unless
/// allow_mixed is set.
PolyGaussianWigner displaced_wigner_function(const CovarianceMatrix& V_s, const Vec& xi,
                                             const PhotonOp& op, bool allow_mixed = false);

double displaced_wigner(const CovarianceMatrix& V_s, const Vec& xi, const PhotonOp& op,
                        const Vec& beta, bool allow_mixed = false);

/// Mixing density over displacements xi. With `regularize`, a singular V_c
/// is handled as a density on its range (pseudo-inverse and pseudo-determinant);
/// without it a singular V_c throws NumericError.
double mixture_weight(const CovarianceMatrix& V_s, const Mat& V_c, const Vec& xi,
                      const PhotonOp& op, bool regularize = false);

struct MixtureEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Monte-Carlo reconstruction of W(beta) from the displaced-pure mixture.
///
/// Displacements are drawn from N(0, V_c) in fixed-size blocks, each with its
/// own counter-derived stream, so the result depends on (seed, n_samples)
/// only and not on `threads`.
MixtureEstimate mixture_reconstruction(const CovarianceMatrix& V, const PhotonOp& op,
                                       const Vec& beta, std::size_t n_samples,
                                       std::uint64_t seed, int threads = 1);

} // namespace nongauss
