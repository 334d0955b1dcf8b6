#pragma once

#include "nongauss/gaussian.hpp"
#include "nongauss/photon_ops.hpp"

#include <cstdint>
#include <vector>

namespace nongauss {

/// Negativity witness (g, V^-1 g) + (Jg, V^-1 Jg) against its threshold
/// (2 for subtraction, -2 for addition).
struct WitnessReport {
    double value = 0.0;
    double threshold = 0.0;
    bool negative = false;
};

WitnessReport negativity_witness(const CovarianceMatrix& V, const PhotonOp& op);

/// W(0) of the output state. The polynomial factor is smallest at the
/// origin, so W(0) < 0 exactly when the Wigner function has a negative region.
double wigner_at_origin(const CovarianceMatrix& V, const PhotonOp& op);

/// Integrates out everything but span{g, Jg}. The result is two-dimensional,
/// expressed in coordinates (beta_g, beta_Jg).
PolyGaussianWigner marginal_wigner(const PolyGaussianWigner& W, const ModeVector& g);

/// mu = 4 pi * integral of W^2 for a two-dimensional Wigner function,
/// evaluated in closed form with Gaussian moment identities.
double purity_reduced(const PolyGaussianWigner& W2);

struct PurityReport {
    double mu0 = 1.0; ///< reduced purity of the Gaussian state in mode g
    double mu = 1.0;  ///< reduced purity after the photon operation
};

PurityReport reduced_purities(const CovarianceMatrix& V, const PhotonOp& op);

/// Smallest mean photon number accepted for a randomly drawn subtraction mode.
inline constexpr double kScanMinPhotons = 1e-10;

/// Random mode for scan sample `index`. Subtraction modes with
/// <n(g)> < kScanMinPhotons are redrawn from the same substream;
/// `resampled` counts the redraws.
ModeVector draw_scan_mode(const CovarianceMatrix& V, PhotonOpKind kind, std::uint64_t master_seed,
                          std::uint64_t index, int& resampled);

struct PurityScan {
    std::vector<PurityReport> pairs;
    int resampled = 0;
};

/// (mu0, mu) for n random modes of a pure state. Throws MixedStateError for
/// mixed input. Output is independent of `threads`.
PurityScan purity_scan(const CovarianceMatrix& V, PhotonOpKind kind, int n_samples,
                       std::uint64_t seed, int threads = 1);

/// ||(1 - P') V P'|| below which the mode plane counts as V-invariant.
inline constexpr double kInvarianceTolerance = 1e-8;

double plane_invariance_residual(const CovarianceMatrix& V, const ModeVector& g);

/// True iff span{g, Jg} is an invariant subspace of the pure state V, i.e.
/// the photon operation in g leaves the state passively separable. For a
/// pure V a false result means the operation creates entanglement that
/// passive optics cannot undo. Throws MixedStateError for mixed V.
bool passive_separability_witness(const CovarianceMatrix& V, const ModeVector& g);

/// Supermode i of a pure (or purified) state: column pair i of the
/// Bloch-Messiah O1 of its Williamson symplectic matrix.
ModeVector supermode(const CovarianceMatrix& V, int index);

} // namespace nongauss
