#include "nongauss/analysis.hpp"

#include "nongauss/errors.hpp"
#include "nongauss/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace nongauss {

WitnessReport negativity_witness(const CovarianceMatrix& V, const PhotonOp& op) {
    if (op.mode.dim() != V.dim()) throw DimensionError("negativity_witness: dimension mismatch");
    if (op.kind == PhotonOpKind::subtract &&
        mean_photon_number(V, op.mode) <= kMinSubtractionPhotons)
        throw UndefinedSubtraction("subtraction undefined on vacuum mode");
    Eigen::LLT<Mat> llt(V.matrix());
    const Vec& g = op.mode.coords();
    const Vec jg = apply_J(g);
    WitnessReport r;
    r.value = g.dot(llt.solve(g)) + jg.dot(llt.solve(jg));
    r.threshold = op.kind == PhotonOpKind::subtract ? 2.0 : -2.0;
    r.negative = r.value > r.threshold;
    return r;
}

double wigner_at_origin(const CovarianceMatrix& V, const PhotonOp& op) {
    return evaluate_wigner(wigner_nongaussian(V, op), Vec::Zero(V.dim()));
}

PolyGaussianWigner marginal_wigner(const PolyGaussianWigner& W, const ModeVector& g) {
    const int n = W.dim();
    if (g.dim() != n) throw DimensionError("marginal_wigner: dimension mismatch");
    const int m = n / 2;
    const Mat T = complete_symplectic_basis(g);
    Mat B1(n, 2);
    B1.col(0) = T.col(0);
    B1.col(1) = T.col(m);
    PolyGaussianWigner out;
    out.mean = B1.transpose() * W.mean;
    const Mat V11 = B1.transpose() * W.cov * B1;
    out.cov = 0.5 * (V11 + V11.transpose());
    if (m == 1) {
        out.M = B1.transpose() * W.M * B1;
        out.b = B1.transpose() * W.b;
        out.c = W.c;
        return out;
    }
    Mat B2(n, n - 2);
    B2.leftCols(m - 1) = T.block(0, 1, n, m - 1);
    B2.rightCols(m - 1) = T.block(0, m + 1, n, m - 1);

    const Mat V12 = B1.transpose() * W.cov * B2;
    const Mat V22 = B2.transpose() * W.cov * B2;
    const Mat M11 = B1.transpose() * W.M * B1;
    const Mat M12 = B1.transpose() * W.M * B2;
    const Mat M22 = B2.transpose() * W.M * B2;

    // Conditional on the plane coordinates y1, the complement is Gaussian
    // with mean R y1 and covariance V22 - V21 V11^-1 V12.
    const Mat R = V11.ldlt().solve(V12).transpose();
    const Mat cond = V22 - R * V12;
    Mat Mt = M11 + M12 * R + R.transpose() * M12.transpose() + R.transpose() * M22 * R;
    out.M = 0.5 * (Mt + Mt.transpose());
    out.b = B1.transpose() * W.b + R.transpose() * (B2.transpose() * W.b);
    out.c = W.c + (M22 * cond).trace();
    return out;
}

double purity_reduced(const PolyGaussianWigner& W2) {
    if (W2.dim() != 2) throw DimensionError("purity_reduced: expects a two-dimensional Wigner function");
    // W^2 = q(z)^2 N(z; 0, C)^2 and N(z; C)^2 = N(z; C/2) / (4 pi sqrt(det C)),
    // so mu = E_{C/2}[q^2] / sqrt(det C).
    const Mat S = 0.5 * W2.cov;
    const Mat MS = W2.M * S;
    const double tr = MS.trace();
    const double second = 2.0 * (MS * MS).trace() + tr * tr + W2.b.dot(S * W2.b) +
                          W2.c * W2.c + 2.0 * W2.c * tr;
    return second / std::sqrt(W2.cov.determinant());
}

PurityReport reduced_purities(const CovarianceMatrix& V, const PhotonOp& op) {
    PurityReport r;
    r.mu0 = purity_gaussian(reduce_gaussian(V, op.mode));
    r.mu = purity_reduced(marginal_wigner(wigner_nongaussian(V, op), op.mode));
    return r;
}

ModeVector draw_scan_mode(const CovarianceMatrix& V, PhotonOpKind kind, std::uint64_t master_seed,
                          std::uint64_t index, int& resampled) {
    std::mt19937_64 rng(derive_seed(master_seed, index));
    constexpr int kMaxDraws = 1000;
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        ModeVector g = random_mode(V.modes(), rng);
        if (kind == PhotonOpKind::add || mean_photon_number(V, g) >= kScanMinPhotons) return g;
        ++resampled;
    }
    throw UndefinedSubtraction("no mode with nonzero photon number found; is the state vacuum?");
}

PurityScan purity_scan(const CovarianceMatrix& V, PhotonOpKind kind, int n_samples,
                       std::uint64_t seed, int threads) {
    if (!V.is_pure(1e-6))
        throw MixedStateError("purity_scan needs a pure state; purify the covariance first");
    if (n_samples < 0) throw std::invalid_argument("purity_scan: negative sample count");
    PurityScan out;
    out.pairs.resize(n_samples);
    std::vector<int> redraws(n_samples, 0);
    auto work = [&](int i) {
        const ModeVector g = draw_scan_mode(V, kind, seed, static_cast<std::uint64_t>(i), redraws[i]);
        out.pairs[i] = reduced_purities(V, PhotonOp{kind, g});
    };
    const int workers = std::max(1, std::min(threads, n_samples));
    if (workers == 1) {
        for (int i = 0; i < n_samples; ++i) work(i);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int i = t; i < n_samples; i += workers) work(i);
            });
    }
    for (int r : redraws) out.resampled += r;
    return out;
}

double plane_invariance_residual(const CovarianceMatrix& V, const ModeVector& g) {
    if (g.dim() != V.dim()) throw DimensionError("plane_invariance_residual: dimension mismatch");
    const Mat P = mode_projector(g);
    const Mat Q = Mat::Identity(V.dim(), V.dim()) - P;
    return (Q * V.matrix() * P).norm();
}

bool passive_separability_witness(const CovarianceMatrix& V, const ModeVector& g) {
    if (!V.is_pure(1e-6))
        throw MixedStateError("passive separability is only decided for pure states");
    return plane_invariance_residual(V, g) < kInvarianceTolerance;
}

ModeVector supermode(const CovarianceMatrix& V, int index) {
    const int m = V.modes();
    if (index < 0 || index >= m)
        throw DimensionError("supermode index " + std::to_string(index) + " out of range");
    const BlochMessiahDecomposition bm = bloch_messiah(williamson(V).S);
    return ModeVector(bm.O1.col(index));
}

} // namespace nongauss
