#include "nongauss/photon_ops.hpp"

#include "nongauss/errors.hpp"
#include "nongauss/random.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace nongauss {

PhotonOpKind parse_op_kind(std::string_view s) {
    if (s == "add") return PhotonOpKind::add;
    if (s == "subtract") return PhotonOpKind::subtract;
    throw ParseError("unknown photon operation '" + std::string(s) + "' (expected add|subtract)");
}

std::string_view to_string(PhotonOpKind kind) {
    return kind == PhotonOpKind::add ? "add" : "subtract";
}

namespace {

void require_mode_dim(const CovarianceMatrix& V, const ModeVector& g, const char* who) {
    if (g.dim() != V.dim())
        throw DimensionError(std::string(who) + ": mode vector has dimension " +
                             std::to_string(g.dim()) + ", state has " + std::to_string(V.dim()));
}

void require_undisplaced(const CovarianceMatrix& V, const char* who) {
    if (V.mean().cwiseAbs().maxCoeff() > 0.0)
        throw ValidationError(std::string(who) +
                              ": expects an undisplaced state; use displaced_wigner_function");
}

// tr{(X + s 1) P'} for the mode plane of g, without forming P'.
double plane_trace(const Mat& X, const ModeVector& g, int s) {
    const Vec& v = g.coords();
    const Vec jv = apply_J(v);
    return v.dot(X * v) + jv.dot(X * jv) + 2.0 * s;
}

Mat inverse_spd(const Mat& V, const char* who) {
    Eigen::LLT<Mat> llt(V);
    if (llt.info() != Eigen::Success) throw NumericError(std::string(who) + ": singular covariance");
    Mat inv = llt.solve(Mat::Identity(V.rows(), V.cols()));
    return 0.5 * (inv + inv.transpose());
}

double log_gaussian_norm(const Mat& cov) {
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericError("singular covariance");
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * logdet - 0.5 * static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi);
}

} // namespace

double mean_photon_number(const CovarianceMatrix& V, const ModeVector& g) {
    require_mode_dim(V, g, "mean_photon_number");
    return plane_trace(V.matrix(), g, -1) / 4.0;
}

Mat a_matrix(const CovarianceMatrix& V, const PhotonOp& op) {
    require_mode_dim(V, op.mode, "a_matrix");
    require_undisplaced(V, "a_matrix");
    const int s = op.sign();
    const double t = plane_trace(V.matrix(), op.mode, s);
    if (op.kind == PhotonOpKind::subtract && t / 4.0 <= kMinSubtractionPhotons)
        throw UndefinedSubtraction("subtraction undefined on vacuum mode (<n(g)> = " +
                                   std::to_string(t / 4.0) + ")");
    const Mat shifted = V.matrix() + s * Mat::Identity(V.dim(), V.dim());
    const Mat A = 2.0 * shifted * mode_projector(op.mode) * shifted / t;
    return 0.5 * (A + A.transpose());
}

CovarianceMatrix output_covariance(const CovarianceMatrix& V, const PhotonOp& op) {
    return CovarianceMatrix(V.matrix() + a_matrix(V, op));
}

std::complex<double> two_point(const CovarianceMatrix& V, const PhotonOp& op, const Vec& f1,
                               const Vec& f2) {
    if (f1.size() != V.dim() || f2.size() != V.dim())
        throw DimensionError("two_point: dimension mismatch");
    const Mat A = a_matrix(V, op);
    return {f1.dot(V.matrix() * f2) + f1.dot(A * f2), -f1.dot(apply_J(f2))};
}

double truncated_correlation(const Mat& A, std::span<const Vec> fs) {
    const int n = static_cast<int>(fs.size());
    if (n < 3) throw DimensionError("truncated_correlation: needs at least 3 arguments");
    for (const Vec& f : fs)
        if (f.size() != A.rows()) throw DimensionError("truncated_correlation: dimension mismatch");
    if (n % 2 != 0) return 0.0;
    if (n > kMaxPairPartitionOrder)
        throw CapacityError("truncated_correlation: pair-partition enumeration limited to n <= " +
                            std::to_string(kMaxPairPartitionOrder));

    Mat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = fs[i].dot(A * fs[j]);

    // Sum over pair partitions by recursion on subsets (hafnian of G):
    // pair the lowest remaining index with every other remaining index.
    const unsigned full = (1u << n) - 1u;
    std::vector<double> memo(full + 1u, std::numeric_limits<double>::quiet_NaN());
    memo[0] = 1.0;
    auto haf = [&](auto&& self, unsigned set) -> double {
        if (!std::isnan(memo[set])) return memo[set];
        const int i = std::countr_zero(set);
        const unsigned rest = set & ~(1u << i);
        double acc = 0.0;
        for (unsigned r = rest; r; r &= r - 1u) {
            const int j = std::countr_zero(r);
            acc += G(i, j) * self(self, rest & ~(1u << j));
        }
        return memo[set] = acc;
    };
    const int k = n / 2;
    double factorial = 1.0;
    for (int i = 2; i < k; ++i) factorial *= i;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    return sign * factorial * haf(haf, full);
}

double characteristic_fn(const CovarianceMatrix& V, const PhotonOp& op, const Vec& alpha) {
    if (alpha.size() != V.dim()) throw DimensionError("characteristic_fn: dimension mismatch");
    const Mat A = a_matrix(V, op);
    return (1.0 - 0.5 * alpha.dot(A * alpha)) * std::exp(-0.5 * alpha.dot(V.matrix() * alpha));
}

PolyGaussianWigner PolyGaussianWigner::gaussian(const CovarianceMatrix& V) {
    return {Mat::Zero(V.dim(), V.dim()), Vec::Zero(V.dim()), 1.0, V.matrix(), V.mean()};
}

Moments moments(const PolyGaussianWigner& W) {
    const Vec shift = W.cov * W.b;
    Mat cov = W.cov * W.total_integral() + 2.0 * W.cov * W.M * W.cov - shift * shift.transpose();
    return {W.mean + shift, 0.5 * (cov + cov.transpose())};
}

PolyGaussianWigner wigner_nongaussian(const CovarianceMatrix& V, const PhotonOp& op) {
    const Mat A = a_matrix(V, op);
    const Mat Vinv = inverse_spd(V.matrix(), "wigner_nongaussian");
    PolyGaussianWigner W;
    W.M = 0.5 * Vinv * A * Vinv;
    W.M = 0.5 * (W.M + W.M.transpose()).eval();
    W.b = Vec::Zero(V.dim());
    W.c = 0.5 * (2.0 - (Vinv * A).trace());
    W.cov = V.matrix();
    W.mean = Vec::Zero(V.dim());
    return W;
}

double evaluate_wigner(const PolyGaussianWigner& W, const Vec& beta) {
    if (beta.size() != W.dim()) throw DimensionError("evaluate_wigner: dimension mismatch");
    Eigen::LLT<Mat> llt(W.cov);
    if (llt.info() != Eigen::Success) throw NumericError("evaluate_wigner: singular covariance");
    const Vec z = beta - W.mean;
    const double poly = z.dot(W.M * z) + W.b.dot(z) + W.c;
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double log_norm =
        -0.5 * logdet - 0.5 * static_cast<double>(W.dim()) * std::log(2.0 * std::numbers::pi);
    return poly * std::exp(log_norm - 0.5 * z.dot(llt.solve(z)));
}

NoiseSplit decompose_cov(const CovarianceMatrix& V) {
    const WilliamsonDecomposition w = williamson(V);
    const int m = V.modes();
    Vec excess(2 * m);
    for (int i = 0; i < m; ++i) excess(i) = excess(m + i) = std::max(0.0, w.nu[i] - 1.0);
    Mat Vs = w.S * w.S.transpose();
    Mat Vc = w.S * excess.asDiagonal() * w.S.transpose();
    return {CovarianceMatrix(0.5 * (Vs + Vs.transpose())), 0.5 * (Vc + Vc.transpose())};
}

PolyGaussianWigner displaced_wigner_function(const CovarianceMatrix& V_s, const Vec& xi,
                                             const PhotonOp& op, bool allow_mixed) {
    require_mode_dim(V_s, op.mode, "displaced_wigner_function");
    if (xi.size() != V_s.dim()) throw DimensionError("displaced_wigner_function: bad xi");
    if (!allow_mixed && !V_s.is_pure(1e-6))
        throw ValidationError("displaced_wigner_function: V_s must be pure (set allow_mixed)");
    const int s = op.sign();
    const int n = V_s.dim();
    const Mat P = mode_projector(op.mode);
    const Mat Vinv = inverse_spd(V_s.matrix(), "displaced_wigner_function");
    const Mat XiXi = xi * xi.transpose();
    const double t = plane_trace(V_s.matrix() + XiXi, op.mode, s);
    if (!(t > 4.0 * kMinSubtractionPhotons))
        throw UndefinedSubtraction("subtraction undefined on vacuum mode (zero photon number)");
    const Mat B = Mat::Identity(n, n) + s * Vinv;
    PolyGaussianWigner W;
    W.M = B * P * B / t;
    W.M = 0.5 * (W.M + W.M.transpose()).eval();
    W.b = 2.0 * B * (P * xi) / t;
    W.c = (P * (XiXi - Vinv - s * Mat::Identity(n, n))).trace() / t;
    W.cov = V_s.matrix();
    W.mean = xi;
    return W;
}

double displaced_wigner(const CovarianceMatrix& V_s, const Vec& xi, const PhotonOp& op,
                        const Vec& beta, bool allow_mixed) {
    return evaluate_wigner(displaced_wigner_function(V_s, xi, op, allow_mixed), beta);
}

double mixture_weight(const CovarianceMatrix& V_s, const Mat& V_c, const Vec& xi,
                      const PhotonOp& op, bool regularize) {
    require_mode_dim(V_s, op.mode, "mixture_weight");
    const int n = V_s.dim();
    if (V_c.rows() != n || V_c.cols() != n || xi.size() != n)
        throw DimensionError("mixture_weight: dimension mismatch");
    const int s = op.sign();
    const double denom = plane_trace(V_s.matrix() + V_c, op.mode, s);
    if (!(denom > 4.0 * kMinSubtractionPhotons))
        throw UndefinedSubtraction("subtraction undefined on vacuum mode (zero photon number)");
    const double numer = plane_trace(V_s.matrix() + xi * xi.transpose(), op.mode, s);

    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (V_c + V_c.transpose()));
    const Vec& lam = es.eigenvalues();
    const double lmax = std::max(lam.maxCoeff(), 0.0);
    const double cut = 1e-12 * std::max(1.0, lmax);
    double log_det = 0.0;
    double quad = 0.0;
    int rank = 0;
    for (int i = 0; i < n; ++i) {
        const double proj = es.eigenvectors().col(i).dot(xi);
        if (lam(i) > cut) {
            ++rank;
            log_det += std::log(lam(i));
            quad += proj * proj / lam(i);
        } else {
            if (!regularize)
                throw NumericError("mixture_weight: V_c is singular (enable regularization)");
            if (std::abs(proj) > 1e-9 * std::max(1.0, xi.norm())) return 0.0;
        }
    }
    if (rank == 0) throw NumericError("mixture_weight: V_c vanishes; the state is pure");
    const double density = std::exp(-0.5 * quad - 0.5 * log_det -
                                    0.5 * rank * std::log(2.0 * std::numbers::pi));
    return numer * density / denom;
}

MixtureEstimate mixture_reconstruction(const CovarianceMatrix& V, const PhotonOp& op,
                                       const Vec& beta, std::size_t n_samples,
                                       std::uint64_t seed, int threads) {
    require_mode_dim(V, op.mode, "mixture_reconstruction");
    require_undisplaced(V, "mixture_reconstruction");
    if (beta.size() != V.dim()) throw DimensionError("mixture_reconstruction: bad beta");
    const int m = V.modes();
    const int n = V.dim();
    const int s = op.sign();
    const WilliamsonDecomposition w = williamson(V);
    Mat Vs = w.S * w.S.transpose();
    const CovarianceMatrix pure(0.5 * (Vs + Vs.transpose()));

    Vec noise_scale(n);
    for (int i = 0; i < m; ++i)
        noise_scale(i) = noise_scale(m + i) = std::sqrt(std::max(0.0, w.nu[i] - 1.0));
    if (noise_scale.maxCoeff() <= 1e-6) {
        // pure input: the mixture has a single point at xi = 0
        return {displaced_wigner(pure, Vec::Zero(n), op, beta), 0.0, n_samples};
    }
    const Mat L = w.S * noise_scale.asDiagonal();

    const double total = plane_trace(V.matrix(), op.mode, s);
    if (!(total > 4.0 * kMinSubtractionPhotons))
        throw UndefinedSubtraction("subtraction undefined on vacuum mode (zero photon number)");
    const Mat P = mode_projector(op.mode);
    const Mat Vinv = inverse_spd(pure.matrix(), "mixture_reconstruction");
    const Mat PB = P * (Mat::Identity(n, n) + s * Vinv);
    const double trace_const = (P * (-Vinv - s * Mat::Identity(n, n))).trace();
    Eigen::LLT<Mat> llt(pure.matrix());
    const double log_norm = log_gaussian_norm(pure.matrix());

    // Sample value: p_c(xi)/N(xi; 0, V_c) * W_xi(beta). The displaced-state
    // normalization cancels against the weight, leaving the bracket over the
    // total trace.
    auto sample_value = [&](const Vec& xi) {
        const Vec z = beta - xi;
        const Vec u = PB * z;
        const double bracket = u.squaredNorm() + 2.0 * xi.dot(u) + xi.dot(P * xi) + trace_const;
        return bracket * std::exp(log_norm - 0.5 * z.dot(llt.solve(z))) / total;
    };

    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<double> sums(blocks, 0.0), sq(blocks, 0.0);
    auto run_block = [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t begin = b * kBlock;
        const std::size_t end = std::min(n_samples, begin + kBlock);
        Vec zeta(n);
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            for (int j = 0; j < n; ++j) zeta(j) = normal(rng);
            const double v = sample_value(L * zeta);
            acc += v;
            acc2 += v * v;
        }
        sums[b] = acc;
        sq[b] = acc2;
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
    if (workers == 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < blocks; b += workers) run_block(b);
            });
    }
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        sum += sums[b];
        sum2 += sq[b];
    }
    const double nn = static_cast<double>(n_samples);
    const double mean = sum / nn;
    const double var = n_samples > 1 ? std::max(0.0, (sum2 - nn * mean * mean) / (nn - 1.0)) : 0.0;
    return {mean, std::sqrt(var / nn), n_samples};
}

} // namespace nongauss
