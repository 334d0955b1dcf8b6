#include "nongauss/gaussian.hpp"

#include "nongauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace nongauss {

namespace {

void require_square_even(const Mat& V, const char* who) {
    if (V.rows() != V.cols() || V.rows() == 0 || V.rows() % 2 != 0) {
        std::ostringstream os;
        os << who << ": expected a square matrix of even dimension, got " << V.rows() << "x"
           << V.cols();
        throw DimensionError(os.str());
    }
}

void require_symmetric(const Mat& V, const char* who) {
    const double asym = (V - V.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymmetryTolerance * std::max(1.0, V.cwiseAbs().maxCoeff()))) {
        std::ostringstream os;
        os << who << ": matrix is not symmetric (max asymmetry " << asym << ")";
        throw ValidationError(os.str());
    }
}

struct SqrtPair {
    Mat sqrt;
    Mat inv_sqrt;
};

SqrtPair symmetric_sqrt(const Mat& V, const char* who) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (V + V.transpose()));
    const Vec& lambda = es.eigenvalues();
    const double lmin = lambda.minCoeff();
    const double lmax = lambda.maxCoeff();
    if (!(lmin > 0.0)) {
        std::ostringstream os;
        os << who << ": matrix is not positive definite (smallest eigenvalue " << lmin << ")";
        throw PhysicalityError(os.str(), lmin);
    }
    if (lmin < 1e-14 * lmax) {
        std::ostringstream os;
        os << who << ": covariance matrix is near-singular (eigenvalue range " << lmin << " .. "
           << lmax << ", condition " << lmax / lmin << ")";
        throw NumericError(os.str());
    }
    const Mat& U = es.eigenvectors();
    return {U * lambda.cwiseSqrt().asDiagonal() * U.transpose(),
            U * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose()};
}

// Picks m mutually orthogonal vectors e_i from an orthonormal candidate set,
// each paired with partner(e_i), such that all 2m vectors are orthonormal.
// Candidates are visited cluster by cluster (clusters of near-equal values,
// in the given order); inside a cluster the candidate with the largest
// component outside the already chosen span goes first, which keeps the
// pairing well defined on degenerate eigenspaces.
template <class Partner>
std::pair<Mat, Mat> pair_up(const Mat& candidates, const std::vector<double>& values, int m,
                            double cluster_tol, Partner partner) {
    const int n = static_cast<int>(candidates.cols());
    Mat E(candidates.rows(), m), F(candidates.rows(), m);
    int chosen = 0;
    auto residual = [&](Vec v) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < chosen; ++j) {
                v -= E.col(j).dot(v) * E.col(j);
                v -= F.col(j).dot(v) * F.col(j);
            }
        }
        return v;
    };
    int start = 0;
    while (start < n && chosen < m) {
        int stop = start + 1;
        while (stop < n && std::abs(values[stop] - values[start]) <= cluster_tol) ++stop;
        std::vector<bool> used(n, false);
        while (chosen < m) {
            int best = -1;
            double best_norm = 0.25;
            for (int c = start; c < stop; ++c) {
                if (used[c]) continue;
                const double r = residual(candidates.col(c)).norm();
                if (r > best_norm) {
                    best_norm = r;
                    best = c;
                }
            }
            if (best < 0) break;
            used[best] = true;
            Vec e = residual(candidates.col(best)).normalized();
            Vec f = residual(partner(e)).normalized();
            E.col(chosen) = e;
            F.col(chosen) = f;
            ++chosen;
        }
        start = stop;
    }
    if (chosen < m) throw NumericError("symplectic pairing failed: degenerate spectrum");
    return {E, F};
}

struct SpectralData {
    SqrtPair roots;
    Mat K;      // V^{-1/2} J V^{-1/2}, antisymmetric
    Mat E, F;   // paired eigenvectors
    Vec omega;  // ascending, omega = 1 / nu
};

SpectralData symplectic_analysis(const Mat& V, const char* who) {
    require_square_even(V, who);
    require_symmetric(V, who);
    const int m = static_cast<int>(V.rows() / 2);
    SpectralData d;
    d.roots = symmetric_sqrt(V, who);
    d.K = d.roots.inv_sqrt * symplectic_form(m) * d.roots.inv_sqrt;
    d.K = 0.5 * (d.K - d.K.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(d.K.transpose() * d.K);
    std::vector<double> w2(es.eigenvalues().data(), es.eigenvalues().data() + 2 * m);
    const double scale = std::max(1e-300, w2.back());
    auto [E, F] = pair_up(es.eigenvectors(), w2, m, 1e-7 * scale,
                          [&](const Vec& e) -> Vec { return d.K * e; });
    d.E = std::move(E);
    d.F = std::move(F);
    d.omega.resize(m);
    for (int i = 0; i < m; ++i) d.omega(i) = (d.K * d.E.col(i)).norm();
    return d;
}

} // namespace

std::vector<double> symplectic_spectrum(const Mat& V) {
    const SpectralData d = symplectic_analysis(V, "symplectic_spectrum");
    std::vector<double> nu(d.omega.size());
    for (Eigen::Index i = 0; i < d.omega.size(); ++i) nu[i] = 1.0 / d.omega(i);
    std::sort(nu.begin(), nu.end(), std::greater<>());
    return nu;
}

std::vector<double> validate(const Mat& V) {
    std::vector<double> nu = symplectic_spectrum(V);
    for (double v : nu) {
        if (v < 1.0 - kPhysicalityTolerance) {
            std::ostringstream os;
            os.precision(12);
            os << "non-physical covariance matrix: symplectic eigenvalue " << v << " < 1";
            throw PhysicalityError(os.str(), v);
        }
    }
    return nu;
}

CovarianceMatrix::CovarianceMatrix(Mat V, Vec mean) : V_(std::move(V)), mean_(std::move(mean)) {
    nu_ = validate(V_);
    V_ = 0.5 * (V_ + V_.transpose()).eval();
    if (mean_.size() == 0) mean_ = Vec::Zero(V_.rows());
    if (mean_.size() != V_.rows()) throw DimensionError("mean vector does not match covariance");
}

CovarianceMatrix CovarianceMatrix::vacuum(int m) {
    return CovarianceMatrix(Mat::Identity(2 * m, 2 * m));
}

CovarianceMatrix CovarianceMatrix::thermal(int m, double nu) {
    return CovarianceMatrix(nu * Mat::Identity(2 * m, 2 * m));
}

bool CovarianceMatrix::is_pure(double tol) const {
    return std::all_of(nu_.begin(), nu_.end(), [&](double v) { return std::abs(v - 1.0) <= tol; });
}

CovarianceMatrix CovarianceMatrix::with_mean(Vec mean) const {
    CovarianceMatrix out = *this;
    if (mean.size() != V_.rows()) throw DimensionError("mean vector does not match covariance");
    out.mean_ = std::move(mean);
    return out;
}

Mat WilliamsonDecomposition::normal_form() const {
    const int m = static_cast<int>(nu.size());
    Vec d(2 * m);
    for (int i = 0; i < m; ++i) d(i) = d(m + i) = nu[i];
    return d.asDiagonal();
}

WilliamsonDecomposition williamson(const CovarianceMatrix& cov) {
    const Mat& V = cov.matrix();
    const SpectralData d = symplectic_analysis(V, "williamson");
    const int m = cov.modes();
    Mat O(2 * m, 2 * m);
    O.leftCols(m) = d.E;
    O.rightCols(m) = d.F;
    Vec inv_sqrt_nu(2 * m);
    WilliamsonDecomposition out;
    out.nu.resize(m);
    for (int i = 0; i < m; ++i) {
        out.nu[i] = 1.0 / d.omega(i);
        inv_sqrt_nu(i) = inv_sqrt_nu(m + i) = std::sqrt(d.omega(i));
    }
    out.S = d.roots.sqrt * O * inv_sqrt_nu.asDiagonal();
    return out;
}

double symplectic_residual(const Mat& S) {
    const int m = static_cast<int>(S.rows() / 2);
    const Mat J = symplectic_form(m);
    return (S * J * S.transpose() - J).cwiseAbs().maxCoeff();
}

Mat BlochMessiahDecomposition::K() const {
    const int m = static_cast<int>(squeezing.size());
    Vec d(2 * m);
    for (int i = 0; i < m; ++i) {
        d(i) = squeezing[i];
        d(m + i) = 1.0 / squeezing[i];
    }
    return d.asDiagonal();
}

BlochMessiahDecomposition bloch_messiah(const Mat& S) {
    require_square_even(S, "bloch_messiah");
    const int m = static_cast<int>(S.rows() / 2);
    const double res = symplectic_residual(S);
    if (!(res <= 1e-9 * std::max(1.0, S.squaredNorm() / (2 * m)))) {
        std::ostringstream os;
        os << "bloch_messiah: matrix is not symplectic (residual " << res << ")";
        throw ValidationError(os.str());
    }
    // Polar decomposition S = P U from the SVD S = W diag(sigma) X^t.
    Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat& W = svd.matrixU();
    const Vec& sigma = svd.singularValues(); // descending
    const Mat U = W * svd.matrixV().transpose();
    std::vector<double> values(sigma.data(), sigma.data() + 2 * m);
    auto [E, F] = pair_up(W, values, m, 1e-9 * std::max(1.0, sigma(0)),
                          [](const Vec& e) -> Vec { return apply_J(e); });
    BlochMessiahDecomposition out;
    out.O1.resize(2 * m, 2 * m);
    out.O1.leftCols(m) = E;
    out.O1.rightCols(m) = F;
    const Mat P = W * sigma.asDiagonal() * W.transpose();
    out.squeezing.resize(m);
    for (int i = 0; i < m; ++i) out.squeezing[i] = std::max(1.0, E.col(i).dot(P * E.col(i)));
    out.O2 = out.O1.transpose() * U;
    return out;
}

Mat passive_from_unitary(const Eigen::MatrixXcd& U) {
    const Eigen::Index m = U.rows();
    Mat O(2 * m, 2 * m);
    O.topLeftCorner(m, m) = U.real();
    O.topRightCorner(m, m) = -U.imag();
    O.bottomLeftCorner(m, m) = U.imag();
    O.bottomRightCorner(m, m) = U.real();
    return O;
}

Mat random_passive(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
    Eigen::MatrixXcd Z(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) Z(i, j) = {normal(rng), normal(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
    Eigen::MatrixXcd Q = qr.householderQ();
    const Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j) {
        const std::complex<double> r = R(j, j);
        if (std::abs(r) > 0.0) Q.col(j) *= r / std::abs(r);
    }
    return passive_from_unitary(Q);
}

double db_to_squeezing(double db) { return std::pow(10.0, db / 20.0); }
double squeezing_to_db(double k) { return 20.0 * std::log10(k); }

namespace {

Mat squeezer(std::span<const double> squeezing_db) {
    const int m = static_cast<int>(squeezing_db.size());
    Vec d(2 * m);
    for (int i = 0; i < m; ++i) {
        d(i) = db_to_squeezing(squeezing_db[i]);
        d(m + i) = 1.0 / d(i);
    }
    return d.asDiagonal();
}

} // namespace

CovarianceMatrix random_pure_squeezed_cov(int m, std::span<const double> squeezing_db,
                                          std::uint64_t seed) {
    if (m < 1) throw std::domain_error("random_pure_squeezed_cov: m must be at least 1");
    if (static_cast<int>(squeezing_db.size()) != m)
        throw DimensionError("random_pure_squeezed_cov: need one squeezing value per mode");
    std::mt19937_64 rng(seed);
    const Mat S = random_passive(m, rng) * squeezer(squeezing_db);
    Mat V = S * S.transpose();
    return CovarianceMatrix(0.5 * (V + V.transpose()));
}

CovarianceMatrix random_mixed_cov(int m, std::span<const double> squeezing_db,
                                  std::span<const double> nu, std::uint64_t seed) {
    if (static_cast<int>(nu.size()) != m || static_cast<int>(squeezing_db.size()) != m)
        throw DimensionError("random_mixed_cov: need one squeezing and one nu per mode");
    std::mt19937_64 rng(seed);
    const Mat O = random_passive(m, rng);
    const Mat O2 = random_passive(m, rng);
    Vec d(2 * m);
    for (int i = 0; i < m; ++i) d(i) = d(m + i) = nu[i];
    const Mat S = O * squeezer(squeezing_db) * O2;
    Mat V = S * d.asDiagonal() * S.transpose();
    return CovarianceMatrix(0.5 * (V + V.transpose()));
}

double wigner_gaussian(const CovarianceMatrix& cov, const Vec& beta) {
    if (beta.size() != cov.dim()) throw DimensionError("wigner_gaussian: dimension mismatch");
    Eigen::LLT<Mat> llt(cov.matrix());
    if (llt.info() != Eigen::Success) throw NumericError("wigner_gaussian: singular covariance");
    const Vec z = beta - cov.mean();
    const double quad = z.dot(llt.solve(z));
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const int m = cov.modes();
    return std::exp(-0.5 * quad - 0.5 * logdet - m * std::log(2.0 * std::numbers::pi));
}

double purity_gaussian(const CovarianceMatrix& cov) {
    return 1.0 / std::sqrt(cov.matrix().determinant());
}

CovarianceMatrix reduce_gaussian(const CovarianceMatrix& cov, const ModeVector& g) {
    if (g.dim() != cov.dim()) throw DimensionError("reduce_gaussian: dimension mismatch");
    Mat B(cov.dim(), 2);
    B.col(0) = g.coords();
    B.col(1) = apply_J(g.coords());
    Mat R = B.transpose() * cov.matrix() * B;
    R = 0.5 * (R + R.transpose()).eval();
    return CovarianceMatrix(R, B.transpose() * cov.mean());
}

} // namespace nongauss
