#pragma once

#include "nongauss/phase_space.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nongauss {

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kPhysicalityTolerance = 1e-9;

/// Symplectic eigenvalues of a symmetric positive-definite matrix, one per
/// mode, sorted descending. No physicality check.
std::vector<double> symplectic_spectrum(const Mat& V);

/// Symplectic spectrum of V; throws PhysicalityError if any value is below
/// 1 - 1e-9 and ValidationError if V is not square, even-sized, symmetric.
std::vector<double> validate(const Mat& V);

/// Quadrature covariance matrix (vacuum = identity) plus a displacement.
///
/// Construction validates symmetry and physicality; the object is immutable.
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Mat V, Vec mean = Vec());

    static CovarianceMatrix vacuum(int m);
    static CovarianceMatrix thermal(int m, double nu);

    const Mat& matrix() const noexcept { return V_; }
    const Vec& mean() const noexcept { return mean_; }
    int modes() const noexcept { return static_cast<int>(V_.rows() / 2); }
    int dim() const noexcept { return static_cast<int>(V_.rows()); }
    const std::vector<double>& symplectic_eigenvalues() const noexcept { return nu_; }

    /// True when every symplectic eigenvalue is within `tol` of one.
    bool is_pure(double tol = 1e-6) const;

    CovarianceMatrix with_mean(Vec mean) const;

private:
    Mat V_;
    Vec mean_;
    std::vector<double> nu_;
};

struct WilliamsonDecomposition {
    Mat S;                  ///< symplectic, V = S diag(nu, nu) S^t
    std::vector<double> nu; ///< descending

    Mat normal_form() const;
};

WilliamsonDecomposition williamson(const CovarianceMatrix& V);

struct BlochMessiahDecomposition {
    Mat O1;                        ///< passive; column pair (i, m+i) is supermode i
    std::vector<double> squeezing; ///< k_i >= 1, descending
    Mat O2;

    /// diag(k_1 ... k_m, 1/k_1 ... 1/k_m)
    Mat K() const;
};

/// S = O1 K O2 for a symplectic S.
BlochMessiahDecomposition bloch_messiah(const Mat& S);

/// Residual max|S J S^t - J|.
double symplectic_residual(const Mat& S);

/// Orthogonal symplectic image of an m x m unitary: [[Re U, -Im U], [Im U, Re U]].
Mat passive_from_unitary(const Eigen::MatrixXcd& U);

/// Haar-random passive (orthogonal symplectic) transformation.
Mat random_passive(int m, std::mt19937_64& rng);

/// Pure state O K^2 O^t with Haar-random passive O and squeezers given in dB
/// (k = 10^(dB/20)).
CovarianceMatrix random_pure_squeezed_cov(int m, std::span<const double> squeezing_db,
                                          std::uint64_t seed);

/// Same construction with thermal symplectic eigenvalues nu_i >= 1 inserted
/// between the squeezers: V = S diag(nu, nu) S^t.
CovarianceMatrix random_mixed_cov(int m, std::span<const double> squeezing_db,
                                  std::span<const double> nu, std::uint64_t seed);

/// Wigner function of the Gaussian state at beta.
double wigner_gaussian(const CovarianceMatrix& V, const Vec& beta);

/// (det V)^(-1/2).
double purity_gaussian(const CovarianceMatrix& V);

/// 2x2 covariance of mode g in the (g, Jg) plane.
CovarianceMatrix reduce_gaussian(const CovarianceMatrix& V, const ModeVector& g);

double db_to_squeezing(double db);
double squeezing_to_db(double k);

} // namespace nongauss
