#pragma once

// Optical phase space conventions.
//
// Coordinates are ordered xxpp: (x_1 ... x_m, p_1 ... p_m), in units where
// the vacuum quadrature variance is one. The symplectic form acts as
// J(x, p) = (-p, x), so J^2 = -1 and [Q(f1), Q(f2)] = -2i (f1, J f2).

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace nongauss {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A normalized 2m-vector labelling a single optical mode.
class ModeVector {
public:
    /// Validates length and norm. Inputs within 1e-9 of unit norm are
    /// renormalized; anything further off throws ValidationError.
    explicit ModeVector(Vec coords);

    const Vec& coords() const noexcept { return coords_; }
    int modes() const noexcept { return static_cast<int>(coords_.size() / 2); }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }

    /// The symplectic partner Jg, itself a mode vector.
    ModeVector partner() const;

    /// Unit vector along phase-space axis `axis` of a 2m-dimensional space.
    static ModeVector axis(int m, int axis);

private:
    Vec coords_;
};

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kRenormalizeTolerance = 1e-9;

Vec apply_J(const Vec& f);

/// Dense 2m x 2m matrix of J.
Mat symplectic_form(int m);

/// P_g + P_{Jg}: the rank-2 orthogonal projector onto span{g, Jg}.
Mat mode_projector(const ModeVector& g);

/// Uniformly random mode: i.i.d. standard normal components, normalized.
ModeVector random_mode(int m, std::uint64_t seed);
ModeVector random_mode(int m, std::mt19937_64& rng);

/// Orthonormal symplectic basis whose first mode is g.
///
/// Columns are (h_1 ... h_m, Jh_1 ... Jh_m) with h_1 = g, so the returned
/// matrix T is orthogonal and satisfies T^t J T = J in xxpp ordering.
Mat complete_symplectic_basis(const ModeVector& g);

} // namespace nongauss
