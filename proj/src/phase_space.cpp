#include "nongauss/phase_space.hpp"

#include "nongauss/errors.hpp"

#include <cmath>
#include <string>

namespace nongauss {

ModeVector::ModeVector(Vec coords) : coords_(std::move(coords)) {
    if (coords_.size() == 0 || coords_.size() % 2 != 0)
        throw DimensionError("mode vector needs even, nonzero length; got " +
                             std::to_string(coords_.size()));
    const double norm = coords_.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kRenormalizeTolerance)
        throw ValidationError("mode vector is not normalized (norm " + std::to_string(norm) + ")");
    if (std::abs(norm - 1.0) > kNormTolerance) coords_ /= norm;
}

ModeVector ModeVector::partner() const { return ModeVector(apply_J(coords_)); }

ModeVector ModeVector::axis(int m, int axis) {
    if (m < 1 || axis < 0 || axis >= 2 * m) throw DimensionError("axis out of range");
    Vec e = Vec::Zero(2 * m);
    e(axis) = 1.0;
    return ModeVector(std::move(e));
}

Vec apply_J(const Vec& f) {
    if (f.size() % 2 != 0)
        throw DimensionError("apply_J: odd length " + std::to_string(f.size()));
    const Eigen::Index m = f.size() / 2;
    Vec out(f.size());
    out.head(m) = -f.tail(m);
    out.tail(m) = f.head(m);
    return out;
}

Mat symplectic_form(int m) {
    if (m < 1) throw DimensionError("symplectic_form: m must be positive");
    Mat J = Mat::Zero(2 * m, 2 * m);
    J.topRightCorner(m, m) = -Mat::Identity(m, m);
    J.bottomLeftCorner(m, m) = Mat::Identity(m, m);
    return J;
}

Mat mode_projector(const ModeVector& g) {
    const Vec& v = g.coords();
    const Vec jv = apply_J(v);
    return v * v.transpose() + jv * jv.transpose();
}

ModeVector random_mode(int m, std::mt19937_64& rng) {
    if (m < 1) throw std::domain_error("random_mode: m must be at least 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(2 * m);
    do {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    } while (v.norm() == 0.0);
    return ModeVector(v / v.norm());
}

ModeVector random_mode(int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_mode(m, rng);
}

Mat complete_symplectic_basis(const ModeVector& g) {
    const int m = g.modes();
    const int n = 2 * m;
    Mat T = Mat::Zero(n, n);
    T.col(0) = g.coords();
    T.col(m) = apply_J(g.coords());

    // Greedy Gram-Schmidt over the standard axes. The span built so far is
    // J-invariant, so h orthogonal to it implies Jh is too.
    for (int k = 1; k < m; ++k) {
        Vec best;
        double best_norm = -1.0;
        for (int a = 0; a < n; ++a) {
            Vec h = Vec::Unit(n, a);
            for (int j = 0; j < k; ++j) {
                h -= T.col(j).dot(h) * T.col(j);
                h -= T.col(m + j).dot(h) * T.col(m + j);
            }
            const double nrm = h.norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = h;
            }
        }
        best /= best_norm;
        // second pass for orthogonality at machine precision
        for (int j = 0; j < k; ++j) {
            best -= T.col(j).dot(best) * T.col(j);
            best -= T.col(m + j).dot(best) * T.col(m + j);
        }
        best.normalize();
        T.col(k) = best;
        T.col(m + k) = apply_J(best);
    }
    return T;
}

} // namespace nongauss
