#include "nongauss/fock_oracle.hpp"

#include "nongauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace nongauss::fock {

namespace {

using CMat = Eigen::MatrixXcd;
using CMatRow = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

int digit(std::size_t index, std::size_t stride, int dim) {
    return static_cast<int>((index / stride) % static_cast<std::size_t>(dim));
}

// Squeezed vacuum with quadrature variances (k^2, 1/k^2): only even photon
// numbers, amplitude of |2n> = tanh(s)^n sqrt((2n)!) / (2^n n! sqrt(cosh s)),
// s = ln k. Returned as probabilities up to n_max when `probabilities` is set.
std::vector<double> squeezed_vacuum(double k, int n_max, bool probabilities) {
    const double s = std::log(k);
    const double th = std::tanh(s);
    std::vector<double> out(n_max, 0.0);
    const double log_pre = -0.5 * std::log(std::cosh(s));
    for (int n = 0; 2 * n < n_max; ++n) {
        double amp;
        if (n == 0) {
            amp = std::exp(log_pre);
        } else if (th == 0.0) {
            amp = 0.0;
        } else {
            const double log_mag = log_pre + n * std::log(std::abs(th)) +
                                   0.5 * std::lgamma(2.0 * n + 1.0) - n * std::numbers::ln2 -
                                   std::lgamma(n + 1.0);
            amp = std::exp(log_mag) * ((th < 0.0 && n % 2 == 1) ? -1.0 : 1.0);
        }
        out[2 * n] = probabilities ? amp * amp : amp;
    }
    return out;
}

// Distribution of the total photon number of independent squeezed vacua.
std::vector<double> total_distribution(const std::vector<double>& ks) {
    double worst = 1.0;
    for (double k : ks) worst = std::max(worst, k);
    const double th2 = std::pow(std::tanh(std::log(worst)), 2);
    // per-mode tail below 1e-40 past n_max
    int n_max = 64;
    if (th2 > 0.0) n_max = std::max(n_max, static_cast<int>(2.0 * std::log(1e-40) / std::log(th2)) + 8);
    std::vector<double> total{1.0};
    for (double k : ks) {
        const std::vector<double> p = squeezed_vacuum(k, n_max, true);
        std::vector<double> next(total.size() + p.size() - 1, 0.0);
        for (std::size_t a = 0; a < total.size(); ++a)
            for (std::size_t b = 0; b < p.size(); ++b) next[a + b] += total[a] * p[b];
        total.swap(next);
    }
    return total;
}

double tail_from(const std::vector<double>& dist, int cutoff) {
    double t = 0.0;
    for (std::size_t n = dist.size(); n-- > static_cast<std::size_t>(std::max(cutoff, 0));) t += dist[n];
    return t;
}

int cutoff_for(const std::vector<double>& dist, double tol) {
    for (int c = 1; c <= static_cast<int>(dist.size()); ++c)
        if (tail_from(dist, c) < tol) return c;
    return static_cast<int>(dist.size());
}

std::vector<double> squeezing_values(const CovarianceMatrix& V) {
    if (V.modes() > kMaxModes)
        throw DimensionError("Fock oracle supports at most " + std::to_string(kMaxModes) + " modes");
    if (!V.is_pure(1e-6)) throw MixedStateError("Fock oracle needs a pure Gaussian state");
    return bloch_messiah(williamson(V).S).squeezing;
}

// out = T applied along `axis` (T is dim x dim).
FockState apply_axis(const FockState& in, const CMat& T, int axis) {
    FockState out(in.modes, in.dim);
    const std::size_t inner = in.stride(axis);
    const std::size_t outer = ipow(in.dim, axis);
    const std::size_t block = inner * static_cast<std::size_t>(in.dim);
    for (std::size_t a = 0; a < outer; ++a) {
        Eigen::Map<const CMatRow> src(in.amplitudes.data() + a * block, in.dim, inner);
        Eigen::Map<CMatRow> dst(out.amplitudes.data() + a * block, in.dim, inner);
        dst.noalias() = T * src;
    }
    out.leakage = in.leakage;
    return out;
}

// Two-mode passive transformation exp(i G) with G = sum_ab H_ab a_a^dagger a_b
// over modes (j, k), applied on each fixed photon-number block of the pair.
void apply_pair(FockState& state, int j, int k, const Eigen::Matrix2cd& H) {
    const int dim = state.dim;
    const std::size_t sj = state.stride(j), sk = state.stride(k);
    // base indices: all entries with n_j = n_k = 0
    std::vector<std::size_t> bases;
    for (std::size_t idx = 0; idx < state.size(); ++idx)
        if (digit(idx, sj, dim) == 0 && digit(idx, sk, dim) == 0) bases.push_back(idx);

    std::vector<cplx> v;
    for (int N = 1; N < dim; ++N) {
        CMat G = CMat::Zero(N + 1, N + 1);
        for (int p = 0; p <= N; ++p) {
            G(p, p) = H(0, 0) * double(p) + H(1, 1) * double(N - p);
            if (p < N) G(p + 1, p) = H(0, 1) * std::sqrt(double(p + 1) * (N - p));
            if (p > 0) G(p - 1, p) = H(1, 0) * std::sqrt(double(p) * (N - p + 1));
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (G + G.adjoint()));
        Eigen::VectorXcd phases(N + 1);
        for (int i = 0; i <= N; ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
        const CMat E = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        Eigen::VectorXcd in(N + 1), out(N + 1);
        for (std::size_t base : bases) {
            for (int p = 0; p <= N; ++p) in(p) = state.amplitudes[base + p * sj + (N - p) * sk];
            if (in.squaredNorm() == 0.0) continue;
            out.noalias() = E * in;
            for (int p = 0; p <= N; ++p) state.amplitudes[base + p * sj + (N - p) * sk] = out(p);
        }
    }
}

Eigen::Matrix2cd hermitian_log(const Eigen::Matrix2cd& w) {
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(w);
    const Eigen::Matrix2cd& Q = schur.matrixU();
    Eigen::Vector2cd d;
    for (int i = 0; i < 2; ++i) d(i) = std::arg(schur.matrixT()(i, i));
    return Q * d.asDiagonal() * Q.adjoint();
}

// Q(f) psi for quadrature direction f, truncating anything pushed past dim.
FockState apply_quadrature(const FockState& in, const Vec& f) {
    const int m = in.modes;
    FockState out(m, in.dim);
    for (int j = 0; j < m; ++j) {
        const cplx c(f(j), -f(m + j));
        const std::size_t s = in.stride(j);
        for (std::size_t idx = 0; idx < in.size(); ++idx) {
            const int nj = digit(idx, s, in.dim);
            cplx acc = 0.0;
            if (nj + 1 < in.dim) acc += c * std::sqrt(double(nj + 1)) * in.amplitudes[idx + s];
            if (nj > 0) acc += std::conj(c) * std::sqrt(double(nj)) * in.amplitudes[idx - s];
            out.amplitudes[idx] += acc;
        }
    }
    return out;
}

cplx inner(const FockState& a, const FockState& b) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return acc;
}

void normalize(FockState& s) {
    const double n = std::sqrt(s.norm2());
    for (cplx& a : s.amplitudes) a /= n;
}

} // namespace

FockState::FockState(int modes_, int dim_) : modes(modes_), dim(dim_) {
    if (modes < 1 || modes > kMaxModes)
        throw DimensionError("FockState: modes must be in 1.." + std::to_string(kMaxModes));
    if (dim < 1) throw DimensionError("FockState: dimension must be positive");
    amplitudes.assign(ipow(dim, modes), cplx(0.0));
}

std::size_t FockState::stride(int mode) const noexcept { return ipow(dim, modes - 1 - mode); }

double FockState::norm2() const noexcept {
    double s = 0.0;
    for (const cplx& a : amplitudes) s += std::norm(a);
    return s;
}

cplx& FockState::at(std::span<const int> n) {
    std::size_t idx = 0;
    for (int j = 0; j < modes; ++j) idx += static_cast<std::size_t>(n[j]) * stride(j);
    return amplitudes.at(idx);
}

cplx FockState::at(std::span<const int> n) const {
    std::size_t idx = 0;
    for (int j = 0; j < modes; ++j) idx += static_cast<std::size_t>(n[j]) * stride(j);
    return amplitudes.at(idx);
}

FockState FockState::padded(int new_dim) const {
    if (new_dim < dim) throw DimensionError("FockState::padded: cannot shrink");
    FockState out(modes, new_dim);
    out.leakage = leakage;
    for (std::size_t idx = 0; idx < size(); ++idx) {
        std::size_t target = 0;
        for (int j = 0; j < modes; ++j)
            target += static_cast<std::size_t>(digit(idx, stride(j), dim)) * out.stride(j);
        out.amplitudes[target] = amplitudes[idx];
    }
    return out;
}

FockState vacuum(int modes, int cutoff) {
    FockState s(modes, cutoff);
    s.amplitudes[0] = 1.0;
    return s;
}

int suggest_cutoff(const CovarianceMatrix& V, double leakage_tol) {
    return cutoff_for(total_distribution(squeezing_values(V)), leakage_tol);
}

FockState apply_passive(const FockState& state, const Eigen::MatrixXcd& U) {
    const int m = state.modes;
    if (U.rows() != m || U.cols() != m) throw DimensionError("apply_passive: unitary size mismatch");
    // Reduce U to a diagonal D with two-mode rotations: G_L ... G_1 U = D,
    // hence U = G_1^dagger ... G_L^dagger D.
    CMat work = U;
    struct Rotation {
        int j, k;
        Eigen::Matrix2cd g;
    };
    std::vector<Rotation> rotations;
    for (int c = 0; c + 1 < m; ++c) {
        for (int r = m - 1; r > c; --r) {
            const cplx a = work(r - 1, c), b = work(r, c);
            const double rho = std::hypot(std::abs(a), std::abs(b));
            if (std::abs(b) == 0.0 || rho == 0.0) continue;
            Eigen::Matrix2cd g;
            g << std::conj(a) / rho, std::conj(b) / rho, -b / rho, a / rho;
            Eigen::Matrix<cplx, 2, Eigen::Dynamic> rows(2, m);
            rows.row(0) = work.row(r - 1);
            rows.row(1) = work.row(r);
            rows = (g * rows).eval();
            work.row(r - 1) = rows.row(0);
            work.row(r) = rows.row(1);
            rotations.push_back({r - 1, r, g});
        }
    }
    FockState out = state;
    // diagonal phases: |n> -> prod d_j^{n_j} |n>
    for (int j = 0; j < m; ++j) {
        const cplx d = work(j, j) / std::abs(work(j, j));
        const std::size_t s = out.stride(j);
        std::vector<cplx> powers(out.dim, 1.0);
        for (int n = 1; n < out.dim; ++n) powers[n] = powers[n - 1] * d;
        for (std::size_t idx = 0; idx < out.size(); ++idx) out.amplitudes[idx] *= powers[digit(idx, s, out.dim)];
    }
    for (auto it = rotations.rbegin(); it != rotations.rend(); ++it)
        apply_pair(out, it->j, it->k, hermitian_log(it->g.adjoint()));
    return out;
}

FockState build_gaussian_fock(const CovarianceMatrix& V, int cutoff, double leakage_tol) {
    const std::vector<double> ks = squeezing_values(V);
    for (double k : ks) {
        if (std::log(k) > kMaxSqueezingNats + 1e-12) {
            std::ostringstream os;
            os << "build_gaussian_fock: squeezing " << std::log(k) << " nats exceeds "
               << kMaxSqueezingNats;
            throw std::domain_error(os.str());
        }
    }
    if (!V.mean().isZero(0.0))
        throw ValidationError("build_gaussian_fock: use displace() for displaced states");
    const std::vector<double> dist = total_distribution(ks);
    const double leak = tail_from(dist, cutoff);
    if (leak > leakage_tol) {
        std::ostringstream os;
        os << "Fock cutoff " << cutoff << " discards probability " << leak << " > " << leakage_tol
           << "; use cutoff >= " << cutoff_for(dist, leakage_tol);
        throw CutoffError(os.str(), leak, cutoff_for(dist, leakage_tol));
    }

    const int m = V.modes();
    std::vector<std::vector<double>> amps;
    for (double k : ks) amps.push_back(squeezed_vacuum(k, cutoff, false));
    FockState product(m, cutoff);
    for (std::size_t idx = 0; idx < product.size(); ++idx) {
        int total = 0;
        double a = 1.0;
        for (int j = 0; j < m; ++j) {
            const int nj = digit(idx, product.stride(j), cutoff);
            total += nj;
            a *= amps[j][nj];
        }
        if (total < cutoff) product.amplitudes[idx] = a;
    }
    product.leakage = leak;
    normalize(product);

    const BlochMessiahDecomposition bm = bloch_messiah(williamson(V).S);
    CMat U(m, m);
    U.real() = bm.O1.topLeftCorner(m, m);
    U.imag() = bm.O1.bottomLeftCorner(m, m);
    FockState out = apply_passive(product, U);
    normalize(out);
    return out;
}

Eigen::MatrixXcd displacement_matrix(cplx gamma, int rows, int cols) {
    // Along each diagonal k = |r - c| with n = min(r, c):
    //   <r|D|c> = e^{-|g|^2/2} z^k t_n,  t_n = sqrt(n!/(n+k)!) L_n^(k)(|g|^2),
    // z = g below the diagonal and -g* above. The normalized Laguerre recurrence
    //   t_{n+1} = ((2n+1+k-x) t_n - sqrt(n(n+k)) t_{n-1}) / sqrt((n+1)(n+k+1))
    // stays accurate where the two-term recurrence in (r, c) does not.
    const double x = std::norm(gamma);
    CMat D = CMat::Zero(rows, cols);
    const int kmax = std::max(rows, cols);
    for (int k = 0; k < kmax; ++k) {
        for (int side = 0; side < (k == 0 ? 1 : 2); ++side) {
            const bool below = side == 0;
            const int len = below ? std::min(rows - k, cols) : std::min(rows, cols - k);
            if (len <= 0) continue;
            const cplx z = below ? gamma : -std::conj(gamma);
            cplx base;
            if (k == 0) {
                base = std::exp(-0.5 * x);
            } else if (x == 0.0) {
                continue;
            } else {
                base = std::polar(std::exp(-0.5 * x + 0.5 * k * std::log(x) - 0.5 * std::lgamma(k + 1.0)),
                                  k * std::arg(z));
            }
            double prev = 0.0, cur = 1.0;
            for (int n = 0; n < len; ++n) {
                const cplx v = base * cur;
                if (below) D(n + k, n) = v;
                else D(n, n + k) = v;
                const double next =
                    ((2.0 * n + 1.0 + k - x) * cur - std::sqrt(double(n) * (n + k)) * prev) /
                    std::sqrt((n + 1.0) * (n + k + 1.0));
                prev = cur;
                cur = next;
            }
        }
    }
    return D;
}

FockState displace(const FockState& state, const Vec& xi, int cutoff, double leakage_tol) {
    const int m = state.modes;
    if (xi.size() != 2 * m) throw DimensionError("displace: dimension mismatch");
    FockState out = state.padded(std::max(cutoff, state.dim));
    const double before = out.norm2();
    for (int j = 0; j < m; ++j) {
        const cplx gamma(0.5 * xi(j), 0.5 * xi(m + j));
        out = apply_axis(out, displacement_matrix(gamma, out.dim, out.dim), j);
    }
    const double leak = std::max(0.0, 1.0 - out.norm2() / before);
    if (leak > leakage_tol) {
        std::ostringstream os;
        os << "displace: cutoff " << out.dim << " discards probability " << leak;
        throw CutoffError(os.str(), leak, out.dim + 8);
    }
    out.leakage = state.leakage + leak;
    normalize(out);
    return out;
}

PhotonOpResult apply_photon_op_fock(const FockState& state, const PhotonOp& op) {
    const int m = state.modes;
    if (op.mode.dim() != 2 * m) throw DimensionError("apply_photon_op_fock: dimension mismatch");
    const Vec& g = op.mode.coords();
    const bool add = op.kind == PhotonOpKind::add;
    const FockState in = add ? state.padded(state.dim + 1) : state;
    FockState out(m, in.dim);
    out.leakage = state.leakage;
    for (int j = 0; j < m; ++j) {
        const cplx c(g(j), -g(m + j)); // a(g) = sum_j c_j a_j
        const std::size_t s = in.stride(j);
        for (std::size_t idx = 0; idx < in.size(); ++idx) {
            const int nj = digit(idx, s, in.dim);
            if (add) {
                if (nj > 0) out.amplitudes[idx] += std::conj(c) * std::sqrt(double(nj)) * in.amplitudes[idx - s];
            } else if (nj + 1 < in.dim) {
                out.amplitudes[idx] += c * std::sqrt(double(nj + 1)) * in.amplitudes[idx + s];
            }
        }
    }
    const double n2 = out.norm2();
    if (n2 < 1e-12)
        throw UndefinedSubtraction("photon operation annihilates the state (zero norm)");
    normalize(out);
    return {std::move(out), n2};
}

double wigner_from_fock(const FockState& state, const Vec& beta) {
    const int m = state.modes;
    if (beta.size() != 2 * m) throw DimensionError("wigner_from_fock: dimension mismatch");
    FockState phi = state;
    for (int j = 0; j < m; ++j) {
        CMat T = displacement_matrix(cplx(beta(j), beta(m + j)), state.dim, state.dim);
        for (int c = 1; c < state.dim; c += 2) T.col(c) *= -1.0; // parity
        phi = apply_axis(phi, T, j);
    }
    return inner(state, phi).real() / std::pow(2.0 * std::numbers::pi, m);
}

Vec mean_from_fock(const FockState& state) {
    const int m = state.modes;
    const FockState psi = state.padded(state.dim + 1);
    Vec mean(2 * m);
    for (int a = 0; a < 2 * m; ++a)
        mean(a) = inner(psi, apply_quadrature(psi, Vec::Unit(2 * m, a))).real();
    return mean;
}

Mat covariance_from_fock(const FockState& state) {
    const int m = state.modes;
    const FockState psi = state.padded(state.dim + 2);
    std::vector<FockState> q;
    Vec mean(2 * m);
    for (int a = 0; a < 2 * m; ++a) {
        q.push_back(apply_quadrature(psi, Vec::Unit(2 * m, a)));
        mean(a) = inner(psi, q.back()).real();
    }
    Mat V(2 * m, 2 * m);
    for (int a = 0; a < 2 * m; ++a)
        for (int b = a; b < 2 * m; ++b) V(a, b) = V(b, a) = inner(q[a], q[b]).real() - mean(a) * mean(b);
    return V;
}

double photon_number_from_fock(const FockState& state, const ModeVector& g) {
    return apply_photon_op_fock(state, PhotonOp{PhotonOpKind::subtract, g}).norm2;
}

namespace {

// Q(f_seq[0]) ... Q(f_seq[last]) psi, memoized over sequences.
class OperatorChains {
public:
    OperatorChains(const FockState& psi, std::span<const Vec> fs) : psi_(psi), fs_(fs) {}

    const FockState& chain(const std::vector<int>& seq) {
        if (seq.empty()) return psi_;
        auto it = cache_.find(seq);
        if (it != cache_.end()) return it->second;
        const std::vector<int> tail(seq.begin() + 1, seq.end());
        FockState next = apply_quadrature(chain(tail), fs_[seq.front()]);
        return cache_.emplace(seq, std::move(next)).first->second;
    }

private:
    const FockState& psi_;
    std::span<const Vec> fs_;
    std::map<std::vector<int>, FockState> cache_;
};

double symmetrized(OperatorChains& chains, std::vector<int> idx) {
    if (idx.empty()) return 1.0;
    std::sort(idx.begin(), idx.end());
    const std::size_t h = idx.size() / 2;
    double sum = 0.0;
    long count = 0;
    do {
        std::vector<int> left(idx.begin(), idx.begin() + h);
        std::reverse(left.begin(), left.end());
        const std::vector<int> right(idx.begin() + h, idx.end());
        sum += inner(chains.chain(left), chains.chain(right)).real();
        ++count;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return sum / count;
}

void check_order(const FockState& state, std::span<const Vec> fs, const char* who) {
    if (fs.size() > static_cast<std::size_t>(kMaxCumulantOrder))
        throw CapacityError(std::string(who) + ": order limited to " + std::to_string(kMaxCumulantOrder));
    for (const Vec& f : fs)
        if (f.size() != 2 * state.modes) throw DimensionError(std::string(who) + ": dimension mismatch");
}

} // namespace

double symmetrized_moment(const FockState& state, std::span<const Vec> fs) {
    check_order(state, fs, "symmetrized_moment");
    const FockState psi = state.padded(state.dim + 3);
    OperatorChains chains(psi, fs);
    std::vector<int> idx(fs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return symmetrized(chains, idx);
}

double cumulants_from_fock(const FockState& state, std::span<const Vec> fs) {
    check_order(state, fs, "cumulants_from_fock");
    const int n = static_cast<int>(fs.size());
    if (n == 0) return 0.0;
    const FockState psi = state.padded(state.dim + 3);
    OperatorChains chains(psi, fs);
    const unsigned full = (1u << n) - 1u;
    std::vector<double> moment(full + 1u), kappa(full + 1u, 0.0);
    for (unsigned set = 0; set <= full; ++set) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (set & (1u << i)) idx.push_back(i);
        moment[set] = symmetrized(chains, idx);
    }
    // m(S) = sum over blocks B containing min(S) of kappa(B) m(S \ B)
    for (unsigned set = 1; set <= full; ++set) {
        const unsigned low = set & (~set + 1u);
        const unsigned rest = set & ~low;
        double acc = moment[set];
        for (unsigned sub = rest; sub; sub = (sub - 1u) & rest) {
            const unsigned block = low | sub;
            if (block == set) continue;
            acc -= kappa[block] * moment[set & ~block];
        }
        // block = {low} alone
        if (rest != 0u) acc -= kappa[low] * moment[rest];
        kappa[set] = acc;
    }
    return kappa[full];
}

} // namespace nongauss::fock
