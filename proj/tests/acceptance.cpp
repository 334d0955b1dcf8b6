// Acceptance battery: one PASS/FAIL line per criterion.

#include "nongauss/analysis.hpp"
#include "nongauss/commands.hpp"
#include "nongauss/errors.hpp"
#include "nongauss/fock_oracle.hpp"
#include "nongauss/io.hpp"

#include "support/cases.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>

using namespace nongauss;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Random pure state with every squeezer at most `nats`.
CovarianceMatrix capped_state(int m, std::uint64_t seed, double nats) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> db(m);
    for (double& d : db) d = squeezing_to_db(std::exp(nats * u(rng)));
    return random_pure_squeezed_cov(m, db, seed);
}

struct OracleCase {
    CovarianceMatrix V;
    PhotonOp op;
    fock::FockState psi;
};

std::vector<OracleCase> oracle_cases() {
    std::vector<OracleCase> out;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const int m = s < 25 ? 1 : 2;
        const CovarianceMatrix V = capped_state(m, 7000 + s, 1.0);
        const PhotonOp op{cases::kind_of(s), random_mode(m, 8000 + s)};
        const fock::FockState base = fock::build_gaussian_fock(V, fock::suggest_cutoff(V, fock::kComparisonLeakage));
        out.push_back({V, op, fock::apply_photon_op_fock(base, op).state});
    }
    return out;
}

void criterion_1_and_2() {
    const auto t0 = Clock::now();
    const std::vector<OracleCase> cs = oracle_cases();
    double wdev = 0.0;
    for (std::size_t s = 0; s < cs.size(); ++s) {
        const auto& c = cs[s];
        const int n = c.V.dim();
        const PolyGaussianWigner W = wigner_nongaussian(c.V, c.op);
        // Grid in the mode plane for one mode; in a random plane for two.
        const Vec u = n == 2 ? Vec(Vec::Unit(2, 0)) : random_mode(2, 100 + s).coords();
        const Vec v = n == 2 ? Vec(Vec::Unit(2, 1)) : random_mode(2, 200 + s).coords();
        for (int a = 0; a < 21; ++a)
            for (int b = 0; b < 21; ++b) {
                const Vec beta = (-3.0 + 0.3 * a) * u + (-3.0 + 0.3 * b) * v;
                wdev = std::max(wdev, std::abs(evaluate_wigner(W, beta) - fock::wigner_from_fock(c.psi, beta)));
            }
    }
    const double t1 = seconds_since(t0);
    report(1, "oracle Wigner equivalence", wdev < 1e-8 && t1 < 120.0,
           "50 cases, max |dW| = " + num(wdev) + " (tol 1e-8), " + num(t1) + " s (limit 120 s)");

    double kdev = 0.0;
    for (std::size_t s = 0; s < cs.size(); ++s) {
        const auto& c = cs[s];
        const int m = c.V.modes();
        const Mat A = a_matrix(c.V, c.op);
        const Vec g = c.op.mode.coords();
        std::vector<std::vector<Vec>> sets = {std::vector<Vec>(4, g), std::vector<Vec>(6, g)};
        for (int order : {4, 6}) {
            std::vector<Vec> fs;
            for (int i = 0; i < order; ++i) fs.push_back(random_mode(m, 1000 * s + 10 * order + i).coords());
            sets.push_back(fs);
        }
        for (const auto& fs : sets)
            kdev = std::max(kdev, std::abs(truncated_correlation(A, fs) - fock::cumulants_from_fock(c.psi, fs)));
    }
    const fock::FockState one =
        fock::apply_photon_op_fock(fock::vacuum(1, 1), PhotonOp{PhotonOpKind::add, ModeVector::axis(1, 0)}).state;
    const std::vector<Vec> four(4, Vec::Unit(2, 0));
    const double k4 = fock::cumulants_from_fock(one, four);
    const double k4a = truncated_correlation(a_matrix(CovarianceMatrix::vacuum(1),
                                                      PhotonOp{PhotonOpKind::add, ModeVector::axis(1, 0)}),
                                             four);
    const bool fixed = std::abs(k4 + 12.0) < 1e-8 && std::abs(k4a + 12.0) < 1e-12;
    report(2, "cumulant equivalence", kdev < 1e-7 && fixed,
           "orders 4 and 6, max |dk| = " + num(kdev) + " (tol 1e-7); added vacuum k4 = " + num(k4) + " / " +
               num(k4a));
}

void criterion_3() {
    int disagree = 0, add_not_negative = 0, total = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const int m = 1 + static_cast<int>(s % 4);
        const CovarianceMatrix V = cases::random_state(m, 50000 + s, s % 2 == 0, 10.0, 3.0);
        const ModeVector g = random_mode(m, 60000 + s);
        for (PhotonOpKind k : {PhotonOpKind::add, PhotonOpKind::subtract}) {
            const PhotonOp op{k, g};
            const bool neg = negativity_witness(V, op).negative;
            const double w0 = wigner_at_origin(V, op);
            disagree += neg != (w0 < 0.0);
            if (k == PhotonOpKind::add) add_not_negative += !(neg && w0 < 0.0);
            ++total;
        }
    }
    report(3, "witness exactness", disagree == 0 && add_not_negative == 0,
           std::to_string(total) + " checks, " + std::to_string(disagree) + " disagreements, " +
               std::to_string(add_not_negative) + " non-negative additions");
}

void criterion_4() {
    double dev = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CovarianceMatrix V = cases::random_state(1, 900 + s, s % 2 == 1, 6.0, 1.5);
        const PhotonOp op{cases::kind_of(s), random_mode(1, 900 + s)};
        const PolyGaussianWigner W = wigner_nongaussian(V, op);
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
                const Vec beta{{-2.0 + a, -2.0 + b}};
                const double ft = oracle::fourier_wigner(
                    [&](const Vec& al) { return characteristic_fn(V, op, al); }, beta, 26.0, 0.12);
                dev = std::max(dev, std::abs(ft - evaluate_wigner(W, beta)));
            }
    }
    report(4, "Fourier consistency", dev < 1e-6, "10 cases x 25 points, max |dW| = " + num(dev) + " (tol 1e-6)");
}

void criterion_5() {
    int outside = 0;
    double worst_z = 0.0, worst_t = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto t0 = Clock::now();
        const CovarianceMatrix V = cases::random_state(1, 400 + s, true, 8.0, 2.0);
        const PhotonOp op{cases::kind_of(s), random_mode(1, 400 + s)};
        const PolyGaussianWigner W = wigner_nongaussian(V, op);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const Vec beta{{-1.0 + a, -1.0 + b}};
                const MixtureEstimate e = mixture_reconstruction(V, op, beta, 100000, 20240 + 10 * s + 3 * a + b);
                const double z = std::abs(e.value - evaluate_wigner(W, beta)) / e.std_error;
                worst_z = std::max(worst_z, z);
                outside += z > 3.0;
            }
        worst_t = std::max(worst_t, seconds_since(t0));
    }
    report(5, "decomposition self-consistency", outside == 0 && worst_t < 60.0,
           "5 states x 9 points, n = 1e5, max |z| = " + num(worst_z) + ", " + std::to_string(outside) +
               " beyond 3 SE, slowest state " + num(worst_t) + " s");
}

double quadrature_purity(const PolyGaussianWigner& W2) {
    const double L = 12.0 * std::sqrt(W2.cov.diagonal().maxCoeff()) + 4.0 * W2.mean.norm();
    return 4.0 * kPi *
           oracle::integrate2d(
               [&](double x, double y) {
                   const double w = evaluate_wigner(W2, Vec{{x, y}});
                   return w * w;
               },
               L, 0.05);
}

void criterion_6() {
    const ModeVector g = random_mode(3, 5);
    const PurityReport one = reduced_purities(CovarianceMatrix::vacuum(3), PhotonOp{PhotonOpKind::add, g});
    const double d1 = std::abs(one.mu - 1.0);

    double dq = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const int m = 1 + static_cast<int>(s % 3);
        const CovarianceMatrix V = cases::random_state(m, 1200 + s, s % 2 == 0, 8.0, 1.5);
        const PhotonOp op{cases::kind_of(s / 2), random_mode(m, 1300 + s)};
        const PolyGaussianWigner M = marginal_wigner(wigner_nongaussian(V, op), random_mode(m, 1400 + s));
        dq = std::max(dq, std::abs(purity_reduced(M) - quadrature_purity(M)));
    }

    double dg = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const int m = 1 + static_cast<int>(s % 4);
        const CovarianceMatrix V = cases::random_state(m, 1500 + s, s % 2 == 0);
        const ModeVector h = random_mode(m, 1600 + s);
        const double mu = purity_reduced(marginal_wigner(PolyGaussianWigner::gaussian(V), h));
        dg = std::max(dg, std::abs(mu - 1.0 / std::sqrt(reduce_gaussian(V, h).matrix().determinant())));
    }
    report(6, "purity pipeline", d1 < 1e-6 && dq < 1e-6 && dg < 1e-9,
           "added vacuum |mu - 1| = " + num(d1) + ", analytic vs quadrature " + num(dq) +
               " (100 cases), Gaussian baseline " + num(dg));
}

void criterion_7() {
    int witness_false = 0, purity_off = 0, total = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const int m = 2 + static_cast<int>(s % 3);
        const CovarianceMatrix V = cases::random_state(m, 2000 + s, false);
        for (int i = 0; i < m; ++i) {
            const ModeVector g = supermode(V, i);
            witness_false += !passive_separability_witness(V, g);
            if (mean_photon_number(V, g) > kScanMinPhotons) {
                const PurityReport r = reduced_purities(V, PhotonOp{PhotonOpKind::subtract, g});
                purity_off += std::abs(r.mu - r.mu0) > 1e-9;
            }
            ++total;
        }
    }

    const double db[] = {2.0, 5.0, 8.0, 11.0};
    const CovarianceMatrix V4 = random_pure_squeezed_cov(4, db, 77);
    int draws = 0, entangled = 0, lowered = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        int resampled = 0;
        const ModeVector g = draw_scan_mode(V4, PhotonOpKind::subtract, 31, i, resampled);
        ++draws;
        if (passive_separability_witness(V4, g)) continue;
        ++entangled;
        const PurityReport r = reduced_purities(V4, PhotonOp{PhotonOpKind::subtract, g});
        lowered += r.mu < r.mu0;
    }
    const double frac = entangled ? double(lowered) / entangled : 0.0;
    report(7, "passive separability", witness_false == 0 && purity_off == 0 && frac >= 0.95,
           std::to_string(total) + " supermodes (" + std::to_string(witness_false) + " witness failures, " +
               std::to_string(purity_off) + " purity mismatches); mu < mu0 in " + std::to_string(lowered) + "/" +
               std::to_string(entangled) + " entangling draws = " + num(frac));
}

void criterion_8() {
    bool rejected = false;
    try {
        a_matrix(CovarianceMatrix::vacuum(2), PhotonOp{PhotonOpKind::subtract, random_mode(2, 1)});
    } catch (const UndefinedSubtraction&) {
        rejected = true;
    }

    bool thermal_ok = true;
    for (double nu : {1.5, 2.0, 3.0, 5.0}) {
        const CovarianceMatrix th = CovarianceMatrix::thermal(2, nu);
        const PhotonOp op{PhotonOpKind::subtract, random_mode(2, 9)};
        const WitnessReport w = negativity_witness(th, op);
        thermal_ok = thermal_ok && std::abs(w.value - 2.0 / nu) < 1e-12 && !w.negative &&
                     wigner_at_origin(th, op) > 0.0;
    }

    bool gate = false;
    try {
        fock::build_gaussian_fock(capped_state(2, 3, 1.0), 8);
    } catch (const CutoffError& e) {
        gate = e.leakage() > fock::kLeakageTolerance && e.suggested_cutoff() > 8;
    }
    report(8, "degenerate and error paths", rejected && thermal_ok && gate,
           std::string("vacuum subtraction ") + (rejected ? "rejected" : "accepted") + ", thermal witness 2/nu " +
               (thermal_ok ? "ok" : "wrong") + ", cutoff gate " + (gate ? "triggered" : "silent"));
}

void criterion_9() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nongauss_acceptance";
    fs::create_directories(dir);
    const fs::path mixed = dir / "mixed.json", pure = dir / "pure.json";
    const double db[] = {2.0, 4.0, 6.0, 8.0, 3.0, 5.0};
    const double nu[] = {1.0, 1.4, 2.0, 1.2, 3.0, 1.0};
    io::write_covariance(mixed, random_mixed_cov(6, db, nu, 12).matrix(), Vec::Zero(12));
    io::write_covariance(pure, random_pure_squeezed_cov(6, db, 12).matrix(), Vec::Zero(12));

    auto run = [](auto&& f) {
        std::ostringstream out, log;
        f(out, log);
        return out.str();
    };
    int mismatches = 0, checks = 0;
    for (PhotonOpKind k : {PhotonOpKind::add, PhotonOpKind::subtract}) {
        cli::ScanOptions o;
        o.kind = k;
        o.samples = 200;
        o.seed = 5;
        o.state = mixed;
        const std::string a = run([&](auto& out, auto& log) { return cli::run_witness_scan(o, out, log); });
        o.threads = 4;
        const std::string b = run([&](auto& out, auto& log) { return cli::run_witness_scan(o, out, log); });
        o.state = pure;
        o.compare = true;
        const std::string c = run([&](auto& out, auto& log) { return cli::run_purity_scan(o, out, log); });
        o.threads = 1;
        const std::string d = run([&](auto& out, auto& log) { return cli::run_purity_scan(o, out, log); });
        mismatches += (a != b) + (c != d) + a.empty() + c.empty();
        checks += 2;

        cli::GridOptions g;
        g.state = pure;
        g.kind = k;
        g.grid = 15;
        g.seed = 3;
        const std::string e = run([&](auto& out, auto& log) { return cli::run_wigner_grid(g, out, log); });
        const std::string f = run([&](auto& out, auto& log) { return cli::run_wigner_grid(g, out, log); });
        mismatches += (e != f) + e.empty();
        ++checks;
    }
    const CovarianceMatrix V = cases::random_state(2, 6, true);
    const PhotonOp op{PhotonOpKind::subtract, random_mode(2, 6)};
    const MixtureEstimate m1 = mixture_reconstruction(V, op, Vec::Zero(4), 30000, 8, 1);
    const MixtureEstimate m4 = mixture_reconstruction(V, op, Vec::Zero(4), 30000, 8, 4);
    mismatches += m1.value != m4.value || m1.std_error != m4.std_error;
    ++checks;
    fs::remove_all(dir);
    report(9, "determinism", mismatches == 0,
           std::to_string(checks) + " serial/parallel and rerun comparisons, " + std::to_string(mismatches) +
               " differences");
}

} // namespace

int main() {
    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
