#include "nongauss/commands.hpp"

#include "nongauss/analysis.hpp"
#include "nongauss/errors.hpp"
#include "nongauss/fock_oracle.hpp"
#include "nongauss/io.hpp"
#include "nongauss/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace nongauss::cli {

using io::fmt;

namespace {

constexpr const char* kConventionLine = "# ordering=xxpp scaling=shot-noise-1\n";

std::string short_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + short_num(xs[i]);
    return s;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        log << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const UndefinedSubtraction& e) {
        log << "undefined subtraction: " << e.what() << "\n";
        return kUndefinedSubtraction;
    } catch (const MixedStateError& e) {
        log << "mixed state: " << e.what() << "\n";
        return kMixedInput;
    } catch (const CutoffError& e) {
        log << "cutoff leakage: " << e.what() << "\n";
        return kCutoffLeakage;
    } catch (const PhysicalityError& e) {
        log << "invalid state: " << e.what() << "\n";
        return kInvalidState;
    } catch (const ValidationError& e) {
        log << "invalid state: " << e.what() << "\n";
        return kInvalidState;
    } catch (const DimensionError& e) {
        log << "invalid state: " << e.what() << "\n";
        return kInvalidState;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kFailure;
    }
}

// Runs fn(i) for i in [0, n) on `threads` workers, index-strided. The first
// failure by index is rethrown after all workers finish.
template <class F>
void parallel_for(int n, int threads, F&& fn) {
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<int> error_index(workers, std::numeric_limits<int>::max());
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (int i = t; i < n; i += workers) {
                        error_index[t] = i;
                        fn(i);
                    }
                    error_index[t] = std::numeric_limits<int>::max();
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
    }
    int first = -1;
    for (int t = 0; t < workers; ++t)
        if (errors[t] && (first < 0 || error_index[t] < error_index[first])) first = t;
    if (first >= 0) std::rethrow_exception(errors[first]);
}

CovarianceMatrix centered(const CovarianceMatrix& V) { return CovarianceMatrix(V.matrix()); }

ModeVector resolve_mode(const CovarianceMatrix& V, const ModeSpec& spec, PhotonOpKind kind,
                        std::uint64_t seed, std::uint64_t index, int& resampled) {
    switch (spec.kind) {
    case ModeSpec::Kind::coords: {
        if (static_cast<int>(spec.coords.size()) != V.dim())
            throw ParseError("--mode: expected " + std::to_string(V.dim()) + " coordinates, got " +
                             std::to_string(spec.coords.size()));
        Vec v = Eigen::Map<const Vec>(spec.coords.data(), V.dim());
        if (!(v.norm() > 0.0)) throw ParseError("--mode: zero vector");
        return ModeVector(v / v.norm());
    }
    case ModeSpec::Kind::supermode: {
        const CovarianceMatrix pure = V.is_pure() ? V : decompose_cov(V).pure;
        return supermode(pure, spec.index);
    }
    case ModeSpec::Kind::random:
        break;
    }
    return draw_scan_mode(V, kind, seed, index, resampled);
}

void write_header(std::ostream& out, const std::string& command, const std::string& echo) {
    out << "# nongauss " << command << "\n" << kConventionLine << "# " << echo << "\n";
}

} // namespace

ModeSpec parse_mode_spec(const std::vector<std::string>& tokens) {
    ModeSpec spec;
    if (tokens.empty()) return spec;
    if (tokens.size() == 1) {
        const std::string& t = tokens[0];
        if (t == "random") return spec;
        if (t.rfind("supermode:", 0) == 0) {
            spec.kind = ModeSpec::Kind::supermode;
            try {
                std::size_t used = 0;
                spec.index = std::stoi(t.substr(10), &used);
                if (used != t.size() - 10) throw std::invalid_argument(t);
            } catch (const std::exception&) {
                throw ParseError("--mode: bad supermode index in '" + t + "'");
            }
            return spec;
        }
    }
    spec.kind = ModeSpec::Kind::coords;
    for (const std::string& tok : tokens) {
        std::stringstream ss(tok);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                spec.coords.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ParseError("--mode: cannot read coordinate '" + item + "'");
            }
        }
    }
    if (spec.coords.empty()) throw ParseError("--mode: no coordinates given");
    return spec;
}

std::string to_string(const ModeSpec& spec) {
    switch (spec.kind) {
    case ModeSpec::Kind::coords:
        return join(spec.coords);
    case ModeSpec::Kind::supermode:
        return "supermode:" + std::to_string(spec.index);
    case ModeSpec::Kind::random:
        break;
    }
    return "random";
}

PlaneSpec parse_plane_spec(const std::string& text) {
    PlaneSpec spec;
    if (text == "mode") return spec;
    spec.mode_plane = false;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ParseError("--plane: expected 'mode' or 'i,j'");
    try {
        std::size_t u1 = 0, u2 = 0;
        const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
        spec.i = std::stoi(a, &u1);
        spec.j = std::stoi(b, &u2);
        if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw ParseError("--plane: cannot read axes '" + text + "'");
    }
    return spec;
}

std::string to_string(const PlaneSpec& spec) {
    return spec.mode_plane ? "mode" : std::to_string(spec.i) + "," + std::to_string(spec.j);
}

int run_validate(const std::filesystem::path& file, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        io::RawCovariance raw = io::read_covariance(file);
        std::optional<CovarianceMatrix> V;
        try {
            V.emplace(raw.matrix, raw.mean);
        } catch (const PhysicalityError& e) {
            out << "invalid: symplectic eigenvalue " << fmt(e.eigenvalue()) << " < 1\n";
            log << e.what() << "\n";
            return int(kInvalidState);
        } catch (const ValidationError& e) {
            out << "invalid: " << e.what() << "\n";
            return int(kInvalidState);
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(V->matrix(), Eigen::EigenvaluesOnly);
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
        const std::vector<double> nus = V->symplectic_eigenvalues();
        out << "modes = " << V->modes() << "\n";
        out << "eigenvalues = " << join(ev) << "\n";
        out << "purity = " << short_num(purity_gaussian(*V)) << "\n";
        if (!V->mean().isZero(0.0)) out << "displaced = yes\n";
        out << "ν = " << join(nus) << "; " << (V->is_pure() ? "pure" : "mixed") << "\n";
        return int(kOk);
    });
}

int run_wigner_grid(const GridOptions& opt, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        if (opt.grid < 1) throw ParseError("--grid must be at least 1");
        if (!(opt.range > 0.0)) throw ParseError("--range must be positive");
        const CovarianceMatrix state = io::load_state(opt.state);
        const CovarianceMatrix V = centered(state);
        int resampled = 0;
        const ModeVector g = resolve_mode(V, opt.mode, opt.kind, opt.seed, 0, resampled);
        const PhotonOp op{opt.kind, g};
        const bool displaced = !state.mean().isZero(0.0);
        const PolyGaussianWigner W =
            displaced ? displaced_wigner_function(V, state.mean(), op, true) : wigner_nongaussian(V, op);

        Vec u = Vec::Zero(V.dim()), v = Vec::Zero(V.dim());
        if (opt.plane.mode_plane) {
            u = g.coords();
            v = apply_J(g.coords());
        } else {
            const auto& p = opt.plane;
            if (p.i < 0 || p.j < 0 || p.i >= V.dim() || p.j >= V.dim() || p.i == p.j)
                throw ParseError("--plane: axes must be distinct indices below " + std::to_string(V.dim()));
            u(p.i) = 1.0;
            v(p.j) = 1.0;
        }

        write_header(out, "wigner-grid",
                     "op=" + std::string(to_string(opt.kind)) + " mode=" + to_string(opt.mode) +
                         " plane=" + to_string(opt.plane) + " range=" + short_num(opt.range) +
                         " grid=" + std::to_string(opt.grid));
        out << "# g = " << join(std::vector<double>(g.coords().data(), g.coords().data() + g.dim())) << "\n";
        out << "beta1,beta2,W\n";
        auto axis = [&](int k) {
            return opt.grid == 1 ? 0.0 : -opt.range + 2.0 * opt.range * k / (opt.grid - 1);
        };
        double wmin = std::numeric_limits<double>::infinity();
        double at1 = 0.0, at2 = 0.0;
        for (int a = 0; a < opt.grid; ++a) {
            for (int b = 0; b < opt.grid; ++b) {
                const double b1 = axis(a), b2 = axis(b);
                const double w = evaluate_wigner(W, b1 * u + b2 * v);
                out << fmt(b1) << "," << fmt(b2) << "," << fmt(w) << "\n";
                if (w < wmin) {
                    wmin = w;
                    at1 = b1;
                    at2 = b2;
                }
            }
        }
        const WitnessReport rep = negativity_witness(V, op);
        out << "# min W = " << fmt(wmin) << " at (" << fmt(at1) << "," << fmt(at2) << ")\n";
        out << "# witness = " << fmt(rep.value) << " threshold = " << fmt(rep.threshold)
            << " negative = " << (rep.negative ? "true" : "false") << "\n";
        if (displaced) out << "# witness refers to the undisplaced covariance\n";
        return int(kOk);
    });
}

std::vector<ScanRecord> witness_scan_records(const CovarianceMatrix& V, const ScanOptions& opt,
                                             int& resampled) {
    if (opt.samples < 1) throw ParseError("--samples must be at least 1");
    std::vector<ScanRecord> records(opt.samples);
    std::vector<int> redraws(opt.samples, 0);
    parallel_for(opt.samples, opt.threads, [&](int i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const ModeVector g = resolve_mode(V, opt.mode, opt.kind, opt.seed, idx, redraws[i]);
        const PhotonOp op{opt.kind, g};
        ScanRecord& r = records[i];
        r.index = idx;
        r.seed = derive_seed(opt.seed, idx);
        r.g = g.coords();
        const WitnessReport w = negativity_witness(V, op);
        r.witness = w.value;
        r.negative = w.negative;
        const PurityReport p = reduced_purities(V, op);
        r.mu0 = p.mu0;
        r.mu = p.mu;
        r.mean_photons = mean_photon_number(V, g);
    });
    resampled = 0;
    for (int k : redraws) resampled += k;
    return records;
}

int run_witness_scan(const ScanOptions& opt, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        const CovarianceMatrix state = io::load_state(opt.state);
        if (!state.mean().isZero(0.0)) log << "note: mean vector ignored by witness-scan\n";
        const CovarianceMatrix V = centered(state);
        int resampled = 0;
        const std::vector<ScanRecord> records = witness_scan_records(V, opt, resampled);

        write_header(out, "witness-scan",
                     "op=" + std::string(to_string(opt.kind)) + " mode=" + to_string(opt.mode) +
                         " modes=" + std::to_string(V.modes()) + " samples=" + std::to_string(opt.samples) +
                         " seed=" + std::to_string(opt.seed));
        out << "index,seed";
        for (int k = 0; k < V.dim(); ++k) out << ",g" << k;
        out << ",witness,negative,mu0,mu,mean_photons\n";
        int negatives = 0;
        for (const ScanRecord& r : records) {
            out << r.index << "," << r.seed;
            for (int k = 0; k < V.dim(); ++k) out << "," << fmt(r.g(k));
            out << "," << fmt(r.witness) << "," << (r.negative ? 1 : 0) << "," << fmt(r.mu0) << ","
                << fmt(r.mu) << "," << fmt(r.mean_photons) << "\n";
            negatives += r.negative ? 1 : 0;
        }
        out << "# resampled = " << resampled << "\n";
        out << "# negative fraction = " << short_num(double(negatives) / records.size()) << "\n";
        return int(kOk);
    });
}

int run_purity_scan(const ScanOptions& opt, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        if (opt.samples < 1) throw ParseError("--samples must be at least 1");
        const CovarianceMatrix state = io::load_state(opt.state);
        const CovarianceMatrix V = centered(state);
        if (!V.is_pure())
            throw MixedStateError("purity-scan needs a pure state; run 'nongauss purify' first");

        const PhotonOpKind other =
            opt.kind == PhotonOpKind::add ? PhotonOpKind::subtract : PhotonOpKind::add;
        // With --compare both operations must be defined on every g.
        const PhotonOpKind draw_kind = opt.compare ? PhotonOpKind::subtract : opt.kind;
        const int n = opt.samples;
        std::vector<PurityReport> main(n), alt(n);
        std::vector<int> redraws(n, 0);
        parallel_for(n, opt.threads, [&](int i) {
            const ModeVector g = resolve_mode(V, opt.mode, draw_kind, opt.seed, i, redraws[i]);
            main[i] = reduced_purities(V, PhotonOp{opt.kind, g});
            if (opt.compare) alt[i] = reduced_purities(V, PhotonOp{other, g});
        });

        write_header(out, "purity-scan",
                     "op=" + std::string(to_string(opt.kind)) + " mode=" + to_string(opt.mode) +
                         " modes=" + std::to_string(V.modes()) + " samples=" + std::to_string(n) +
                         " seed=" + std::to_string(opt.seed) + (opt.compare ? " compare=1" : ""));
        out << "index,seed,mu0,mu";
        if (opt.compare) out << ",mu_" << to_string(other);
        out << "\n";
        int lower = 0, sub_le_add = 0, resampled = 0;
        double sum0 = 0.0, sum = 0.0;
        for (int i = 0; i < n; ++i) {
            out << i << "," << derive_seed(opt.seed, i) << "," << fmt(main[i].mu0) << "," << fmt(main[i].mu);
            if (opt.compare) out << "," << fmt(alt[i].mu);
            out << "\n";
            lower += main[i].mu < main[i].mu0 - 1e-12 ? 1 : 0;
            sum0 += main[i].mu0;
            sum += main[i].mu;
            if (opt.compare) {
                const double mu_sub = opt.kind == PhotonOpKind::subtract ? main[i].mu : alt[i].mu;
                const double mu_add = opt.kind == PhotonOpKind::add ? main[i].mu : alt[i].mu;
                sub_le_add += mu_sub <= mu_add + 1e-12 ? 1 : 0;
            }
            resampled += redraws[i];
        }
        out << "# resampled = " << resampled << "\n";
        out << "# fraction mu < mu0 = " << short_num(double(lower) / n) << "\n";
        out << "# mean mu0 = " << fmt(sum0 / n) << "\n";
        out << "# mean mu = " << fmt(sum / n) << "\n";
        if (opt.compare)
            out << "# fraction mu_subtract <= mu_add = " << short_num(double(sub_le_add) / n) << "\n";
        return int(kOk);
    });
}

int run_purify(const std::filesystem::path& file, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        io::RawCovariance raw = io::read_covariance(file);
        const CovarianceMatrix V(raw.matrix, raw.mean);
        nlohmann::json meta = raw.metadata;
        if (V.is_pure()) {
            meta["purify"] = {{"hs_norm_ratio", "pure"}, {"discarded_noise_hs_norm", 0.0}};
            log << "pure\n";
            out << io::format_covariance(raw.matrix, raw.mean, meta);
            return int(kOk);
        }
        const NoiseSplit split = decompose_cov(V);
        const double noise = split.noise.norm();
        const double ratio = split.pure.matrix().norm() / noise;
        meta["purify"] = {{"hs_norm_ratio", ratio}, {"discarded_noise_hs_norm", noise}};
        log << "ratio = " << short_num(ratio) << "\n";
        out << io::format_covariance(split.pure.matrix(), raw.mean, meta);
        return int(kOk);
    });
}

namespace {

struct OraclePreset {
    CovarianceMatrix V;
    Vec xi;
    ModeVector g;
    PhotonOpKind kind;
};

OraclePreset make_preset(const std::string& name) {
    if (name == "vacuum-add")
        return {CovarianceMatrix::vacuum(1), Vec::Zero(2), ModeVector::axis(1, 0), PhotonOpKind::add};
    if (name == "squeezed-subtract") {
        Mat V = Mat::Zero(2, 2);
        V(0, 0) = 0.5;
        V(1, 1) = 2.0;
        return {CovarianceMatrix(V), Vec::Zero(2), ModeVector(Vec{{0.8, 0.6}}), PhotonOpKind::subtract};
    }
    if (name == "two-mode-random") {
        const double db[] = {4.0, 7.0};
        return {random_pure_squeezed_cov(2, db, 7), Vec::Zero(4), random_mode(2, 11),
                PhotonOpKind::subtract};
    }
    if (name == "displaced-add") {
        Mat V = Mat::Zero(2, 2);
        V(0, 0) = 0.5;
        V(1, 1) = 2.0;
        return {CovarianceMatrix(V), Vec{{0.7, -0.4}}, ModeVector(Vec{{0.6, 0.8}}), PhotonOpKind::add};
    }
    throw ParseError("unknown preset '" + name +
                     "' (vacuum-add, squeezed-subtract, two-mode-random, displaced-add)");
}

constexpr double kAutoLeakage = fock::kComparisonLeakage;

fock::FockState oracle_state(const OraclePreset& p, int cutoff) {
    const bool displaced = !p.xi.isZero(0.0);
    if (cutoff > 0) {
        fock::FockState s = fock::build_gaussian_fock(p.V, cutoff);
        return displaced ? fock::displace(s, p.xi, cutoff) : s;
    }
    const int base = fock::suggest_cutoff(p.V, kAutoLeakage);
    fock::FockState s = fock::build_gaussian_fock(p.V, base, kAutoLeakage);
    if (!displaced) return s;
    for (int c = base + 8;; c += 8) {
        try {
            return fock::displace(s, p.xi, c, kAutoLeakage);
        } catch (const CutoffError&) {
            if (c > 400) throw;
        }
    }
}

} // namespace

int run_oracle_check(const OracleOptions& opt, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        OraclePreset p = make_preset(opt.preset);
        if (opt.kind) p.kind = *opt.kind;
        const PhotonOp op{p.kind, p.g};
        const bool displaced = !p.xi.isZero(0.0);
        const int m = p.V.modes();
        const int n = p.V.dim();

        const PolyGaussianWigner W = displaced ? displaced_wigner_function(p.V, p.xi, op)
                                               : wigner_nongaussian(p.V, op);
        const fock::FockState base = oracle_state(p, opt.cutoff);
        const fock::PhotonOpResult res = fock::apply_photon_op_fock(base, op);
        const fock::FockState& psi = res.state;

        out << "# nongauss oracle-check\n" << kConventionLine;
        out << "preset = " << opt.preset << "\n";
        out << "op = " << to_string(p.kind) << "\n";
        out << "modes = " << m << "\n";
        out << "cutoff = " << base.dim << "\n";
        out << "leakage = " << short_num(base.leakage) << "\n";

        // Wigner: 21 x 21 grids on [-3, 3]^2 in the mode plane and in (x_0, p_last).
        double dw = 0.0;
        std::vector<std::pair<Vec, Vec>> planes;
        planes.emplace_back(p.g.coords(), apply_J(p.g.coords()));
        planes.emplace_back(Vec::Unit(n, 0), Vec::Unit(n, n - 1));
        for (const auto& [u, v] : planes)
            for (int a = 0; a < 21; ++a)
                for (int b = 0; b < 21; ++b) {
                    const Vec beta = (-3.0 + 0.3 * a) * u + (-3.0 + 0.3 * b) * v + p.xi;
                    dw = std::max(dw, std::abs(evaluate_wigner(W, beta) - fock::wigner_from_fock(psi, beta)));
                }

        // Covariance and mean of the output state.
        const Moments mom = moments(W);
        const double dcov = std::max((mom.cov - fock::covariance_from_fock(psi)).cwiseAbs().maxCoeff(),
                                     (mom.mean - fock::mean_from_fock(psi)).cwiseAbs().maxCoeff());

        bool ok = dw < kOracleWignerTolerance && dcov < kOracleCovarianceTolerance;
        out << "max wigner deviation = " << short_num(dw) << "\n";
        if (displaced) {
            out << "max cumulant deviation = n/a (displaced state)\n";
        } else {
            const Mat A = a_matrix(p.V, op);
            std::mt19937_64 rng(derive_seed(opt.preset.size(), 4));
            std::normal_distribution<double> normal;
            auto rnd = [&] {
                Vec f(n);
                for (int k = 0; k < n; ++k) f(k) = normal(rng);
                return f;
            };
            const Vec g = p.g.coords(), jg = apply_J(g);
            std::vector<std::vector<Vec>> sets = {{g, g, g, g}, {g, jg, g, jg}, {g, g, g, g, g, g}};
            for (int k = 0; k < 3; ++k) sets.push_back({rnd(), rnd(), rnd(), rnd()});
            for (int k = 0; k < 3; ++k) sets.push_back({rnd(), rnd(), rnd(), rnd(), rnd(), rnd()});
            double dk = 0.0;
            for (const auto& fs : sets)
                dk = std::max(dk, std::abs(truncated_correlation(A, fs) - fock::cumulants_from_fock(psi, fs)));
            out << "max cumulant deviation = " << short_num(dk) << "\n";
            ok = ok && dk < kOracleCumulantTolerance;
        }
        out << "max covariance deviation = " << short_num(dcov) << "\n";
        out << (ok ? "PASS" : "FAIL") << "\n";
        return ok ? int(kOk) : int(kFailure);
    });
}

int run_synth(const SynthOptions& opt, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        if (opt.modes < 1) throw ParseError("--modes must be at least 1");
        std::vector<double> db = opt.squeezing_db;
        if (db.size() == 1 && opt.modes > 1) db.assign(opt.modes, db[0]);
        std::vector<double> nu = opt.nu;
        if (nu.size() == 1 && opt.modes > 1) nu.assign(opt.modes, nu[0]);
        if (static_cast<int>(db.size()) != opt.modes)
            throw ParseError("--db: need one value or one per mode");
        if (!nu.empty() && static_cast<int>(nu.size()) != opt.modes)
            throw ParseError("--nu: need one value or one per mode");
        const CovarianceMatrix V = nu.empty() ? random_pure_squeezed_cov(opt.modes, db, opt.seed)
                                              : random_mixed_cov(opt.modes, db, nu, opt.seed);
        nlohmann::json meta = {{"label", opt.label.empty() ? "synthetic" : opt.label},
                               {"source", "nongauss synth seed=" + std::to_string(opt.seed)}};
        out << io::format_covariance(V.matrix(), V.mean(), meta);
        return int(kOk);
    });
}

} // namespace nongauss::cli
