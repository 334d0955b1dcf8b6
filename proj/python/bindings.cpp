#include "nongauss/analysis.hpp"
#include "nongauss/commands.hpp"
#include "nongauss/errors.hpp"
#include "nongauss/fock_oracle.hpp"
#include "nongauss/gaussian.hpp"
#include "nongauss/io.hpp"
#include "nongauss/photon_ops.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nongauss;

namespace {

CovarianceMatrix cov(const Mat& V, const std::optional<Vec>& mean) {
    return mean ? CovarianceMatrix(V, *mean) : CovarianceMatrix(V);
}

PhotonOp make_op(const std::string& kind, const Vec& g) { return PhotonOp{parse_op_kind(kind), ModeVector(g)}; }

py::tuple run_captured(const std::function<int(std::ostream&, std::ostream&)>& f) {
    std::ostringstream out, log;
    const int code = f(out, log);
    return py::make_tuple(code, out.str(), log.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Photon addition and subtraction on multimode Gaussian states";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<PhysicalityError>(m, "PhysicalityError", PyExc_ValueError);
    py::register_exception<UndefinedSubtraction>(m, "UndefinedSubtraction", PyExc_ValueError);
    py::register_exception<MixedStateError>(m, "MixedStateError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
    py::register_exception<CutoffError>(m, "CutoffError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_RuntimeError);

    m.def("symplectic_form", &symplectic_form, py::arg("modes"));
    m.def("mode_projector", [](const Vec& g) { return mode_projector(ModeVector(g)); }, py::arg("g"));
    m.def("random_mode", [](int modes, std::uint64_t seed) { return random_mode(modes, seed).coords(); },
          py::arg("modes"), py::arg("seed"));

    m.def("symplectic_spectrum", [](const Mat& V) { return symplectic_spectrum(V); }, py::arg("V"));
    m.def("validate", [](const Mat& V) { (void)CovarianceMatrix(V); }, py::arg("V"),
          "Raise if V is not a physical covariance matrix.");
    m.def("williamson", [](const Mat& V) {
        const auto w = williamson(CovarianceMatrix(V));
        return py::make_tuple(w.S, w.nu);
    }, py::arg("V"), "Returns (S, nu) with V = S diag(nu, nu) S^T.");
    m.def("bloch_messiah", [](const Mat& S) {
        const auto bm = bloch_messiah(S);
        return py::make_tuple(bm.O1, bm.squeezing, bm.O2);
    }, py::arg("S"), "Returns (O1, k, O2) with S = O1 diag(k, 1/k) O2.");
    m.def("random_pure_squeezed_cov", [](int modes, const std::vector<double>& db, std::uint64_t seed) {
        return random_pure_squeezed_cov(modes, db, seed).matrix();
    }, py::arg("modes"), py::arg("squeezing_db"), py::arg("seed"));

    m.def("mean_photon_number", [](const Mat& V, const Vec& g) {
        return mean_photon_number(CovarianceMatrix(V), ModeVector(g));
    }, py::arg("V"), py::arg("g"));
    m.def("a_matrix", [](const Mat& V, const std::string& op, const Vec& g) {
        return a_matrix(CovarianceMatrix(V), make_op(op, g));
    }, py::arg("V"), py::arg("op"), py::arg("g"));
    m.def("output_covariance", [](const Mat& V, const std::string& op, const Vec& g) {
        return output_covariance(CovarianceMatrix(V), make_op(op, g)).matrix();
    }, py::arg("V"), py::arg("op"), py::arg("g"));
    m.def("truncated_correlation", [](const Mat& A, const std::vector<Vec>& fs) {
        return truncated_correlation(A, fs);
    }, py::arg("A"), py::arg("fs"));
    m.def("characteristic_fn", [](const Mat& V, const std::string& op, const Vec& g, const Vec& alpha) {
        return characteristic_fn(CovarianceMatrix(V), make_op(op, g), alpha);
    }, py::arg("V"), py::arg("op"), py::arg("g"), py::arg("alpha"));
    m.def("wigner", [](const Mat& V, const std::string& op, const Vec& g, const Vec& beta,
                       const std::optional<Vec>& mean) {
        const PhotonOp o = make_op(op, g);
        if (mean && !mean->isZero(0.0))
            return displaced_wigner(CovarianceMatrix(V), *mean, o, beta, true);
        return evaluate_wigner(wigner_nongaussian(CovarianceMatrix(V), o), beta);
    }, py::arg("V"), py::arg("op"), py::arg("g"), py::arg("beta"), py::arg("mean") = py::none());
    m.def("decompose_cov", [](const Mat& V) {
        const NoiseSplit s = decompose_cov(CovarianceMatrix(V));
        return py::make_tuple(s.pure.matrix(), s.noise);
    }, py::arg("V"), "Returns (V_s, V_c).");
    m.def("mixture_reconstruction", [](const Mat& V, const std::string& op, const Vec& g, const Vec& beta,
                                       std::size_t n, std::uint64_t seed, int threads) {
        const auto e = mixture_reconstruction(CovarianceMatrix(V), make_op(op, g), beta, n, seed, threads);
        return py::make_tuple(e.value, e.std_error);
    }, py::arg("V"), py::arg("op"), py::arg("g"), py::arg("beta"), py::arg("samples"), py::arg("seed"),
       py::arg("threads") = 1);

    m.def("negativity_witness", [](const Mat& V, const std::string& op, const Vec& g) {
        const auto r = negativity_witness(CovarianceMatrix(V), make_op(op, g));
        return py::make_tuple(r.value, r.threshold, r.negative);
    }, py::arg("V"), py::arg("op"), py::arg("g"), "Returns (value, threshold, negative).");
    m.def("wigner_at_origin", [](const Mat& V, const std::string& op, const Vec& g) {
        return wigner_at_origin(CovarianceMatrix(V), make_op(op, g));
    }, py::arg("V"), py::arg("op"), py::arg("g"));
    m.def("reduced_purities", [](const Mat& V, const std::string& op, const Vec& g) {
        const auto r = reduced_purities(CovarianceMatrix(V), make_op(op, g));
        return py::make_tuple(r.mu0, r.mu);
    }, py::arg("V"), py::arg("op"), py::arg("g"), "Returns (mu0, mu).");
    m.def("passive_separability_witness", [](const Mat& V, const Vec& g) {
        return passive_separability_witness(CovarianceMatrix(V), ModeVector(g));
    }, py::arg("V"), py::arg("g"));
    m.def("supermode", [](const Mat& V, int i) { return supermode(CovarianceMatrix(V), i).coords(); },
          py::arg("V"), py::arg("index"));

    m.def("fock_wigner", [](const Mat& V, const std::string& op, const Vec& g, const Vec& beta, int cutoff) {
        const CovarianceMatrix cv(V);
        if (cutoff <= 0) cutoff = fock::suggest_cutoff(cv, fock::kComparisonLeakage);
        const auto res = fock::apply_photon_op_fock(fock::build_gaussian_fock(cv, cutoff), make_op(op, g));
        return fock::wigner_from_fock(res.state, beta);
    }, py::arg("V"), py::arg("op"), py::arg("g"), py::arg("beta"), py::arg("cutoff") = 0,
       "Wigner value from the truncated Fock-space construction (m <= 3).");

    m.def("format_covariance", [](const Mat& V, const std::optional<Vec>& mean) {
        return io::format_covariance(V, mean.value_or(Vec::Zero(V.rows())));
    }, py::arg("V"), py::arg("mean") = py::none());
    m.def("parse_covariance", [](const std::string& text) {
        const auto raw = io::parse_covariance(text);
        return py::make_tuple(raw.matrix, raw.mean);
    }, py::arg("text"));

    m.def("validate_file", [](const std::string& path) {
        return run_captured([&](std::ostream& o, std::ostream& l) { return cli::run_validate(path, o, l); });
    }, py::arg("path"), "Returns (exit_code, output, log).");
    m.def("witness_scan", [](const std::string& path, const std::string& op, int samples, std::uint64_t seed,
                             int threads) {
        cli::ScanOptions opt;
        opt.state = path;
        opt.kind = parse_op_kind(op);
        opt.samples = samples;
        opt.seed = seed;
        opt.threads = threads;
        return run_captured([&](std::ostream& o, std::ostream& l) { return cli::run_witness_scan(opt, o, l); });
    }, py::arg("path"), py::arg("op"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 1);
}
