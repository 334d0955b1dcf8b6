#include "nongauss/commands.hpp"
#include "nongauss/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>

namespace cli = nongauss::cli;

namespace {

// Sends data to --out when given, stdout otherwise.
int with_output(const std::string& path, const std::function<int(std::ostream&)>& run) {
    if (path.empty()) return run(std::cout);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        std::cerr << "cannot open " << path << " for writing\n";
        return cli::kFailure;
    }
    return run(file);
}

nongauss::PhotonOpKind op_kind(const std::string& s) { return nongauss::parse_op_kind(s); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon addition and subtraction on multimode Gaussian states"};
    app.require_subcommand(1);

    std::string state, out, op = "subtract", plane = "mode", preset;
    std::vector<std::string> mode_tokens;
    int samples = 100, grid = 41, threads = 1, cutoff = 0;
    double range = 4.0;
    std::uint64_t seed = 0;
    bool compare = false;

    auto* validate = app.add_subcommand("validate", "Check a covariance file and report its spectrum");
    validate->add_option("--state,state", state, "Covariance file")->required();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--state", state, "Covariance file")->required();
        sub->add_option("--op", op, "add or subtract")->check(CLI::IsMember({"add", "subtract"}));
        sub->add_option("--mode", mode_tokens, "Coordinates, supermode:i, or random")->expected(1, -1);
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--out", out, "Output file (default stdout)");
    };

    auto* wgrid = app.add_subcommand("wigner-grid", "Wigner function on a 2D grid (CSV)");
    add_common(wgrid);
    wgrid->add_option("--plane", plane, "mode, or two axis indices i,j");
    wgrid->add_option("--range", range, "Grid half-width");
    wgrid->add_option("--grid", grid, "Points per axis");

    auto* wscan = app.add_subcommand("witness-scan", "Negativity witness over random modes (CSV)");
    add_common(wscan);
    wscan->add_option("--samples", samples, "Number of modes");
    wscan->add_option("--threads", threads, "Worker threads");

    auto* pscan = app.add_subcommand("purity-scan", "Reduced purities over random modes (CSV)");
    add_common(pscan);
    pscan->add_option("--samples", samples, "Number of modes");
    pscan->add_option("--threads", threads, "Worker threads");
    pscan->add_flag("--compare", compare, "Also evaluate the opposite operation on each mode");

    auto* purify = app.add_subcommand("purify", "Write the pure part of a covariance file");
    purify->add_option("--state", state, "Covariance file")->required();
    purify->add_option("--out", out, "Output file (default stdout)");

    auto* oracle = app.add_subcommand("oracle-check", "Compare closed forms against the Fock-space oracle");
    std::string oracle_op;
    oracle->add_option("--preset", preset, "vacuum-add, squeezed-subtract, two-mode-random, displaced-add")
        ->required();
    oracle->add_option("--op", oracle_op, "Override the preset operation")
        ->check(CLI::IsMember({"add", "subtract"}));
    oracle->add_option("--cutoff", cutoff, "Total photon cutoff (default: automatic)");

    cli::SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Write a random squeezed covariance file");
    synth->add_option("--modes", synth_opt.modes, "Number of modes")->required();
    synth->add_option("--db", synth_opt.squeezing_db, "Squeezing in dB (one value or one per mode)")
        ->required()
        ->delimiter(',');
    synth->add_option("--nu", synth_opt.nu, "Thermal symplectic eigenvalues (mixed state)")->delimiter(',');
    synth->add_option("--seed", synth_opt.seed, "Seed");
    synth->add_option("--label", synth_opt.label, "Metadata label");
    synth->add_option("--out", out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        cli::ModeSpec mode = cli::parse_mode_spec(mode_tokens);
        cli::ScanOptions scan{state, op_kind(op), mode, samples, seed, threads, compare};

        if (*validate) return cli::run_validate(state, std::cout, std::cerr);
        if (*wgrid) {
            cli::GridOptions g{state, op_kind(op), mode, cli::parse_plane_spec(plane), range, grid, seed};
            return with_output(out, [&](std::ostream& os) { return cli::run_wigner_grid(g, os, std::cerr); });
        }
        if (*wscan)
            return with_output(out, [&](std::ostream& os) { return cli::run_witness_scan(scan, os, std::cerr); });
        if (*pscan)
            return with_output(out, [&](std::ostream& os) { return cli::run_purity_scan(scan, os, std::cerr); });
        if (*purify)
            return with_output(out, [&](std::ostream& os) { return cli::run_purify(state, os, std::cerr); });
        if (*oracle) {
            cli::OracleOptions o{preset, std::nullopt, cutoff};
            if (!oracle_op.empty()) o.kind = op_kind(oracle_op);
            return cli::run_oracle_check(o, std::cout, std::cerr);
        }
        if (*synth)
            return with_output(out, [&](std::ostream& os) { return cli::run_synth(synth_opt, os, std::cerr); });
    } catch (const nongauss::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return cli::kParseFailure;
    }
    return cli::kFailure;
}
