#pragma once

// Command implementations behind the nongauss CLI. Each run_* writes its
// data to `out`, diagnostics to `log`, and returns a process exit code.

#include "nongauss/photon_ops.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nongauss::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInvalidState = 2,
    kParseFailure = 3,
    kUndefinedSubtraction = 4,
    kMixedInput = 5,
    kCutoffLeakage = 6,
};

/// --mode: explicit coordinates, "supermode:i" or "random".
struct ModeSpec {
    enum class Kind { coords, supermode, random };
    Kind kind = Kind::random;
    std::vector<double> coords;
    int index = 0;
};

/// Accepts one comma-separated token or one token per coordinate.
ModeSpec parse_mode_spec(const std::vector<std::string>& tokens);
std::string to_string(const ModeSpec& spec);

/// --plane: "mode" for span{g, Jg}, or "i,j" for two phase-space axes.
struct PlaneSpec {
    bool mode_plane = true;
    int i = 0;
    int j = 1;
};

PlaneSpec parse_plane_spec(const std::string& text);
std::string to_string(const PlaneSpec& spec);

struct GridOptions {
    std::filesystem::path state;
    PhotonOpKind kind = PhotonOpKind::subtract;
    ModeSpec mode;
    PlaneSpec plane;
    double range = 4.0;
    int grid = 41;
    std::uint64_t seed = 0;
};

struct ScanOptions {
    std::filesystem::path state;
    PhotonOpKind kind = PhotonOpKind::subtract;
    ModeSpec mode;
    int samples = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    /// purity-scan only: also evaluate the opposite operation on each g.
    bool compare = false;
};

struct OracleOptions {
    std::string preset;
    std::optional<PhotonOpKind> kind; ///< overrides the preset's operation
    int cutoff = 0;                   ///< 0 picks one automatically
};

struct SynthOptions {
    int modes = 1;
    std::vector<double> squeezing_db;
    std::vector<double> nu; ///< empty for a pure state
    std::uint64_t seed = 0;
    std::string label;
};

/// One witness-scan sample. `seed` is the substream seed of the sample.
struct ScanRecord {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    Vec g;
    double witness = 0.0;
    bool negative = false;
    double mu0 = 1.0;
    double mu = 1.0;
    double mean_photons = 0.0;
};

/// Records in sample order; independent of opt.threads.
std::vector<ScanRecord> witness_scan_records(const CovarianceMatrix& V, const ScanOptions& opt,
                                             int& resampled);

inline constexpr double kOracleWignerTolerance = 1e-8;
inline constexpr double kOracleCumulantTolerance = 1e-7;
inline constexpr double kOracleCovarianceTolerance = 1e-7;

int run_validate(const std::filesystem::path& file, std::ostream& out, std::ostream& log);
int run_wigner_grid(const GridOptions& opt, std::ostream& out, std::ostream& log);
int run_witness_scan(const ScanOptions& opt, std::ostream& out, std::ostream& log);
int run_purity_scan(const ScanOptions& opt, std::ostream& out, std::ostream& log);
/// Writes the pure part as a covariance file to `out`.
int run_purify(const std::filesystem::path& file, std::ostream& out, std::ostream& log);
int run_oracle_check(const OracleOptions& opt, std::ostream& out, std::ostream& log);
/// Random squeezed state as a covariance file.
int run_synth(const SynthOptions& opt, std::ostream& out, std::ostream& log);

} // namespace nongauss::cli
