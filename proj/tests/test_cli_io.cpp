#include "nongauss/analysis.hpp"
#include "nongauss/commands.hpp"
#include "nongauss/errors.hpp"
#include "nongauss/io.hpp"
#include "nongauss/random.hpp"

#include "support/cases.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace nongauss;
namespace fs = std::filesystem;

namespace {

const fs::path kData = NONGAUSS_EXAMPLES_DIR;

struct Run {
    int code;
    std::string out;
    std::string log;
};

template <class F>
Run capture(F&& f) {
    std::ostringstream out, log;
    const int code = f(out, log);
    return {code, out.str(), log.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int data_rows(const std::string& csv) {
    int n = 0;
    for (const std::string& l : lines(csv)) n += !l.empty() && l[0] != '#';
    return n - 1; // column header
}

std::string summary(const std::string& csv, const std::string& key) {
    for (const std::string& l : lines(csv))
        if (l.rfind("# " + key + " = ", 0) == 0) return l.substr(key.size() + 5);
    return "";
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("nongauss_test_" + name); }

cli::ScanOptions scan(const fs::path& file, PhotonOpKind kind, int n, std::uint64_t seed, int threads = 1) {
    cli::ScanOptions o;
    o.state = file;
    o.kind = kind;
    o.samples = n;
    o.seed = seed;
    o.threads = threads;
    return o;
}

} // namespace

TEST_CASE("covariance file parsing") {
    const io::RawCovariance raw = io::read_covariance(kData / "vacuum2.json");
    CHECK(raw.modes == 2);
    CHECK(raw.matrix == Mat::Identity(4, 4));
    CHECK(raw.mean.isZero());
    CHECK(raw.metadata["label"] == "vacuum");

    CHECK(io::read_covariance(kData / "displaced.json").mean == Vec{{1.0, -0.5}});
    CHECK_THROWS_AS(io::read_covariance(kData / "xpxp.json"), ParseError);
    CHECK_THROWS_AS(io::read_covariance(kData / "no_scaling.json"), ParseError);
    CHECK_THROWS_AS(io::read_covariance(kData / "truncated.json"), ParseError);
    CHECK_THROWS_AS(io::read_covariance(kData / "does_not_exist.json"), ParseError);
    CHECK_THROWS_AS(io::parse_covariance(R"({"modes": 2, "ordering": "xxpp", "scaling": "shot-noise-1",
                                             "matrix": [[1, 0], [0, 1]]})"),
                    ParseError);
    CHECK_THROWS_AS(io::parse_covariance(R"({"modes": 1, "ordering": "xxpp", "scaling": "shot-noise-1",
                                             "matrix": [[1, "a"], [0, 1]]})"),
                    ParseError);
    CHECK_THROWS_AS(io::load_state(kData / "asymmetric.json"), ValidationError);
    CHECK_THROWS_AS(io::load_state(kData / "unphysical.json"), PhysicalityError);
}

TEST_CASE("covariance file round trip is bit-exact") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const CovarianceMatrix V = cases::random_state(1 + static_cast<int>(s % 5), s, s % 2 == 0);
        const Vec mean = s % 3 == 0 ? Vec(random_mode(V.modes(), s).coords() * 1e-3) : Vec::Zero(V.dim());
        const io::RawCovariance back = io::parse_covariance(io::format_covariance(V.matrix(), mean));
        CHECK(back.matrix == V.matrix());
        CHECK(back.mean == mean);
    }
    const fs::path file = temp_file("roundtrip.json");
    const Mat odd = Mat::Identity(2, 2) * (1.0 / 3.0 + 1.0);
    io::write_covariance(file, odd, Vec::Zero(2), {{"label", "x"}});
    const io::RawCovariance r = io::read_covariance(file);
    CHECK(r.matrix == odd);
    CHECK(r.metadata["label"] == "x");
}

TEST_CASE("number formatting") {
    CHECK(io::fmt(0.1) == "0.10000000000000001");
    CHECK(std::stod(io::fmt(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("validate command") {
    const Run vac = capture([](auto& o, auto& l) { return cli::run_validate(kData / "vacuum2.json", o, l); });
    CHECK(vac.code == cli::kOk);
    CHECK(lines(vac.out).back() == "ν = 1,1; pure");
    const Run th = capture([](auto& o, auto& l) { return cli::run_validate(kData / "thermal3.json", o, l); });
    CHECK(th.code == cli::kOk);
    CHECK(lines(th.out).back() == "ν = 3; mixed");
    const Run asym = capture([](auto& o, auto& l) { return cli::run_validate(kData / "asymmetric.json", o, l); });
    CHECK(asym.code == cli::kInvalidState);
    const Run bad = capture([](auto& o, auto& l) { return cli::run_validate(kData / "unphysical.json", o, l); });
    CHECK(bad.code == cli::kInvalidState);
    CHECK(bad.out.find("0.70710678118654") != std::string::npos);
    const Run parse = capture([](auto& o, auto& l) { return cli::run_validate(kData / "xpxp.json", o, l); });
    CHECK(parse.code == cli::kParseFailure);
    const Run trunc = capture([](auto& o, auto& l) { return cli::run_validate(kData / "truncated.json", o, l); });
    CHECK(trunc.code == cli::kParseFailure);
}

TEST_CASE("mode and plane specs") {
    CHECK(cli::parse_mode_spec({}).kind == cli::ModeSpec::Kind::random);
    CHECK(cli::parse_mode_spec({"random"}).kind == cli::ModeSpec::Kind::random);
    const cli::ModeSpec sm = cli::parse_mode_spec({"supermode:3"});
    CHECK(sm.kind == cli::ModeSpec::Kind::supermode);
    CHECK(sm.index == 3);
    CHECK(cli::parse_mode_spec({"1,0,0.5"}).coords == std::vector<double>{1, 0, 0.5});
    CHECK(cli::parse_mode_spec({"1", "0", "0.5"}).coords == std::vector<double>{1, 0, 0.5});
    CHECK_THROWS_AS(cli::parse_mode_spec({"supermode:x"}), ParseError);
    CHECK_THROWS_AS(cli::parse_mode_spec({"1,zero"}), ParseError);
    CHECK(cli::parse_plane_spec("mode").mode_plane);
    const cli::PlaneSpec p = cli::parse_plane_spec("0,3");
    CHECK_FALSE(p.mode_plane);
    CHECK(p.i == 0);
    CHECK(p.j == 3);
    CHECK_THROWS_AS(cli::parse_plane_spec("diagonal"), ParseError);
}

TEST_CASE("wigner-grid command") {
    cli::GridOptions g;
    g.state = kData / "vacuum1.json";
    g.kind = PhotonOpKind::add;
    g.mode = cli::parse_mode_spec({"1,0"});
    g.grid = 41;
    g.range = 4.0;
    const Run r = capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); });
    REQUIRE(r.code == cli::kOk);
    CHECK(data_rows(r.out) == 41 * 41);
    CHECK(r.out.find("# ordering=xxpp scaling=shot-noise-1\n") != std::string::npos);
    const std::string min = summary(r.out, "min W");
    CHECK(std::stod(min) == doctest::Approx(-1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(min.find("at (0,0)") != std::string::npos);

    g.state = kData / "thermal3.json";
    g.kind = PhotonOpKind::subtract;
    g.grid = 11;
    const Run th = capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); });
    REQUIRE(th.code == cli::kOk);
    CHECK(data_rows(th.out) == 121);
    CHECK(std::stod(summary(th.out, "min W")) > 0.0);
    CHECK(th.out.find("# witness = 0.66666666666666") != std::string::npos);
    CHECK(th.out.find("negative = false") != std::string::npos);

    g.state = kData / "vacuum1.json";
    const Run undefined = capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); });
    CHECK(undefined.code == cli::kUndefinedSubtraction);
    CHECK(undefined.log.find("subtraction undefined on vacuum mode") != std::string::npos);

    g.mode = cli::parse_mode_spec({"1,0,0"});
    CHECK(capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); }).code == cli::kParseFailure);
}

TEST_CASE("wigner-grid planes and displaced input") {
    cli::GridOptions g;
    g.state = kData / "two_squeezers.json";
    g.kind = PhotonOpKind::subtract;
    g.mode = cli::parse_mode_spec({"supermode:0"});
    g.plane = cli::parse_plane_spec("0,2");
    g.grid = 5;
    const Run r = capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); });
    REQUIRE(r.code == cli::kOk);
    CHECK(data_rows(r.out) == 25);
    g.plane = cli::parse_plane_spec("0,4");
    CHECK(capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); }).code == cli::kParseFailure);

    g.state = kData / "displaced.json";
    g.plane = {};
    g.mode = cli::parse_mode_spec({"1,0"});
    const Run d = capture([&](auto& o, auto& l) { return cli::run_wigner_grid(g, o, l); });
    REQUIRE(d.code == cli::kOk);
    CHECK(d.out.find("undisplaced covariance") != std::string::npos);
}

TEST_CASE("witness-scan command") {
    const Run add = capture([](auto& o, auto& l) {
        return cli::run_witness_scan(scan(kData / "mixed3.json", PhotonOpKind::add, 50, 4), o, l);
    });
    REQUIRE(add.code == cli::kOk);
    CHECK(data_rows(add.out) == 50);
    CHECK(summary(add.out, "negative fraction") == "1");

    const Run th = capture([](auto& o, auto& l) {
        return cli::run_witness_scan(scan(kData / "thermal2.json", PhotonOpKind::subtract, 30, 4), o, l);
    });
    CHECK(summary(th.out, "negative fraction") == "0");

    const Run pure = capture([](auto& o, auto& l) {
        return cli::run_witness_scan(scan(kData / "pure16.json", PhotonOpKind::subtract, 1000, 7), o, l);
    });
    CHECK(summary(pure.out, "negative fraction") == "1");

    const Run mixed = capture([](auto& o, auto& l) {
        return cli::run_witness_scan(scan(kData / "mixed16.json", PhotonOpKind::subtract, 1000, 7), o, l);
    });
    const double F = std::stod(summary(mixed.out, "negative fraction"));
    CHECK(F > 0.0);
    CHECK(F < 1.0);
    const Run again = capture([](auto& o, auto& l) {
        return cli::run_witness_scan(scan(kData / "mixed16.json", PhotonOpKind::subtract, 1000, 7, 3), o, l);
    });
    CHECK(again.out == mixed.out);

    CHECK(capture([](auto& o, auto& l) {
              return cli::run_witness_scan(scan(kData / "vacuum1.json", PhotonOpKind::add, 0, 1), o, l);
          }).code == cli::kParseFailure);
}

TEST_CASE("scan records") {
    const CovarianceMatrix V = io::load_state(kData / "pure4.json");
    int resampled = 0;
    const auto recs = cli::witness_scan_records(V, scan("", PhotonOpKind::subtract, 10, 99), resampled);
    REQUIRE(recs.size() == 10);
    for (const cli::ScanRecord& r : recs) {
        CHECK(r.seed == derive_seed(99, r.index));
        CHECK(r.g.norm() == doctest::Approx(1.0));
        CHECK(r.negative == (r.witness > 2.0));
        CHECK(r.mean_photons == doctest::Approx(mean_photon_number(V, ModeVector(r.g))));
    }
    int again = 0;
    const auto recs2 = cli::witness_scan_records(V, scan("", PhotonOpKind::subtract, 10, 99), again);
    for (int i = 0; i < 10; ++i) {
        CHECK(recs2[i].g == recs[i].g);
        CHECK(recs2[i].mu == recs[i].mu);
    }
}

TEST_CASE("purity-scan command") {
    const Run one = capture([](auto& o, auto& l) {
        return cli::run_purity_scan(scan(kData / "squeezed.json", PhotonOpKind::subtract, 10, 1), o, l);
    });
    REQUIRE(one.code == cli::kOk);
    CHECK(data_rows(one.out) == 10);
    for (const std::string& l : lines(one.out)) {
        if (l.empty() || l[0] == '#' || l[0] == 'i') continue;
        const auto c1 = l.find(',', l.find(',') + 1);
        const auto c2 = l.find(',', c1 + 1);
        CHECK(std::stod(l.substr(c1 + 1, c2 - c1 - 1)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::stod(l.substr(c2 + 1)) == doctest::Approx(1.0).epsilon(1e-12));
    }

    cli::ScanOptions sup = scan(kData / "pure4.json", PhotonOpKind::subtract, 3, 1);
    sup.mode = cli::parse_mode_spec({"supermode:1"});
    const Run s = capture([&](auto& o, auto& l) { return cli::run_purity_scan(sup, o, l); });
    REQUIRE(s.code == cli::kOk);
    CHECK(std::abs(std::stod(summary(s.out, "mean mu")) - std::stod(summary(s.out, "mean mu0"))) < 1e-9);

    cli::ScanOptions cmp = scan(kData / "pure4.json", PhotonOpKind::subtract, 200, 5, 2);
    cmp.compare = true;
    const Run c = capture([&](auto& o, auto& l) { return cli::run_purity_scan(cmp, o, l); });
    REQUIRE(c.code == cli::kOk);
    CHECK(data_rows(c.out) == 200);
    const double frac = std::stod(summary(c.out, "fraction mu_subtract <= mu_add"));
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);

    const Run mixed = capture([](auto& o, auto& l) {
        return cli::run_purity_scan(scan(kData / "mixed3.json", PhotonOpKind::add, 5, 1), o, l);
    });
    CHECK(mixed.code == cli::kMixedInput);
    CHECK(mixed.log.find("purify") != std::string::npos);
}

TEST_CASE("purify command") {
    const Run pure = capture([](auto& o, auto& l) { return cli::run_purify(kData / "pure4.json", o, l); });
    REQUIRE(pure.code == cli::kOk);
    CHECK(pure.log == "pure\n");
    const io::RawCovariance out = io::parse_covariance(pure.out);
    CHECK(out.matrix == io::read_covariance(kData / "pure4.json").matrix);
    CHECK(out.metadata["purify"]["hs_norm_ratio"] == "pure");

    const Run th = capture([](auto& o, auto& l) { return cli::run_purify(kData / "thermal2.json", o, l); });
    REQUIRE(th.code == cli::kOk);
    CHECK(th.log.rfind("ratio = ", 0) == 0);
    CHECK((io::parse_covariance(th.out).matrix - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    const Run mx = capture([](auto& o, auto& l) { return cli::run_purify(kData / "mixed16.json", o, l); });
    REQUIRE(mx.code == cli::kOk);
    const CovarianceMatrix Vs(io::parse_covariance(mx.out).matrix);
    CHECK(Vs.is_pure(1e-9));
    CHECK(purity_gaussian(Vs) == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(capture([](auto& o, auto& l) { return cli::run_purify(kData / "unphysical.json", o, l); }).code ==
          cli::kInvalidState);
}

TEST_CASE("oracle-check command") {
    for (const char* preset : {"vacuum-add", "squeezed-subtract", "displaced-add"}) {
        const Run r = capture([&](auto& o, auto& l) { return cli::run_oracle_check({preset, {}, 0}, o, l); });
        CHECK_MESSAGE(r.code == cli::kOk, r.out);
        CHECK(r.out.find("max wigner deviation") != std::string::npos);
    }
    const Run leak = capture([](auto& o, auto& l) {
        return cli::run_oracle_check({"two-mode-random", {}, 8}, o, l);
    });
    CHECK(leak.code == cli::kCutoffLeakage);
    const Run sub = capture([](auto& o, auto& l) {
        return cli::run_oracle_check({"vacuum-add", PhotonOpKind::subtract, 0}, o, l);
    });
    CHECK(sub.code == cli::kUndefinedSubtraction);
    CHECK(capture([](auto& o, auto& l) { return cli::run_oracle_check({"nope", {}, 0}, o, l); }).code ==
          cli::kParseFailure);
}

TEST_CASE("synth command") {
    cli::SynthOptions s;
    s.modes = 3;
    s.squeezing_db = {4.0};
    s.seed = 3;
    const Run a = capture([&](auto& o, auto& l) { return cli::run_synth(s, o, l); });
    const Run b = capture([&](auto& o, auto& l) { return cli::run_synth(s, o, l); });
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);
    CHECK(CovarianceMatrix(io::parse_covariance(a.out).matrix).is_pure(1e-9));
    s.nu = {2.0, 1.0};
    CHECK(capture([&](auto& o, auto& l) { return cli::run_synth(s, o, l); }).code == cli::kParseFailure);
}
