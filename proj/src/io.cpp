#include "nongauss/io.hpp"

#include "nongauss/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nongauss::io {

using nlohmann::json;

namespace {

double as_number(const json& v, const char* what) {
    if (!v.is_number()) throw ParseError(std::string("covariance file: non-numeric entry in ") + what);
    return v.get<double>();
}

std::string require_string(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("covariance file: missing field '") + key + "'");
    if (!doc[key].is_string())
        throw ParseError(std::string("covariance file: field '") + key + "' must be a string");
    return doc[key].get<std::string>();
}

} // namespace

RawCovariance parse_covariance(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("covariance file: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("covariance file: top level must be an object");

    const std::string ordering = require_string(doc, "ordering");
    if (ordering != kOrdering)
        throw ParseError("covariance file: ordering '" + ordering + "' not supported (need xxpp)");
    const std::string scaling = require_string(doc, "scaling");
    if (scaling != kScaling)
        throw ParseError("covariance file: scaling '" + scaling + "' not supported (need shot-noise-1)");

    if (!doc.contains("modes") || !doc["modes"].is_number_integer())
        throw ParseError("covariance file: missing integer field 'modes'");
    RawCovariance raw;
    raw.modes = doc["modes"].get<int>();
    if (raw.modes < 1) throw ParseError("covariance file: 'modes' must be positive");
    const int n = 2 * raw.modes;

    if (!doc.contains("matrix") || !doc["matrix"].is_array())
        throw ParseError("covariance file: missing array field 'matrix'");
    const json& rows = doc["matrix"];
    if (static_cast<int>(rows.size()) != n)
        throw ParseError("covariance file: matrix must have 2*modes rows");
    raw.matrix.resize(n, n);
    for (int i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
            throw ParseError("covariance file: matrix row " + std::to_string(i) + " must have 2*modes entries");
        for (int j = 0; j < n; ++j) raw.matrix(i, j) = as_number(rows[i][j], "matrix");
    }
    raw.mean = Vec::Zero(n);
    if (doc.contains("mean")) {
        const json& mean = doc["mean"];
        if (!mean.is_array() || static_cast<int>(mean.size()) != n)
            throw ParseError("covariance file: mean must have 2*modes entries");
        for (int i = 0; i < n; ++i) raw.mean(i) = as_number(mean[i], "mean");
    }
    if (doc.contains("metadata")) {
        if (!doc["metadata"].is_object()) throw ParseError("covariance file: metadata must be an object");
        raw.metadata = doc["metadata"];
    }
    return raw;
}

RawCovariance read_covariance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open covariance file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_covariance(buf.str());
}

CovarianceMatrix load_state(const std::filesystem::path& path) {
    RawCovariance raw = read_covariance(path);
    return CovarianceMatrix(std::move(raw.matrix), std::move(raw.mean));
}

std::string format_covariance(const Mat& V, const Vec& mean, const json& metadata) {
    const Eigen::Index n = V.rows();
    nlohmann::ordered_json doc;
    doc["modes"] = n / 2;
    doc["ordering"] = kOrdering;
    doc["scaling"] = kScaling;
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < n; ++j) row.push_back(V(i, j));
        rows.push_back(std::move(row));
    }
    doc["matrix"] = std::move(rows);
    if (mean.size() == n && !mean.isZero(0.0)) {
        auto m = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < n; ++i) m.push_back(mean(i));
        doc["mean"] = std::move(m);
    }
    if (!metadata.empty()) doc["metadata"] = nlohmann::ordered_json::parse(metadata.dump());
    return doc.dump(2) + "\n";
}

void write_covariance(const std::filesystem::path& path, const Mat& V, const Vec& mean,
                      const json& metadata) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write covariance file " + path.string());
    out << format_covariance(V, mean, metadata);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace nongauss::io
