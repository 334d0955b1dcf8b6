#pragma once

// Covariance file format (JSON):
//
//   {
//     "modes": 2,
//     "ordering": "xxpp",
//     "scaling": "shot-noise-1",
//     "matrix": [[...], ...],          // 2m rows of 2m numbers
//     "mean": [...],                    // optional, 2m numbers
//     "metadata": {"label": "...", "source": "..."}   // optional
//   }
//
// "ordering" and "scaling" are mandatory; any other value is rejected.

#include "nongauss/gaussian.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace nongauss::io {

inline constexpr std::string_view kOrdering = "xxpp";
inline constexpr std::string_view kScaling = "shot-noise-1";

/// File contents after format checks but before physicality validation.
struct RawCovariance {
    int modes = 0;
    Mat matrix;
    Vec mean;
    nlohmann::json metadata = nlohmann::json::object();
};

/// Throws ParseError on malformed JSON, missing or mismatched conventions,
/// or wrong shapes.
RawCovariance parse_covariance(std::string_view text);
RawCovariance read_covariance(const std::filesystem::path& path);

/// Parses and validates (ValidationError / PhysicalityError on invalid state).
CovarianceMatrix load_state(const std::filesystem::path& path);

std::string format_covariance(const Mat& V, const Vec& mean,
                              const nlohmann::json& metadata = nlohmann::json::object());
void write_covariance(const std::filesystem::path& path, const Mat& V, const Vec& mean,
                      const nlohmann::json& metadata = nlohmann::json::object());

/// %.17g, the format used for every number in CSV output.
std::string fmt(double x);

} // namespace nongauss::io
