#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wg/model.hpp"
#include "wg/potential_table.hpp"

namespace wg {

inline constexpr int kConfigVersion = 1;

// Parsed run configuration. Every field has a default so a config may be as
// small as {"model": {...}}; command-line flags override afterwards.
struct RunConfig {
    int version = kConfigVersion;
    nlohmann::json model_json;
    ModelPtr model;

    std::vector<std::vector<int>> boxes;  // extents; several for volume studies
    std::vector<int> window;              // extents of the window at the box corner; empty = box
    std::string bc = "default";           // default | free | plus | minus
    std::string alpha = "IP";             // IP | vacuum
    int vacuum_index = 0;                 // disorder index of the vacuum value

    std::optional<std::uint64_t> seed;
    std::size_t samples = 1000;
    std::size_t trials = 100;
    double tol = 1e-9;
    std::string out = "out";

    std::vector<int> radii{1, 2, 3, 4};
    std::vector<int> separations{1, 2, 3, 4};
    std::string regroup = "none";  // none | kozlov | shell
    double dilute_J = 0.8;         // dilute-coeffs when the model is not dilute

    nlohmann::json to_json() const;
};

// Reads a config; ConfigError carries "source:line:column: message" for
// syntax errors and "source: near line N: /json/pointer: message" otherwise.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

// Model section alone ({"model": "rfim", ...} object).
ModelSpec model_from_json(const nlohmann::json& j);

// "3x3", "12", "2x3x4"
std::vector<int> parse_extents(const std::string& s);

BoundaryCondition make_boundary(const ModelSpec& spec, const std::string& name);
NormalizingMeasure make_alpha(const RunConfig& cfg, std::size_t box_size);

}  // namespace wg
