#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "monoreg/grid.hpp"
#include "monoreg/posterior.hpp"
#include "monoreg/testing.hpp"

namespace monoreg {

/** Reads a dataset from CSV.
 *
 * A header row is required and must name x1..xd and y (any order, no other columns). Blank lines
 * are ignored. Errors are ParseError carrying the 1-based line number; a missing column is
 * reported by name.
 */
Dataset read_dataset_csv(std::istream& in);

/// {"x": [[x_11, ..., x_1d], ...], "y": [...]}.
Dataset dataset_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Dataset& data);

/// Dispatches on the extension: ".json" is JSON, anything else CSV.
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

/** Prior from a JSON object or from "key = value" lines (# starts a comment).
 *
 * Keys: zeta, lambda_sq (scalar or array), beta1, beta2, b_J. Missing keys keep their defaults;
 * unknown keys are a ConfigError.
 */
PriorConfig prior_from_json(const nlohmann::json& j);
PriorConfig parse_prior(const std::string& text);
PriorConfig load_prior_file(const std::filesystem::path& path);
nlohmann::json to_json(const PriorConfig& prior);

/** {"d": d, "J": J, "axis_order": "row-major, axis 1 slowest", "theta": [...]}.
 *
 * theta is flat in the GridSpec row-major order.
 */
nlohmann::json to_json(const StepFunction& f);
StepFunction step_function_from_json(const nlohmann::json& j);

/// "plug-in", "inverse-gamma" or "known:<sigma>".
SigmaMode parse_sigma_mode(const std::string& text);
std::string to_string(const SigmaMode& mode);

/// {reject, posterior_prob, threshold, J_used, n, d, seed}.
nlohmann::json to_json(const TestResult& r);

/// Array of {"sigma": s, "theta": [...]} objects.
nlohmann::json draws_to_json(const std::vector<PosteriorDraw>& draws);

nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace monoreg
