#pragma once

// File formats: headerless numeric CSV (%.17g) and JSON artifacts. Every
// writer goes through a temporary file and a rename.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dagma/datagen.hpp"
#include "dagma/matrix.hpp"
#include "dagma/metrics.hpp"
#include "dagma/optimizer.hpp"

namespace dagma {

using Json = nlohmann::ordered_json;

std::string format_double(double v);

/// Throws Error(io).
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

std::string to_csv(const Matrix& m);
void write_csv(const std::filesystem::path& path, const Matrix& m);
/// Throws Error(io) on unreadable files, ragged rows or non-numeric cells.
Matrix read_csv(const std::filesystem::path& path);

Json to_json(const Matrix& m);
Json to_json(const Adjacency& b);
Matrix matrix_from_json(const Json& j);
Adjacency adjacency_from_json(const Json& j);

Json to_json(const DagmaConfig& cfg);
/// Starts from DagmaConfig::defaults(model) and applies the keys present in
/// j; unknown keys or wrongly typed values throw Error(invalid_config).
DagmaConfig config_from_json(const Json& j, ModelKind model);

Json to_json(const FitResult& fit);
Json to_json(const EvalReport& r);
std::string eval_csv_header();
std::string eval_csv_row(const EvalReport& r);

Json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j);

/// Throws Error(io) when the file is missing or not valid JSON.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace dagma
