#pragma once

#include "modelsync/model.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace modelsync {

inline constexpr int kSnapshotFormatVersion = 1;

/// The model file format. Collections are arrays in id order, objects have
/// sorted keys, so dumping the result is canonical.
nlohmann::json document_to_json(const ModelDocument& doc);

/// Throws FormatVersionMismatch for a foreign format or version.
ModelDocument document_from_json(const nlohmann::json& j);

std::string canonical_text(const ModelDocument& doc);

/// Lowercase hex SHA-256 of the canonical serialization.
std::string sha256_hex(std::string_view bytes);

} // namespace modelsync
