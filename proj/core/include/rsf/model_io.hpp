#pragma once

// Versioned binary container holding a fitted value model and the policies it
// was trained with. Layout is documented in docs/model_format.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rsf/policy.hpp"
#include "rsf/value.hpp"

namespace rsf {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelBundle {
  ValueModel value;
  std::optional<Policy> nominal;
  std::optional<Policy> safe;
};

std::string encode_bundle(const ModelBundle& bundle);
ModelBundle decode_bundle(const std::string& bytes);

/// Throws IoError when the file cannot be written.
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
/// Throws MissingModelError when the file does not exist, IoError when it is malformed.
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace rsf
