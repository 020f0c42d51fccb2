#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "locodl/harness.hpp"

namespace locodl::cli {

/// One [method:<label>] block resolved into a full experiment configuration.
struct MethodBlock {
  std::string label;
  ExperimentConfig config;
};

/// Parsed experiment file. Grammar: docs/config_format.md.
struct ConfigFile {
  std::filesystem::path path;
  std::string text;
  std::string content_hash;  // git blob hash of text
  std::vector<MethodBlock> methods;
};

/// Parses config text; relative dataset paths resolve against base_dir.
/// Throws ParseError / InputError.
ConfigFile parse_config(const std::string& text, const std::filesystem::path& base_dir);
ConfigFile load_config(const std::filesystem::path& path);

/// SHA-1 of "blob <size>\0<content>", hex encoded (what `git hash-object` prints).
std::string git_blob_hash(const std::string& content);

}  // namespace locodl::cli
