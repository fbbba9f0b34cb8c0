#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace tcg {

// Reads and parses a JSON file. IoError if unreadable, ParseError if malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Writes bytes exactly; creates parent directories. IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// Compact dump with a trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Zero-padded six-digit sample file stem, e.g. 000042.
std::string sample_stem(std::size_t index);

// Regular *.json files of a directory keyed by file name. IoError if the
// directory is missing or unreadable.
std::map<std::string, std::filesystem::path> list_graph_files(const std::filesystem::path& dir);

}  // namespace tcg
