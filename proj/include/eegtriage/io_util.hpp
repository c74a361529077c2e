#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eegtriage {

// Shortest round-trip decimal form (to_chars); locale-free and deterministic,
// so artifacts rewritten from parsed values are byte-identical.
std::string format_double(double v);
double parse_double(const std::string& s);          // throws MalformedField
long long parse_int(const std::string& s);          // throws MalformedField

std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv(const std::vector<std::string>& fields);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws MalformedField
};

CsvTable read_csv(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// FNV-1a, used for manifest / split fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);
// exact match for literals so they never fall into the (void*, len) overload
std::uint64_t fnv1a(const char* s, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Run fn(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
// Work items must be independent; exceptions are rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace eegtriage
