#pragma once

#include <string>
#include <vector>

namespace shellflow {

/// Shortest text that round-trips a double exactly ("%.17g").
std::string format_real(double x);

/// Parses a whole field as a double; throws std::invalid_argument on trailing garbage.
double parse_real(const std::string& text);

/// Splits one CSV line on commas. No quoting support; fields are trimmed.
std::vector<std::string> split_csv(const std::string& line);

/// Reads a text file into lines, dropping a trailing '\r'. Throws std::runtime_error if unreadable.
std::vector<std::string> read_lines(const std::string& path);

/// Writes `text` to `path`, replacing it. Throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace shellflow
