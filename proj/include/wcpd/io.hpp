#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wcpd::io {

/// Numeric CSV: optional header row, one column per variable.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

/// Reads a numeric CSV. A first row that does not parse as numbers is taken
/// as the header; otherwise columns are named c0, c1, ... Blank lines are
/// skipped. Throws ParseError with the 1-based line number on malformed rows
/// and IoError when the file cannot be opened.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// Trajectory channels of a CSV: every column except a leading one named "t".
std::vector<std::vector<double>> trajectory_channels(const CsvTable& table);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Writes `contents` to `path`, creating parent directories. Throws IoError naming the path.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Mono audio decoded to doubles in [-1, 1].
struct Audio {
    std::vector<double> samples;
    double sample_rate = 0.0;
};

/// Reads a RIFF/WAVE file holding 16-bit integer PCM or 32-bit IEEE float
/// mono audio. Other encodings raise ParseError naming the encoding;
/// multichannel input raises InvalidInput.
Audio read_wav(const std::filesystem::path& path);
Audio parse_wav(const std::string& bytes);

/// Encodes mono samples as a WAV file (16-bit PCM or 32-bit float).
std::string encode_wav(const std::vector<double>& samples, std::uint32_t sample_rate, bool float32);

} // namespace wcpd::io
