#include "wcpd/io.hpp"

#include "wcpd/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wcpd::io {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) {
        ++a;
    }
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) {
        --b;
    }
    return std::string{s.substr(a, b - a)};
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(std::string_view{line}.substr(start, comma == std::string::npos ? std::string::npos
                                                                                           : comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

bool parse_number(const std::string& field, double& value) {
    if (field.empty()) {
        return false;
    }
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc{} && ptr == last;
}

std::uint16_t le16(const std::string& b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t le32(const std::string& b, std::size_t at) {
    return static_cast<std::uint32_t>(le16(b, at)) | (static_cast<std::uint32_t>(le16(b, at + 2)) << 16);
}

void put16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& b, std::uint32_t v) {
    put16(b, static_cast<std::uint16_t>(v & 0xffff));
    put16(b, static_cast<std::uint16_t>(v >> 16));
}

std::string encoding_name(std::uint16_t format, std::uint16_t bits) {
    switch (format) {
    case 1:
        return std::to_string(bits) + "-bit integer PCM";
    case 2:
        return "Microsoft ADPCM";
    case 3:
        return std::to_string(bits) + "-bit IEEE float";
    case 6:
        return "A-law";
    case 7:
        return "mu-law";
    case 0x11:
        return "IMA ADPCM";
    case 0x55:
        return "MPEG layer 3";
    default:
        return "format tag " + std::to_string(format) + " (" + std::to_string(bits) + "-bit)";
    }
}

} // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in{text};
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (first) {
            first = false;
            width = fields.size();
            table.columns.resize(width);
            std::vector<double> values(width);
            bool numeric = true;
            for (std::size_t i = 0; i < width; ++i) {
                numeric = numeric && parse_number(fields[i], values[i]);
            }
            if (!numeric) {
                for (const auto& f : fields) {
                    if (f.empty()) {
                        throw ParseError("empty column name in CSV header", line_no);
                    }
                }
                table.header = std::move(fields);
                continue;
            }
            for (std::size_t i = 0; i < width; ++i) {
                table.header.push_back("c" + std::to_string(i));
            }
        }
        if (fields.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t i = 0; i < width; ++i) {
            double v = 0.0;
            if (!parse_number(fields[i], v)) {
                throw ParseError("field " + std::to_string(i + 1) + " is not a number: '" + fields[i] + "'", line_no);
            }
            if (!std::isfinite(v)) {
                throw ParseError("field " + std::to_string(i + 1) + " is not finite", line_no);
            }
            table.columns[i].push_back(v);
        }
    }
    if (table.columns.empty() || table.rows() == 0) {
        throw ParseError("CSV contains no data rows", line_no);
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path));
}

std::vector<std::vector<double>> trajectory_channels(const CsvTable& table) {
    std::size_t skip = (!table.header.empty() && table.header.front() == "t") ? 1 : 0;
    if (table.columns.size() <= skip) {
        throw InvalidInput("CSV has no data columns besides the time index");
    }
    return {table.columns.begin() + static_cast<std::ptrdiff_t>(skip), table.columns.end()};
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Audio parse_wav(const std::string& b) {
    if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
        throw ParseError("not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    while (pos + 8 <= b.size()) {
        const std::string id = b.substr(pos, 4);
        const std::uint32_t size = le32(b, pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > b.size()) {
            throw ParseError("WAV chunk '" + id + "' runs past the end of the file");
        }
        if (id == "fmt ") {
            if (size < 16) {
                throw ParseError("WAV fmt chunk too short");
            }
            format = le16(b, body);
            channels = le16(b, body + 2);
            rate = le32(b, body + 4);
            bits = le16(b, body + 14);
            if (format == 0xFFFE && size >= 40) {
                format = le16(b, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) {
                throw ParseError("WAV data chunk precedes fmt chunk");
            }
            const bool pcm16 = format == 1 && bits == 16;
            const bool float32 = format == 3 && bits == 32;
            if (!pcm16 && !float32) {
                throw ParseError("unsupported WAV encoding: " + encoding_name(format, bits) +
                                 "; expected 16-bit integer PCM or 32-bit IEEE float");
            }
            if (channels != 1) {
                throw InvalidInput("WAV has " + std::to_string(channels) + " channels; only mono audio is supported");
            }
            if (rate == 0) {
                throw ParseError("WAV sample rate is zero");
            }
            Audio audio;
            audio.sample_rate = rate;
            const std::size_t width = bits / 8;
            const std::size_t count = size / width;
            audio.samples.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t at = body + i * width;
                if (pcm16) {
                    const auto v = static_cast<std::int16_t>(le16(b, at));
                    audio.samples.push_back(static_cast<double>(v) / 32768.0);
                } else {
                    const std::uint32_t raw = le32(b, at);
                    float f = 0.0F;
                    std::memcpy(&f, &raw, sizeof f);
                    if (!std::isfinite(f)) {
                        throw ParseError("WAV sample " + std::to_string(i) + " is not finite");
                    }
                    audio.samples.push_back(static_cast<double>(f));
                }
            }
            return audio;
        }
        pos = body + size + (size & 1U);
    }
    throw ParseError(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

Audio read_wav(const std::filesystem::path& path) {
    return parse_wav(read_file(path));
}

std::string encode_wav(const std::vector<double>& samples, std::uint32_t sample_rate, bool float32) {
    const std::uint16_t bits = float32 ? 32 : 16;
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * (bits / 8));
    std::string b = "RIFF";
    put32(b, 36 + data_size);
    b += "WAVEfmt ";
    put32(b, 16);
    put16(b, float32 ? 3 : 1);
    put16(b, 1);
    put32(b, sample_rate);
    put32(b, sample_rate * (bits / 8));
    put16(b, static_cast<std::uint16_t>(bits / 8));
    put16(b, bits);
    b += "data";
    put32(b, data_size);
    for (double s : samples) {
        if (float32) {
            const auto f = static_cast<float>(s);
            std::uint32_t raw = 0;
            std::memcpy(&raw, &f, sizeof raw);
            put32(b, raw);
        } else {
            const double clipped = std::max(-1.0, std::min(1.0, s));
            const auto v = static_cast<std::int16_t>(std::lround(clipped * 32767.0));
            put16(b, static_cast<std::uint16_t>(v));
        }
    }
    return b;
}

} // namespace wcpd::io
