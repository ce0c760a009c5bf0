#include "lassoinf/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace lassoinf::cli {

std::string format_real(double value) {
    if (!std::isfinite(value)) {
        throw EmissionError("CSV emission: non-finite value is not representable");
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    if (res.ec != std::errc{}) {
        throw EmissionError("CSV emission: could not format value");
    }
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string render_cell(const CsvCell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) return format_real(*d);
    return quote_if_needed(std::get<std::string>(cell));
}

}  // namespace

std::string render_csv(const CsvTable& table) {
    if (table.header.empty()) {
        throw EmissionError("CSV emission: empty header");
    }
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += quote_if_needed(table.header[i]);
    }
    out += '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw EmissionError("CSV emission: record " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                " fields, schema has " + std::to_string(table.header.size()));
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += render_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& target, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) {
            throw EmissionError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
        }
    }
    fs::path temp = target;
    temp += ".tmp";
    {
        std::ofstream file(temp, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw EmissionError("cannot open " + temp.string() + " for writing");
        }
        file.write(content.data(), static_cast<std::streamsize>(content.size()));
        file.flush();
        if (!file) {
            throw EmissionError("write failed for " + temp.string());
        }
    }
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp, ec);
        throw EmissionError("cannot rename onto " + target.string());
    }
}

void emit_csv(const CsvTable& table, const std::filesystem::path& target) {
    write_atomic(target, render_csv(table));
}

}  // namespace lassoinf::cli
