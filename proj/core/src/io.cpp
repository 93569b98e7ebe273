#include "pnsim/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pnsim {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::string> format_doubles(const std::vector<double>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(format_double(x));
    return out;
}

std::string render_csv(const std::vector<CsvColumn>& columns) {
    if (columns.empty()) return "";
    const std::size_t rows = columns.front().cells.size();
    for (const auto& c : columns)
        if (c.cells.size() != rows)
            throw std::runtime_error("CSV columns have unequal lengths");
    std::ostringstream out;
    for (std::size_t j = 0; j < columns.size(); ++j)
        out << (j ? "," : "") << columns[j].header;
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << columns[j].cells[i];
        out << '\n';
    }
    return out.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string partial = path + ".partial";
    {
        std::ofstream f(partial, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + partial);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + partial);
    }
    std::error_code ec;
    std::filesystem::rename(partial, path, ec);
    if (ec) throw std::runtime_error("rename failed: " + path + ": " + ec.message());
}

} // namespace pnsim
