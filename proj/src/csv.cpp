#include "tda/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "tda/errors.hpp"

namespace tda {

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open for writing: " + path.string());
    write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw DataError("write failed: " + path_.string());
}

CsvReader::CsvReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in_, line)) throw DataError("empty file, header row expected: " + path.string());
    line_number_ = 1;
    header_ = split_csv_line(line);
}

int CsvReader::column(std::string_view name) const {
    for (size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return static_cast<int>(i);
    return -1;
}

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (line.empty() || line == "\r") continue;
        fields = split_csv_line(line);
        return true;
    }
    return false;
}

}  // namespace tda
