#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace tda {

// Splits one CSV line on commas. No quoting support; the formats this tool
// reads and writes never quote fields. Trailing \r is stripped.
std::vector<std::string> split_csv_line(std::string_view line);

// Shortest round-trip decimal representation of a double ("inf" for infinity).
std::string format_double(double v);

// Line-oriented CSV writer with a fixed header. Output is byte-deterministic
// for a given row sequence.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void write_row(const std::vector<std::string>& fields);
    void close();
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

// Header-indexed CSV reader.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    // Column index for name, or -1 if absent.
    int column(std::string_view name) const;
    // Reads the next record; false at EOF. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);
    // 1-based line number of the record last returned by next().
    size_t line_number() const { return line_number_; }

private:
    std::ifstream in_;
    std::vector<std::string> header_;
    size_t line_number_ = 0;
};

}  // namespace tda
