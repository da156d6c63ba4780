#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace reserve_lasso {

// Shortest decimal representation that round-trips exactly.
std::string format_number(double value);

// Minimal CSV row writer. Numbers go through format_number so written tables
// are byte-stable and re-readable without loss.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double value);
    CsvWriter& cell(int value);
    CsvWriter& cell(long value);
    CsvWriter& cell(std::size_t value);
    void end_row();

private:
    std::ostream& out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

// Splits one CSV line on commas (no quoting support; the formats written by
// this library never need it).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace reserve_lasso
