#include "reserve_lasso/csv.hpp"

#include <charconv>
#include <cmath>

#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{}) throw Error("format_number: conversion failed");
    return std::string(buffer, end);
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
    bool first = true;
    for (auto name : header) {
        if (!first) out_ << ',';
        out_ << name;
        first = false;
    }
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    if (filled_ > 0) out_ << ',';
    out_ << text;
    ++filled_;
    return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(std::string_view(format_number(value))); }
CsvWriter& CsvWriter::cell(int value) { return cell(std::string_view(std::to_string(value))); }
CsvWriter& CsvWriter::cell(long value) { return cell(std::string_view(std::to_string(value))); }
CsvWriter& CsvWriter::cell(std::size_t value) {
    return cell(std::string_view(std::to_string(value)));
}

void CsvWriter::end_row() {
    if (filled_ != columns_)
        throw Error("CsvWriter: row has " + std::to_string(filled_) + " cells, header has " +
                    std::to_string(columns_));
    out_ << '\n';
    filled_ = 0;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace reserve_lasso
