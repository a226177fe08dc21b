#pragma once

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

/// Minimal CSV writer: header row plus numeric rows, '.' decimal separator,
/// 17 significant digits so doubles round-trip exactly.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path), columns_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        out_.imbue(std::locale::classic());
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_)
            throw std::invalid_argument("CSV row width does not match header");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace qwalk
