#pragma once

// CSV helpers. Doubles are written in shortest round-trip form so files
// re-read to the exact IEEE-754 values.

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace raps {

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path) {
        if (!out_)
            throw std::runtime_error("CsvWriter: cannot open " + path);
        out_ << header << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(cells[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

} // namespace raps
