#ifndef TSHUNT_CSV_HPP
#define TSHUNT_CSV_HPP

#include <cstdio>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tshunt {

/// Fixed 12-significant-digit rendering, independent of stream state.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string> cols) {
        bool first = true;
        for (const auto& c : cols) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

    // Empty fields for missing values.
    void row(const std::vector<std::optional<double>>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            if (values[i]) out_ << format_number(*values[i]);
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values) {
        std::vector<std::optional<double>> v(values.begin(), values.end());
        row(v);
    }

private:
    std::ostream& out_;
};

}  // namespace tshunt

#endif  // TSHUNT_CSV_HPP
