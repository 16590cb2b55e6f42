// csv.hpp — RFC-4180-style CSV output ('.' decimal separator, complex values
// split into _re/_im columns). Bodies are deterministic for fixed inputs.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decolab/core.hpp"

namespace decolab::csv {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("csv: cannot open " + path);
    }

    void header(const std::vector<std::string>& cols) {
        write_row_raw(cols);
    }

    class Row {
    public:
        explicit Row(Writer& w) : w_(w) {}
        Row& add(const std::string& s) { cells_.push_back(s); return *this; }
        Row& add(double v) { cells_.push_back(format_double(v)); return *this; }
        Row& add(std::size_t v) { cells_.push_back(std::to_string(v)); return *this; }
        Row& add(int v) { cells_.push_back(std::to_string(v)); return *this; }
        Row& add(Complex v) {
            cells_.push_back(format_double(v.real()));
            cells_.push_back(format_double(v.imag()));
            return *this;
        }
        ~Row() { w_.write_row_raw(cells_); }
    private:
        Writer& w_;
        std::vector<std::string> cells_;
    };

    Row row() { return Row(*this); }

private:
    friend class Row;
    void write_row_raw(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(cells[i]);
        }
        out_ << "\r\n";
    }

    static std::string escape(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        q += '"';
        return q;
    }

    std::ofstream out_;
};

} // namespace decolab::csv
