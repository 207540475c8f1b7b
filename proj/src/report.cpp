#include "lqgame/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lqgame {

std::string format_json_number(double v) {
    if (!std::isfinite(v)) return "null"; // JSON has no infinity literal
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_csv_number(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void JsonWriter::separator() {
    if (pending_key_) {
        pending_key_ = false;
        return;
    }
    if (!counts_.empty() && counts_.back() > 0) out_ += ',';
    if (!counts_.empty()) ++counts_.back();
}

JsonWriter& JsonWriter::begin_object() {
    separator();
    out_ += '{';
    counts_.push_back(0);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    counts_.pop_back();
    out_ += '}';
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    separator();
    out_ += '[';
    counts_.push_back(0);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    counts_.pop_back();
    out_ += ']';
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    if (!counts_.empty() && counts_.back() > 0) out_ += ',';
    if (!counts_.empty()) ++counts_.back();
    out_ += '"';
    out_ += k;
    out_ += "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    separator();
    out_ += format_json_number(v);
    return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<long long>(v)); }

JsonWriter& JsonWriter::value(long long v) {
    separator();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    separator();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    separator();
    out_ += '"';
    for (char c : v) {
        if (c == '"' || c == '\\') out_ += '\\';
        out_ += c;
    }
    out_ += '"';
    return *this;
}

void write_path_json(const std::string& filename, const MatrixPath& path) {
    JsonWriter w;
    w.begin_object();
    w.key("rows").value(static_cast<int>(path.rows()));
    w.key("cols").value(static_cast<int>(path.cols()));
    w.key("nodes").begin_array();
    const TimeGrid& grid = path.grid();
    for (int k = 0; k <= grid.steps; ++k) {
        w.begin_object();
        w.key("t").value(grid.node(k));
        w.key("m").begin_array();
        const Matrix& m = path.at_node(k);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            w.begin_array();
            for (std::size_t j = 0; j < m.cols(); ++j) w.value(m(i, j));
            w.end_array();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + filename);
    out << w.str() << "\n";
}

void write_path_csv(const std::string& filename, const MatrixPath& path) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + filename);
    out << "t";
    for (std::size_t i = 0; i < path.rows(); ++i)
        for (std::size_t j = 0; j < path.cols(); ++j)
            out << ",m_" << i << "_" << j;
    out << "\n";
    const TimeGrid& grid = path.grid();
    for (int k = 0; k <= grid.steps; ++k) {
        out << format_csv_number(grid.node(k));
        const Matrix& m = path.at_node(k);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                out << "," << format_csv_number(m(i, j));
        out << "\n";
    }
}

} // namespace lqgame
