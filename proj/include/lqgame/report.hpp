#pragma once

#include "lqgame/grid.hpp"

#include <string>
#include <vector>

namespace lqgame {

// Deterministic number formatting for report artifacts: JSON uses 17
// significant digits, CSV uses the shortest round-trip decimal. Identical
// inputs therefore produce byte-identical files.
std::string format_json_number(double v);
std::string format_csv_number(double v);

// Minimal streaming JSON writer with caller-controlled field order.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(int v);
    JsonWriter& value(long long v);
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    const std::string& str() const { return out_; }

private:
    void separator();
    std::string out_;
    std::vector<int> counts_;
    bool pending_key_ = false;
};

// One row per node: t followed by the matrix entries in row-major order.
void write_path_csv(const std::string& filename, const MatrixPath& path);

// The same table as JSON: {"rows":R,"cols":C,"nodes":[{"t":...,"m":[[...]]},...]}.
void write_path_json(const std::string& filename, const MatrixPath& path);

} // namespace lqgame
