#include "lqgame/spec.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lqgame {

using nlohmann::json;
using nlohmann::ordered_json;

Coefficient Coefficient::constant(Matrix value) {
    Coefficient c;
    c.values_.push_back(std::move(value));
    return c;
}

Coefficient Coefficient::sampled(std::vector<double> times, std::vector<Matrix> values,
                                 Interp interp) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("sampled coefficient needs >= 2 aligned samples");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("sampled coefficient times must increase");
    for (const auto& v : values)
        if (v.rows() != values[0].rows() || v.cols() != values[0].cols())
            throw std::invalid_argument("sampled coefficient values must share one shape");
    Coefficient c;
    c.times_ = std::move(times);
    c.values_ = std::move(values);
    c.interp_ = interp;
    return c;
}

Matrix Coefficient::eval(double t) const {
    if (values_.empty())
        throw std::logic_error("empty coefficient");
    if (is_constant()) return values_[0];
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (interp_ == Interp::previous) return values_[k];
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - w) * values_[k] + w * values_[k + 1];
}

void Coefficient::symmetrize_samples() {
    for (auto& v : values_) v = symmetrize(v);
}

bool Coefficient::all_finite() const {
    for (const auto& v : values_)
        if (!v.all_finite()) return false;
    return true;
}

namespace {

void check_shape(std::vector<std::string>& out, const char* name, const Coefficient& c,
                 std::size_t rows, std::size_t cols) {
    if (c.values().empty()) {
        out.push_back(std::string("missing coefficient ") + name);
        return;
    }
    if (c.rows() != rows || c.cols() != cols)
        out.push_back(std::string("shape mismatch ") + name);
    if (!c.all_finite())
        out.push_back(std::string("non-finite entries in ") + name);
}

void check_symmetric(std::vector<std::string>& out, const char* name, const Coefficient& c) {
    for (const auto& v : c.values()) {
        if (v.asymmetry() > 1e-12 * (1.0 + v.norm_inf())) {
            out.push_back(std::string("asymmetry ") + name);
            return;
        }
    }
}

} // namespace

std::vector<std::string> validate(const GameSpec& spec) {
    std::vector<std::string> v;
    if (spec.n < 1) v.push_back("nonpositive state dimension n");
    if (spec.m1 < 1) v.push_back("nonpositive control dimension m1");
    if (spec.m2 < 1) v.push_back("nonpositive control dimension m2");
    if (!(spec.T > 0.0)) v.push_back("nonpositive horizon");
    if (!v.empty()) return v;

    const auto n = static_cast<std::size_t>(spec.n);
    const auto m1 = static_cast<std::size_t>(spec.m1);
    const auto m2 = static_cast<std::size_t>(spec.m2);
    check_shape(v, "A", spec.A, n, n);
    check_shape(v, "C", spec.C, n, n);
    check_shape(v, "B1", spec.B1, n, m1);
    check_shape(v, "B2", spec.B2, n, m2);
    check_shape(v, "D1", spec.D1, n, m1);
    check_shape(v, "D2", spec.D2, n, m2);
    check_shape(v, "Q", spec.Q, n, n);
    check_shape(v, "R1", spec.R1, m1, m1);
    check_shape(v, "R2", spec.R2, m2, m2);
    if (spec.G.rows() != n || spec.G.cols() != n)
        v.push_back("shape mismatch G");
    else if (!spec.G.all_finite())
        v.push_back("non-finite entries in G");
    else if (spec.G.asymmetry() > 1e-12 * (1.0 + spec.G.norm_inf()))
        v.push_back("asymmetry G");
    check_symmetric(v, "Q", spec.Q);
    check_symmetric(v, "R1", spec.R1);
    check_symmetric(v, "R2", spec.R2);
    return v;
}

SpecValidationError::SpecValidationError(const std::vector<std::string>& vs)
    : std::runtime_error("invalid spec: " + [&] {
          std::string s;
          for (const auto& x : vs) s += (s.empty() ? "" : "; ") + x;
          return s;
      }()),
      violations(vs) {}

namespace {

Matrix parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw SpecParseError("field " + field + " is not a matrix");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw SpecParseError("ragged matrix in field " + field);
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number())
                throw SpecParseError("non-numeric entry in field " + field);
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

Coefficient parse_coefficient(const json& j, const std::string& field) {
    if (j.is_array()) // bare matrix shorthand = constant
        return Coefficient::constant(parse_matrix(j, field));
    if (!j.is_object() || !j.contains("kind"))
        throw SpecParseError("field " + field + " must declare a kind");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        if (!j.contains("value"))
            throw SpecParseError("missing field " + field + ".value");
        return Coefficient::constant(parse_matrix(j.at("value"), field + ".value"));
    }
    if (kind == "sampled") {
        for (const char* req : {"times", "values", "interp"})
            if (!j.contains(req))
                throw SpecParseError("missing field " + field + "." + req);
        std::vector<double> times = j.at("times").get<std::vector<double>>();
        std::vector<Matrix> values;
        for (std::size_t i = 0; i < j.at("values").size(); ++i)
            values.push_back(parse_matrix(j.at("values")[i], field + ".values"));
        const std::string interp = j.at("interp").get<std::string>();
        Coefficient::Interp ip;
        if (interp == "linear") ip = Coefficient::Interp::linear;
        else if (interp == "previous") ip = Coefficient::Interp::previous;
        else throw SpecParseError("unknown interp '" + interp + "' in field " + field);
        try {
            return Coefficient::sampled(std::move(times), std::move(values), ip);
        } catch (const std::invalid_argument& e) {
            throw SpecParseError("field " + field + ": " + e.what());
        }
    }
    throw SpecParseError("unknown kind '" + kind + "' in field " + field);
}

// Symmetric weights tolerate serialization noise; larger defects are
// modeling errors and get rejected by validate().
void symmetrize_weight(Coefficient& c) {
    bool ok = true;
    for (const auto& v : c.values())
        if (v.asymmetry() > 1e-9 * (1.0 + v.norm_inf())) ok = false;
    if (ok) c.symmetrize_samples();
}

} // namespace

GameSpec parse_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SpecParseError(std::string("malformed JSON: ") + e.what());
    }
    for (const char* req : {"n", "m1", "m2", "T", "A", "C", "B1", "B2",
                            "D1", "D2", "Q", "R1", "R2", "G"})
        if (!j.contains(req))
            throw SpecParseError(std::string("missing field ") + req);

    GameSpec s;
    s.n = j.at("n").get<int>();
    s.m1 = j.at("m1").get<int>();
    s.m2 = j.at("m2").get<int>();
    s.T = j.at("T").get<double>();
    s.A = parse_coefficient(j.at("A"), "A");
    s.C = parse_coefficient(j.at("C"), "C");
    s.B1 = parse_coefficient(j.at("B1"), "B1");
    s.B2 = parse_coefficient(j.at("B2"), "B2");
    s.D1 = parse_coefficient(j.at("D1"), "D1");
    s.D2 = parse_coefficient(j.at("D2"), "D2");
    s.Q = parse_coefficient(j.at("Q"), "Q");
    s.R1 = parse_coefficient(j.at("R1"), "R1");
    s.R2 = parse_coefficient(j.at("R2"), "R2");
    s.G = parse_matrix(j.at("G"), "G");

    symmetrize_weight(s.Q);
    symmetrize_weight(s.R1);
    symmetrize_weight(s.R2);
    if (s.G.asymmetry() <= 1e-9 * (1.0 + s.G.norm_inf())) s.G = symmetrize(s.G);

    const auto violations = validate(s);
    if (!violations.empty())
        throw SpecValidationError(violations);
    return s;
}

GameSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SpecParseError("cannot open spec file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

namespace {

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

ordered_json coefficient_to_json(const Coefficient& c) {
    ordered_json j;
    if (c.is_constant()) {
        j["kind"] = "constant";
        j["value"] = matrix_to_json(c.values()[0]);
        return j;
    }
    j["kind"] = "sampled";
    j["times"] = c.times();
    ordered_json vals = ordered_json::array();
    for (const auto& v : c.values()) vals.push_back(matrix_to_json(v));
    j["values"] = vals;
    j["interp"] = c.interp() == Coefficient::Interp::linear ? "linear" : "previous";
    return j;
}

} // namespace

std::string spec_to_json(const GameSpec& s) {
    ordered_json j;
    j["n"] = s.n;
    j["m1"] = s.m1;
    j["m2"] = s.m2;
    j["T"] = s.T;
    j["A"] = coefficient_to_json(s.A);
    j["C"] = coefficient_to_json(s.C);
    j["B1"] = coefficient_to_json(s.B1);
    j["B2"] = coefficient_to_json(s.B2);
    j["D1"] = coefficient_to_json(s.D1);
    j["D2"] = coefficient_to_json(s.D2);
    j["Q"] = coefficient_to_json(s.Q);
    j["R1"] = coefficient_to_json(s.R1);
    j["R2"] = coefficient_to_json(s.R2);
    j["G"] = matrix_to_json(s.G);
    return j.dump(2);
}

void write_spec(const GameSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write spec file: " + path);
    out << spec_to_json(spec) << "\n";
}

GameSpec gallery(const std::string& name) {
    auto scalar = [](double v) { return Coefficient::constant(Matrix{{v}}); };
    GameSpec s;
    if (name == "EX1") {
        s.n = s.m1 = s.m2 = 1;
        s.T = 1.0;
        s.A = scalar(0.0);
        s.C = scalar(0.0);
        s.B1 = scalar(0.0);
        s.B2 = scalar(1.0);
        s.D1 = scalar(0.0);
        s.D2 = scalar(0.0);
        s.Q = scalar(0.0);
        s.R1 = scalar(1.0);
        s.R2 = scalar(-1.0);
        s.G = Matrix{{0.0}};
        return s;
    }
    if (name == "EX2") {
        s.n = s.m1 = s.m2 = 1;
        s.T = 4.0;
        s.A = scalar(0.0);
        s.C = scalar(0.0);
        s.B1 = scalar(1.0);
        s.B2 = scalar(-1.0);
        s.D1 = scalar(0.0);
        s.D2 = scalar(0.0);
        s.Q = scalar(1.0);
        s.R1 = scalar(1.0);
        s.R2 = scalar(-2.0);
        s.G = Matrix{{0.0}};
        return s;
    }
    if (name == "RAND2") {
        s.n = 2;
        s.m1 = s.m2 = 1;
        s.T = 1.0;
        s.A = Coefficient::constant(Matrix{{0.2, 0.1}, {-0.1, 0.1}});
        s.C = Coefficient::constant(Matrix{{0.1, 0.2}, {0.15, -0.1}});
        s.B1 = Coefficient::constant(Matrix{{1.0}, {0.5}});
        s.B2 = Coefficient::constant(Matrix{{0.4}, {0.8}});
        s.D1 = Coefficient::constant(Matrix{{0.3}, {0.15}});
        s.D2 = Coefficient::constant(Matrix{{0.2}, {0.25}});
        s.Q = Coefficient::constant(Matrix{{1.0, 0.2}, {0.2, 0.8}});
        s.R1 = scalar(1.0);
        s.R2 = scalar(-2.0);
        s.G = Matrix{{0.3, 0.0}, {0.0, 0.3}};
        return s;
    }
    throw std::invalid_argument("unknown gallery spec: " + name);
}

} // namespace lqgame
