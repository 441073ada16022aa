#include "monoreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "monoreg/error.hpp"

namespace monoreg {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

bool parse_double(const std::string& text, double& value) {
    if (text.empty()) {
        return false;
    }
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') {
        ++begin;
    }
    const auto res = std::from_chars(begin, end, value);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(value);
}

/// Returns k for "x<k>" with k >= 1, else 0.
std::size_t x_column_index(const std::string& name) {
    if (name.size() < 2 || name[0] != 'x') {
        return 0;
    }
    std::size_t k = 0;
    const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (res.ec != std::errc() || res.ptr != name.data() + name.size() || name[1] == '0') {
        return 0;
    }
    return k;
}

std::vector<double> number_or_array(const nlohmann::json& v, const char* key) {
    if (v.is_number()) {
        return {v.get<double>()};
    }
    if (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_number(); })) {
        return v.get<std::vector<double>>();
    }
    throw ConfigError(std::string("prior key '") + key + "' must be a number or a non-empty array of numbers");
}

double number(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) {
        throw ConfigError(std::string("prior key '") + key + "' must be a number");
    }
    return v.get<double>();
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split(line, ',');
            break;
        }
    }
    if (header.empty()) {
        throw ParseError("empty input: a header naming x1..xd and y is required", line_no == 0 ? 1 : line_no);
    }
    const std::size_t header_line = line_no;

    std::map<std::string, std::size_t> position;
    std::size_t d = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name != "y" && x_column_index(name) == 0) {
            throw ParseError("unexpected column '" + name + "' (expected x1..xd and y)", header_line);
        }
        if (!position.emplace(name, c).second) {
            throw ParseError("duplicate column '" + name + "'", header_line);
        }
        d = std::max(d, x_column_index(name));
    }
    if (!position.count("y")) {
        throw ParseError("missing column 'y'", header_line);
    }
    if (d == 0) {
        throw ParseError("missing column 'x1'", header_line);
    }
    std::vector<std::size_t> x_pos(d);
    for (std::size_t k = 1; k <= d; ++k) {
        const auto it = position.find("x" + std::to_string(k));
        if (it == position.end()) {
            throw ParseError("missing column 'x" + std::to_string(k) + "'", header_line);
        }
        x_pos[k - 1] = it->second;
    }
    const std::size_t y_pos = position.at("y");

    std::vector<double> x;
    std::vector<double> y;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t k = 0; k < d; ++k) {
            double v = 0.0;
            if (!parse_double(fields[x_pos[k]], v)) {
                throw ParseError("x" + std::to_string(k + 1) + ": not a finite number: '" + fields[x_pos[k]] + "'",
                                 line_no);
            }
            if (v < 0.0 || v > 1.0) {
                throw ParseError("x" + std::to_string(k + 1) + " = " + fields[x_pos[k]] + " lies outside [0, 1]",
                                 line_no);
            }
            x.push_back(v);
        }
        double v = 0.0;
        if (!parse_double(fields[y_pos], v)) {
            throw ParseError("y: not a finite number: '" + fields[y_pos] + "'", line_no);
        }
        y.push_back(v);
    }
    if (y.empty()) {
        throw ParseError("no data rows after the header", header_line);
    }
    return Dataset(d, std::move(x), std::move(y));
}

Dataset dataset_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("x") || !j.contains("y")) {
        throw ParseError("dataset JSON must be an object with 'x' and 'y'", 0);
    }
    const auto& jx = j.at("x");
    const auto& jy = j.at("y");
    if (!jx.is_array() || !jy.is_array() || jx.size() != jy.size() || jx.empty()) {
        throw ParseError("dataset JSON: 'x' and 'y' must be non-empty arrays of equal length", 0);
    }
    const std::size_t d = jx.front().is_array() ? jx.front().size() : 0;
    if (d == 0) {
        throw ParseError("dataset JSON: 'x' rows must be non-empty arrays", 0);
    }
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(jx.size() * d);
    for (std::size_t i = 0; i < jx.size(); ++i) {
        const auto& row = jx[i];
        if (!row.is_array() || row.size() != d) {
            throw ParseError("dataset JSON: row " + std::to_string(i) + " of 'x' has the wrong length", 0);
        }
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw ParseError("dataset JSON: row " + std::to_string(i) + " of 'x' is not numeric", 0);
            }
            x.push_back(v.get<double>());
        }
        if (!jy[i].is_number()) {
            throw ParseError("dataset JSON: y[" + std::to_string(i) + "] is not numeric", 0);
        }
        y.push_back(jy[i].get<double>());
    }
    return Dataset(d, std::move(x), std::move(y));
}

nlohmann::json to_json(const Dataset& data) {
    nlohmann::json x = nlohmann::json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = data.point(i);
        x.push_back(std::vector<double>(p.begin(), p.end()));
    }
    const auto y = data.responses();
    return {{"x", std::move(x)}, {"y", std::vector<double>(y.begin(), y.end())}};
}

Dataset load_dataset(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        return dataset_from_json(read_json_file(path));
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset '" + path.string() + "'");
    }
    try {
        return read_dataset_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t k = 1; k <= data.dim(); ++k) {
        out << 'x' << k << ',';
    }
    out << "y\n";
    char buf[32];
    auto put = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
    };
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.point(i)) {
            put(v);
            out << ',';
        }
        put(data.responses()[i]);
        out << '\n';
    }
}

PriorConfig prior_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("prior config must be a key-value object");
    }
    PriorConfig prior;
    for (const auto& [key, value] : j.items()) {
        if (key == "zeta") {
            prior.zeta = number_or_array(value, "zeta");
        } else if (key == "lambda_sq") {
            prior.lambda_sq = number_or_array(value, "lambda_sq");
        } else if (key == "beta1") {
            prior.beta1 = number(value, "beta1");
        } else if (key == "beta2") {
            prior.beta2 = number(value, "beta2");
        } else if (key == "b_J") {
            prior.b_J = number(value, "b_J");
        } else {
            throw ConfigError("unknown prior key '" + key + "' (expected zeta, lambda_sq, beta1, beta2, b_J)");
        }
    }
    // Per-block arrays are checked against the grid when the prior is used.
    prior.validate(std::max(prior.zeta.size(), prior.lambda_sq.size()));
    return prior;
}

PriorConfig parse_prior(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("prior JSON: ") + e.what(), 0);
        }
        return prior_from_json(j);
    }
    nlohmann::json j = nlohmann::json::object();
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value'", line_no);
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        try {
            j[key] = nlohmann::json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
            throw ParseError("value of '" + key + "' is not a number or array", line_no);
        }
    }
    return prior_from_json(j);
}

PriorConfig load_prior_file(const std::filesystem::path& path) {
    return parse_prior(read_text_file(path));
}

nlohmann::json to_json(const PriorConfig& prior) {
    nlohmann::json j;
    j["zeta"] = prior.zeta.size() == 1 ? nlohmann::json(prior.zeta[0]) : nlohmann::json(prior.zeta);
    j["lambda_sq"] = prior.lambda_sq.size() == 1 ? nlohmann::json(prior.lambda_sq[0]) : nlohmann::json(prior.lambda_sq);
    j["beta1"] = prior.beta1;
    j["beta2"] = prior.beta2;
    j["b_J"] = prior.b_J;
    return j;
}

nlohmann::json to_json(const StepFunction& f) {
    return {{"d", f.grid.dim()},
            {"J", f.grid.resolution()},
            {"axis_order", "row-major, axis 1 slowest"},
            {"theta", f.theta}};
}

StepFunction step_function_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("d") || !j.contains("J") || !j.contains("theta")) {
        throw ParseError("step function JSON must contain 'd', 'J' and 'theta'", 0);
    }
    if (!j.at("d").is_number_unsigned() || !j.at("J").is_number_unsigned() || !j.at("theta").is_array()) {
        throw ParseError("step function JSON: 'd' and 'J' must be positive integers, 'theta' an array", 0);
    }
    std::vector<double> theta;
    for (const auto& v : j.at("theta")) {
        if (!v.is_number()) {
            throw ParseError("step function JSON: 'theta' must be numeric", 0);
        }
        theta.push_back(v.get<double>());
    }
    return StepFunction(GridSpec(j.at("d").get<std::size_t>(), j.at("J").get<std::size_t>()), std::move(theta));
}

SigmaMode parse_sigma_mode(const std::string& text) {
    if (text == "plug-in") {
        return SigmaMode::plug_in();
    }
    if (text == "inverse-gamma") {
        return SigmaMode::inverse_gamma();
    }
    if (text.rfind("known:", 0) == 0) {
        double sigma = 0.0;
        if (!parse_double(text.substr(6), sigma) || !(sigma > 0.0)) {
            throw ConfigError("invalid sigma in '" + text + "' (expected known:<positive number>)");
        }
        return SigmaMode::known(sigma);
    }
    throw ConfigError("unknown sigma mode '" + text + "' (expected plug-in, inverse-gamma, known:<sigma>)");
}

std::string to_string(const SigmaMode& mode) {
    switch (mode.kind) {
    case SigmaMode::Kind::PlugInMMLE:
        return "plug-in";
    case SigmaMode::Kind::InverseGamma:
        return "inverse-gamma";
    case SigmaMode::Kind::Known: {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), mode.sigma);
        return "known:" + std::string(buf, res.ptr);
    }
    }
    return {};
}

nlohmann::json to_json(const TestResult& r) {
    return {{"reject", r.reject}, {"posterior_prob", r.posterior_prob}, {"threshold", r.threshold},
            {"J_used", r.J_used}, {"n", r.n},
            {"d", r.d},           {"seed", r.seed}};
}

nlohmann::json draws_to_json(const std::vector<PosteriorDraw>& draws) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : draws) {
        out.push_back({{"sigma", d.sigma}, {"theta", d.f.theta}});
    }
    return out;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + path.string() + "'");
        }
        out << content;
        if (!out) {
            throw std::runtime_error("write failed for '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace monoreg
