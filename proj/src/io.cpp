// io.cpp: JSON matrix schema and CSV / JSON exports

#include "memdyn/io.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace memdyn::io {

json matrix_to_json(const Matrix& m)
{
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        json c = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.push_back(m(i, j).real());
            c.push_back(m(i, j).imag());
        }
        re.push_back(std::move(r));
        im.push_back(std::move(c));
    }
    return json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

namespace {

void read_rows(const json& rows, Matrix& m, bool imag, const char* key)
{
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != m.rows()) {
        throw std::invalid_argument(std::string("\"") + key + "\" must have dim rows");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw std::invalid_argument(std::string("\"") + key + "\" must be a dim x dim array");
        }
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const json& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number()) throw std::invalid_argument(std::string("\"") + key + "\" entries must be numbers");
            if (imag) {
                m(i, j).imag(v.get<double>());
            } else {
                m(i, j).real(v.get<double>());
            }
        }
    }
}

}  // namespace

Matrix matrix_from_json(const json& j)
{
    if (!j.is_object()) throw std::invalid_argument("matrix must be an object with dim/re/im");
    if (!j.contains("re")) throw std::invalid_argument("matrix is missing \"re\"");
    Eigen::Index dim = 0;
    if (j.contains("dim")) {
        if (!j["dim"].is_number_integer() || j["dim"].get<long>() <= 0) {
            throw std::invalid_argument("matrix \"dim\" must be a positive integer");
        }
        dim = j["dim"].get<long>();
    } else {
        dim = static_cast<Eigen::Index>(j["re"].size());
    }
    Matrix m = Matrix::Zero(dim, dim);
    read_rows(j["re"], m, false, "re");
    if (j.contains("im")) read_rows(j["im"], m, true, "im");
    return m;
}

Vector vector_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("re") || !j["re"].is_array()) {
        throw std::invalid_argument("vector must be an object with \"re\" (and optional \"im\") arrays");
    }
    const auto n = j["re"].size();
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        if (!j["re"][k].is_number()) throw std::invalid_argument("vector entries must be numbers");
        v(static_cast<Eigen::Index>(k)).real(j["re"][k].get<double>());
    }
    if (j.contains("im")) {
        if (!j["im"].is_array() || j["im"].size() != n) throw std::invalid_argument("\"im\" length differs from \"re\"");
        for (std::size_t k = 0; k < n; ++k) {
            if (!j["im"][k].is_number()) throw std::invalid_argument("vector entries must be numbers");
            v(static_cast<Eigen::Index>(k)).imag(j["im"][k].get<double>());
        }
    }
    return v;
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size())
{
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    if (fields.size() != width_) throw std::invalid_argument("CSV row width differs from header");
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out_ << ',';
        out_ << csv_field(fields[k]);
    }
    out_ << "\r\n";
}

namespace {

std::vector<std::size_t> kept_rows(std::size_t n, std::size_t stride)
{
    if (stride == 0) stride = 1;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; k += stride) out.push_back(k);
    if (n > 0 && out.back() != n - 1) out.push_back(n - 1);
    return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride)
{
    const Eigen::Index d = traj.states.empty() ? 0 : traj.states.front().rows();
    std::vector<std::string> header{"t", "trace_error", "min_eig", "negativity"};
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            header.push_back("re_" + std::to_string(i) + "_" + std::to_string(j));
            header.push_back("im_" + std::to_string(i) + "_" + std::to_string(j));
        }
    }
    CsvWriter csv(out, header);
    for (std::size_t k : kept_rows(traj.size(), stride)) {
        const auto& diag = traj.diagnostics[k];
        std::vector<std::string> fields{format_double(traj.times[k]), format_double(diag.trace_error),
                                        format_double(diag.min_eigenvalue),
                                        diag.negativity ? format_double(*diag.negativity) : std::string()};
        const Matrix& s = traj.states[k];
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                fields.push_back(format_double(s(i, j).real()));
                fields.push_back(format_double(s(i, j).imag()));
            }
        }
        csv.row(fields);
    }
}

json trajectory_to_json(const Trajectory& traj, std::size_t stride)
{
    json steps = json::array();
    for (std::size_t k : kept_rows(traj.size(), stride)) {
        const auto& diag = traj.diagnostics[k];
        json step{{"t", traj.times[k]},
                  {"trace_error", diag.trace_error},
                  {"min_eig", diag.min_eigenvalue},
                  {"state", matrix_to_json(traj.states[k])}};
        if (diag.negativity) step["negativity"] = *diag.negativity;
        steps.push_back(std::move(step));
    }
    return json{{"factor_dims", traj.factor_dims}, {"steps", std::move(steps)}};
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    CsvWriter csv(out, {"param", "negativity", "verdict"});
    for (const auto& r : rows) csv.row({format_double(r.param), format_double(r.negativity), to_string(r.verdict)});
}

}  // namespace memdyn::io
