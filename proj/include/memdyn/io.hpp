// io.hpp: JSON matrix schema and CSV / JSON exports

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "memdyn/entanglement.hpp"
#include "memdyn/evolutions.hpp"
#include "memdyn/qcore.hpp"

namespace memdyn::io {

using json = nlohmann::json;

/// {"dim": d, "re": [[...]], "im": [[...]]}; rows are outer arrays.
json matrix_to_json(const Matrix& m);
/// Accepts the schema above; "im" may be omitted for real matrices.
/// Throws std::invalid_argument on malformed input.
Matrix matrix_from_json(const json& j);

/// {"re": [...], "im": [...]}.
Vector vector_from_json(const json& j);

/// Shortest round-trip representation of a double.
std::string format_double(double x);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
    std::size_t width_;
};

/// Columns: t, trace_error, min_eig, negativity, then re/im of each state
/// entry in column-stacked order. Every `stride`-th step plus the last is kept.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride = 1);
json trajectory_to_json(const Trajectory& traj, std::size_t stride = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace memdyn::io
