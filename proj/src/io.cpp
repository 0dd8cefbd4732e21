#include "quenchlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace quenchlab {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("bad numeric field '" + s + "' in " + path);
    }
}

struct CsvFile {
    std::vector<std::string> comments;
    std::string header;
    std::vector<std::vector<double>> rows;
};

CsvFile read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvFile file;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            file.comments.push_back(line);
            continue;
        }
        if (!have_header) {
            file.header = line;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& f : split_csv(line)) row.push_back(parse_double(f, path));
        file.rows.push_back(std::move(row));
    }
    if (!have_header) throw IoError("missing header row in " + path);
    return file;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t index_of(const std::vector<double>& grid, double v, const std::string& path) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), v);
    if (it == grid.end() || *it != v) throw IoError("inconsistent grid value in " + path);
    return static_cast<std::size_t>(it - grid.begin());
}

EstimateMethod method_from_name(const std::string& name) {
    if (name == "crossing") return EstimateMethod::PairwiseCrossing;
    if (name == "collapse") return EstimateMethod::CollapseFit;
    if (name == "binder") return EstimateMethod::BinderCrossing;
    if (name == "meanfield") return EstimateMethod::MeanField;
    throw IoError("unknown estimate method '" + name + "'");
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curves_csv(const std::string& path, const DerivativeCurveSet& curves,
                      CurveCsvStyle style) {
    curves.validate();
    auto out = open_out(path);
    if (style == CurveCsvStyle::Scaling) {
        out << "Jt,B_over_J,dGdB\n";
        for (std::size_t ti = 0; ti < curves.times.size(); ++ti)
            for (std::size_t bi = 0; bi < curves.b_grid.size(); ++bi)
                out << format_g17(curves.times[ti]) << ',' << format_g17(curves.b_grid[bi]) << ','
                    << format_g17(curves.values[ti][bi]) << '\n';
    } else {
        out << "B_over_J,Jt,value\n";
        for (std::size_t bi = 0; bi < curves.b_grid.size(); ++bi)
            for (std::size_t ti = 0; ti < curves.times.size(); ++ti)
                out << format_g17(curves.b_grid[bi]) << ',' << format_g17(curves.times[ti]) << ','
                    << format_g17(curves.values[ti][bi]) << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

DerivativeCurveSet read_curves_csv(const std::string& path) {
    const CsvFile file = read_csv(path);
    const auto cols = split_csv(file.header);
    if (cols.size() != 3) throw IoError("expected three columns in " + path);

    int t_col, b_col, v_col;
    DerivativeCurveSet out;
    if (cols[0] == "Jt" && cols[1] == "B_over_J") {
        t_col = 0, b_col = 1, v_col = 2;
        out.source = CurveSource::Statevector;
    } else if (cols[0] == "B_over_J" && cols[1] == "Jt") {
        b_col = 0, t_col = 1, v_col = 2;
        out.source = CurveSource::Exact;
    } else {
        throw IoError("unrecognized curve header '" + file.header + "' in " + path);
    }

    std::vector<double> ts, bs;
    for (const auto& row : file.rows) {
        if (row.size() != 3) throw IoError("ragged row in " + path);
        ts.push_back(row[t_col]);
        bs.push_back(row[b_col]);
    }
    out.times = sorted_unique(ts);
    out.b_grid = sorted_unique(bs);
    out.values.assign(out.times.size(),
                      std::vector<double>(out.b_grid.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const auto& row : file.rows) {
        const std::size_t ti = index_of(out.times, row[t_col], path);
        const std::size_t bi = index_of(out.b_grid, row[b_col], path);
        out.values[ti][bi] = row[v_col];
    }
    for (const auto& r : out.values)
        for (double v : r)
            if (std::isnan(v)) throw IoError("incomplete (Jt, B_over_J) grid in " + path);
    out.validate();
    return out;
}

void write_series_csv(const std::string& path, const CorrelatorSeries& series) {
    auto out = open_out(path);
    out << "# B_over_J=" << format_g17(series.b_over_j) << '\n';
    out << "Jt,G,G_av\n";
    for (std::size_t i = 0; i < series.t.size(); ++i)
        out << format_g17(series.t[i]) << ',' << format_g17(series.g[i]) << ','
            << format_g17(series.g_av[i]) << '\n';
    if (!out) throw IoError("short write to " + path);
}

CorrelatorSeries read_series_csv(const std::string& path) {
    const CsvFile file = read_csv(path);
    if (split_csv(file.header) != std::vector<std::string>{"Jt", "G", "G_av"})
        throw IoError("unrecognized series header in " + path);
    CorrelatorSeries series;
    for (const auto& c : file.comments) {
        const auto pos = c.find("B_over_J=");
        if (pos != std::string::npos)
            series.b_over_j = parse_double(c.substr(pos + 9), path);
    }
    for (const auto& row : file.rows) {
        if (row.size() != 3) throw IoError("ragged row in " + path);
        series.t.push_back(row[0]);
        series.g.push_back(row[1]);
        series.g_av.push_back(row[2]);
    }
    return series;
}

void write_binder_csv(const std::string& path, const std::vector<BinderCurve>& curves) {
    auto out = open_out(path);
    out << "L,B_over_J,U4\n";
    for (const auto& curve : curves)
        for (std::size_t i = 0; i < curve.b_grid.size(); ++i)
            out << curve.L << ',' << format_g17(curve.b_grid[i]) << ','
                << format_g17(curve.u4[i]) << '\n';
    if (!out) throw IoError("short write to " + path);
}

std::vector<BinderCurve> read_binder_csv(const std::string& path) {
    const CsvFile file = read_csv(path);
    if (split_csv(file.header) != std::vector<std::string>{"L", "B_over_J", "U4"})
        throw IoError("unrecognized Binder header in " + path);
    std::map<int, BinderCurve> by_size;
    for (const auto& row : file.rows) {
        if (row.size() != 3) throw IoError("ragged row in " + path);
        const int L = static_cast<int>(row[0]);
        auto& curve = by_size[L];
        curve.L = L;
        curve.b_grid.push_back(row[1]);
        curve.u4.push_back(row[2]);
    }
    std::vector<BinderCurve> out;
    for (auto& [L, curve] : by_size) out.push_back(std::move(curve));
    return out;
}

void write_table_csv(const std::string& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_g17(row[i]);
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

std::vector<std::vector<double>> read_table_csv(const std::string& path, std::string* header) {
    const CsvFile file = read_csv(path);
    if (header) *header = file.header;
    return file.rows;
}

std::string estimate_to_json(const CriticalPointEstimate& estimate) {
    json j;
    j["b_c"] = estimate.b_c;
    j["uncertainty"] = estimate.uncertainty;
    j["method"] = method_name(estimate.method);
    j["residual"] = estimate.residual;
    return j.dump(2) + "\n";
}

CriticalPointEstimate estimate_from_json(const std::string& text) {
    CriticalPointEstimate e;
    try {
        const json j = json::parse(text);
        e.b_c = j.at("b_c").get<double>();
        e.uncertainty = j.at("uncertainty").get<double>();
        e.method = method_from_name(j.at("method").get<std::string>());
        e.residual = j.at("residual").get<double>();
    } catch (const json::exception& ex) {
        throw IoError(std::string("bad estimate JSON: ") + ex.what());
    }
    return e;
}

std::string meanfield_to_json(const MeanFieldPrediction& prediction) {
    json j;
    j["delta"] = prediction.delta;
    j["b_c_dy_over_J"] = prediction.b_c_dy;
    j["b_c_gs_over_J"] = prediction.b_c_gs;
    j["validity_warning"] = prediction.validity_warning;
    return j.dump(2) + "\n";
}

MeanFieldPrediction meanfield_from_json(const std::string& text) {
    MeanFieldPrediction p;
    try {
        const json j = json::parse(text);
        p.delta = j.at("delta").get<double>();
        p.b_c_dy = j.at("b_c_dy_over_J").get<double>();
        p.b_c_gs = j.at("b_c_gs_over_J").get<double>();
        p.validity_warning = j.at("validity_warning").get<bool>();
    } catch (const json::exception& ex) {
        throw IoError(std::string("bad mean-field JSON: ") + ex.what());
    }
    return p;
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
    if (!out) throw IoError("short write to " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace quenchlab
