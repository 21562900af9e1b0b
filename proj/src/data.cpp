#include "riskshift/data.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "riskshift/errors.hpp"

namespace riskshift {

Dataset::Dataset(int horizon, int dim) : horizon_(horizon), dim_(dim) {
    if (horizon < 1) throw ConfigError("Dataset horizon must be >= 1");
    if (dim < 1) throw ConfigError("Dataset covariate dimension must be >= 1");
}

void Dataset::reserve(std::size_t n) {
    x_.reserve(n * static_cast<std::size_t>(dim_));
    a_.reserve(n);
    t_.reserve(n);
    e_.reserve(n);
}

void Dataset::add(std::span<const double> x, int a, int t, EventType e) {
    if (static_cast<int>(x.size()) != dim_)
        throw ShapeError("record dimension does not match dataset");
    x_.insert(x_.end(), x.begin(), x.end());
    a_.push_back(static_cast<std::int8_t>(a));
    t_.push_back(t);
    e_.push_back(e);
}

EventRecord Dataset::record(std::size_t i) const {
    auto xi = x(i);
    return EventRecord{{xi.begin(), xi.end()}, a(i), t(i), e(i)};
}

void Dataset::append(const Dataset& other) {
    if (other.dim_ != dim_ || other.horizon_ != horizon_)
        throw ShapeError("appending dataset with mismatched shape");
    x_.insert(x_.end(), other.x_.begin(), other.x_.end());
    a_.insert(a_.end(), other.a_.begin(), other.a_.end());
    t_.insert(t_.end(), other.t_.begin(), other.t_.end());
    e_.insert(e_.end(), other.e_.begin(), other.e_.end());
}

Dataset from_long(const std::vector<LongTrajectory>& trajectories, int horizon) {
    if (trajectories.empty()) throw DataError("from_long: no trajectories");
    const int dim = static_cast<int>(trajectories.front().x.size());
    Dataset ds(horizon, dim);
    ds.reserve(trajectories.size());

    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& tr = trajectories[i];
        if (static_cast<int>(tr.y.size()) != horizon ||
            static_cast<int>(tr.d.size()) != horizon)
            throw DataError("MalformedTrajectory: indicator length != horizon");

        int t = horizon + 1;
        EventType e = EventType::None;
        std::uint8_t prev_y = 0, prev_d = 0;
        for (int k = 0; k < horizon; ++k) {
            if (tr.y[k] < prev_y || tr.d[k] < prev_d)
                throw DataError("MalformedTrajectory: indicator not monotone");
            if (e == EventType::None) {
                // Competing checked first: it precedes the main event within
                // a step, so simultaneous new indicators resolve to competing.
                if (tr.d[k] && !prev_d) {
                    t = k + 1;
                    e = EventType::CompetingEvent;
                } else if (tr.y[k] && !prev_y) {
                    t = k + 1;
                    e = EventType::MainEvent;
                }
            } else if ((tr.y[k] && e == EventType::CompetingEvent && !prev_y) ||
                       (tr.d[k] && e == EventType::MainEvent && !prev_d)) {
                throw DataError("MalformedTrajectory: both events present");
            }
            prev_y = tr.y[k];
            prev_d = tr.d[k];
        }
        ds.add(tr.x, tr.a, t, e);
    }
    return ds;
}

std::vector<LongTrajectory> to_long(const Dataset& ds) {
    const int K = ds.horizon();
    std::vector<LongTrajectory> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto& tr = out[i];
        auto xi = ds.x(i);
        tr.x.assign(xi.begin(), xi.end());
        tr.a = ds.a(i);
        tr.y.assign(K, 0);
        tr.d.assign(K, 0);
        if (ds.e(i) != EventType::None) {
            auto& ind = ds.e(i) == EventType::MainEvent ? tr.y : tr.d;
            for (int k = ds.t(i) - 1; k < K; ++k) ind[k] = 1;
        }
    }
    return out;
}

AtRiskSample competing_at_risk(const Dataset& ds, int k, int a) {
    if (k < 1 || k > ds.horizon()) throw ShapeError("timestep out of range");
    AtRiskSample s;
    s.k = k;
    s.a = a;
    s.event = EventType::CompetingEvent;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.a(i) != a || ds.t(i) < k) continue;
        s.indices.push_back(static_cast<std::uint32_t>(i));
        s.labels.push_back(ds.t(i) == k && ds.e(i) == EventType::CompetingEvent);
    }
    return s;
}

AtRiskSample main_at_risk(const Dataset& ds, int k, int a) {
    if (k < 1 || k > ds.horizon()) throw ShapeError("timestep out of range");
    AtRiskSample s;
    s.k = k;
    s.a = a;
    s.event = EventType::MainEvent;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.a(i) != a) continue;
        const bool in_set =
            ds.t(i) > k || (ds.t(i) == k && ds.e(i) == EventType::MainEvent);
        if (!in_set) continue;
        s.indices.push_back(static_cast<std::uint32_t>(i));
        s.labels.push_back(ds.t(i) == k && ds.e(i) == EventType::MainEvent);
    }
    return s;
}

Matrix at_risk_features(const Dataset& ds, const AtRiskSample& s) {
    Matrix m(s.indices.size(), static_cast<std::size_t>(ds.dim()));
    for (std::size_t r = 0; r < s.indices.size(); ++r) {
        auto xi = ds.x(s.indices[r]);
        std::copy(xi.begin(), xi.end(), m.row(r).begin());
    }
    return m;
}

std::vector<ViolationReport> validate(const Dataset& ds) {
    std::vector<ViolationReport> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.t(i) < 1 || ds.t(i) > ds.horizon() + 1)
            out.push_back({i, Violation::OutOfRangeTime});
        else if ((ds.t(i) == ds.horizon() + 1) != (ds.e(i) == EventType::None))
            out.push_back({i, Violation::InconsistentEventFlag});
        if (ds.a(i) != 0 && ds.a(i) != 1)
            out.push_back({i, Violation::ArmNotBinary});
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("bad numeric field '" + s + "' at line " +
                        std::to_string(line_no));
    return v;
}

int parse_int(const std::string& s, std::size_t line_no) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("bad integer field '" + s + "' at line " +
                        std::to_string(line_no));
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, int horizon) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV");
    auto header = split_csv_line(line);
    if (header.size() < 4) throw DataError("CSV header too short");
    const int dim = static_cast<int>(header.size()) - 3;
    for (int j = 0; j < dim; ++j) {
        if (header[j] != "x" + std::to_string(j))
            throw DataError("unexpected CSV column '" + header[j] + "'");
    }
    if (header[dim] != "a" || header[dim + 1] != "t" || header[dim + 2] != "e")
        throw DataError("CSV header must end with a,t,e");

    Dataset ds(horizon, dim);
    std::vector<double> x(dim);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("wrong field count at line " + std::to_string(line_no));
        for (int j = 0; j < dim; ++j) x[j] = parse_double(fields[j], line_no);
        const int a = parse_int(fields[dim], line_no);
        const int t = parse_int(fields[dim + 1], line_no);
        const std::string& ev = fields[dim + 2];
        EventType e;
        if (ev == "Y")
            e = EventType::MainEvent;
        else if (ev == "D")
            e = EventType::CompetingEvent;
        else if (ev == "none")
            e = EventType::None;
        else
            throw DataError("bad event field '" + ev + "' at line " +
                            std::to_string(line_no));
        if (a != 0 && a != 1)
            throw DataError("treatment must be 0/1 at line " + std::to_string(line_no));
        if (t < 1 || t > horizon + 1 || (t == horizon + 1) != (e == EventType::None))
            throw DataError("inconsistent (t, e) at line " + std::to_string(line_no));
        ds.add(x, a, t, e);
    }
    return ds;
}

Dataset read_dataset_csv(const std::string& path, int horizon) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_dataset_csv(in, horizon);
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
    for (int j = 0; j < ds.dim(); ++j) out << "x" << j << ",";
    out << "a,t,e\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::ostringstream row;
        row.precision(17);
        for (double v : ds.x(i)) row << v << ",";
        row << ds.a(i) << "," << ds.t(i) << ",";
        switch (ds.e(i)) {
            case EventType::MainEvent: row << "Y"; break;
            case EventType::CompetingEvent: row << "D"; break;
            case EventType::None: row << "none"; break;
        }
        out << row.str() << "\n";
    }
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path);
    write_dataset_csv(ds, out);
}

}  // namespace riskshift
