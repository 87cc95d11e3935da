// io.hpp -- file formats: CSV tables (17 significant digits, so values
// round-trip exactly), the INI-style job config, Wavefront OBJ export of the
// image surface, and the lattice sample format the analyzer ingests.
#pragma once

#include "analyzer.hpp"
#include "core.hpp"
#include "immersion.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace devim {

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- CSV -------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const
    {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    }
};

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows)
{
    std::ofstream os(path);
    require(os.good(), ErrorKind::parse_error, "cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << fmt17(row[i]);
        os << "\n";
    }
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream is(path);
    require(is.good(), ErrorKind::parse_error, "cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (...) {
                fail(ErrorKind::parse_error, "non-numeric cell '" + c + "' in " + path);
            }
        }
        t.rows.push_back(std::move(row));
    }
    require(!t.header.empty(), ErrorKind::parse_error, "empty CSV " + path);
    return t;
}

// ---- profile tables --------------------------------------------------------

inline std::vector<std::string> profile_header(int n)
{
    std::vector<std::string> h{"t"};
    for (int i = 1; i < n; ++i) h.push_back("kappa" + std::to_string(i));
    for (int i = 1; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            h.push_back("twist" + std::to_string(i) + std::to_string(j));
    h.push_back("kappan");
    return h;
}

inline void write_profile_csv(const CurvatureProfile& p, const std::string& path,
                              int samples = 1025)
{
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < samples; ++k) {
        double t = p.length() * k / (samples - 1);
        std::vector<double> row{t};
        for (int i = 0; i < p.dim() - 1; ++i) row.push_back(p.front(i, t));
        for (int i = 0; i < p.dim() - 1; ++i)
            for (int j = i + 1; j < p.dim() - 1; ++j) row.push_back(p.twist(i, j, t));
        row.push_back(p.normal_curvature(t));
        rows.push_back(std::move(row));
    }
    write_csv(path, profile_header(p.dim()), rows);
}

// Rebuild a profile from its table; components become piecewise-linear
// interpolants of the sampled rows.
inline CurvatureProfile read_profile_csv(const std::string& path)
{
    CsvTable t = read_csv(path);
    int nfront = 0;
    while (t.column("kappa" + std::to_string(nfront + 1)) >= 0) ++nfront;
    require(nfront >= 1 && t.column("t") >= 0 && t.column("kappan") >= 0,
            ErrorKind::parse_error, "profile CSV needs columns t, kappa1..., kappan");
    const int n = nfront + 1;
    require(t.rows.size() >= 2, ErrorKind::parse_error, "profile CSV needs >= 2 rows");

    std::vector<double> ts;
    for (const auto& r : t.rows) ts.push_back(r[t.column("t")]);
    double maxabs = 0;
    auto col_fn = [&](const std::string& name) {
        int c = t.column(name);
        require(c >= 0, ErrorKind::parse_error, "profile CSV missing column " + name);
        std::vector<double> vs;
        for (const auto& r : t.rows) {
            vs.push_back(r[c]);
            maxabs = std::max(maxabs, std::abs(r[c]));
        }
        return table_fn(ts, vs);
    };

    std::vector<ScalarFn> front, twist;
    for (int i = 1; i < n; ++i) front.push_back(col_fn("kappa" + std::to_string(i)));
    for (int i = 1; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            twist.push_back(col_fn("twist" + std::to_string(i) + std::to_string(j)));
    ScalarFn normal = col_fn("kappan");
    return CurvatureProfile(n, ts.back(), std::max(maxabs, 1e-6), std::move(front),
                            std::move(twist), std::move(normal));
}

// ---- curve tables ----------------------------------------------------------

inline void write_curve_csv(const FramedCurve& fc, const std::string& path, int stride = 1)
{
    const int n = fc.n;
    std::vector<std::string> h{"t"};
    for (int i = 0; i < n; ++i) h.push_back("g" + std::to_string(i));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            h.push_back("F" + std::to_string(r) + std::to_string(c));
    if (fc.has_target()) {
        for (int i = 0; i <= n; ++i) h.push_back("tg" + std::to_string(i));
        for (int r = 0; r <= n; ++r)
            for (int c = 0; c <= n; ++c)
                h.push_back("T" + std::to_string(r) + std::to_string(c));
    }
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < fc.domain.t.size(); k += stride) {
        std::vector<double> row{fc.domain.t[k]};
        for (int i = 0; i < n; ++i) row.push_back(fc.domain.point[k][i]);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) row.push_back(fc.domain.frame[k](r, c));
        if (fc.has_target()) {
            for (int i = 0; i <= n; ++i) row.push_back(fc.target.point[k][i]);
            for (int r = 0; r <= n; ++r)
                for (int c = 0; c <= n; ++c) row.push_back(fc.target.frame[k](r, c));
        }
        rows.push_back(std::move(row));
        if (k + stride >= fc.domain.t.size() && k + 1 < fc.domain.t.size())
            k = fc.domain.t.size() - 1 - stride; // always emit the last node
    }
    write_csv(path, h, rows);
}

// ---- immersion exports -----------------------------------------------------

// Wavefront OBJ of the image surface on the (t, s) grid, n = 2 only. Quads
// are triangulated with the lower-left diagonal.
inline void export_obj(const DevelopableImmersion& imm, const std::string& path,
                       int t_samples = 129, int s_samples = 65)
{
    require(imm.dim() == 2, ErrorKind::invalid_input, "OBJ export is for n = 2");
    std::ofstream os(path);
    require(os.good(), ErrorKind::parse_error, "cannot open " + path + " for writing");
    Vec plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    for (int i = 0; i < t_samples; ++i) {
        double t = imm.length() * i / (t_samples - 1);
        double Sp = imm.boundary_extent(t, plus), Sm = imm.boundary_extent(t, minus);
        auto cf = imm.chart_frame(t);
        for (int j = 0; j < s_samples; ++j) {
            Vec s(1);
            s << -Sm + (Sp + Sm) * j / (s_samples - 1);
            Vec y = DevelopableImmersion::evaluate_raw(cf, s);
            os << "v " << fmt17(y[0]) << " " << fmt17(y[1]) << " " << fmt17(y[2]) << "\n";
        }
    }
    auto vid = [&](int i, int j) { return i * s_samples + j + 1; };
    for (int i = 0; i + 1 < t_samples; ++i)
        for (int j = 0; j + 1 < s_samples; ++j) {
            os << "f " << vid(i, j) << " " << vid(i + 1, j) << " " << vid(i + 1, j + 1) << "\n";
            os << "f " << vid(i, j) << " " << vid(i + 1, j + 1) << " " << vid(i, j + 1) << "\n";
        }
}

// Field rows (t, s..., x..., u..., |A|, J) on the chart grid.
inline void export_fields_csv(const DevelopableImmersion& imm, const std::string& path,
                              int t_samples = 65, int s_samples = 33)
{
    const int n = imm.dim();
    require(n <= 3, ErrorKind::invalid_input, "field export is for n = 2, 3");
    std::vector<std::string> h{"t"};
    for (int i = 0; i < n - 1; ++i) h.push_back("s" + std::to_string(i + 1));
    for (int i = 0; i < n; ++i) h.push_back("x" + std::to_string(i));
    for (int i = 0; i <= n; ++i) h.push_back("u" + std::to_string(i));
    h.push_back("Anorm");
    h.push_back("J");

    auto dirs = sphere_directions(n - 1, n == 2 ? 2 : 16);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < t_samples; ++i) {
        double t = imm.length() * i / (t_samples - 1);
        auto cf = imm.chart_frame(t);
        for (const auto& dir : dirs) {
            double S = imm.boundary_extent(t, dir);
            for (int j = 0; j < s_samples; ++j) {
                Vec s = S * (j + 0.5) / s_samples * dir;
                Vec x = DevelopableImmersion::phi(cf, s);
                Vec u = DevelopableImmersion::evaluate_raw(cf, s);
                std::vector<double> row{t};
                for (int c = 0; c < n - 1; ++c) row.push_back(s[c]);
                for (int c = 0; c < n; ++c) row.push_back(x[c]);
                for (int c = 0; c <= n; ++c) row.push_back(u[c]);
                row.push_back(imm.second_form_raw(cf, s).norm());
                row.push_back(imm.jacobian(t, s));
                rows.push_back(std::move(row));
            }
        }
    }
    write_csv(path, h, rows);
}

inline std::vector<std::string> lattice_header(int n)
{
    std::vector<std::string> h;
    for (int i = 0; i < n; ++i) h.push_back("x" + std::to_string(i));
    for (int i = 0; i <= n; ++i) h.push_back("u" + std::to_string(i));
    return h;
}

inline void write_lattice_csv(const SampledMap& m, const std::string& path)
{
    std::vector<std::vector<double>> rows;
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        Vec x = m.coord(idx);
        std::vector<double> row;
        for (int i = 0; i < m.n; ++i) row.push_back(x[i]);
        Eigen::Map<const Vec> u = m.value(s);
        for (int i = 0; i <= m.n; ++i) row.push_back(u[i]);
        rows.push_back(std::move(row));
    });
    write_csv(path, lattice_header(m.n), rows);
}

inline void export_lattice_csv(const DevelopableImmersion& imm, double h,
                               const std::string& path)
{
    write_lattice_csv(SampledMap::from_immersion(imm, h), path);
}

// Reassemble a lattice from sample rows; the spacing is the smallest positive
// coordinate difference and nodes snap to it.
inline SampledMap read_lattice_csv(const std::string& path)
{
    CsvTable t = read_csv(path);
    int n = 0;
    while (t.column("x" + std::to_string(n)) >= 0) ++n;
    require(n >= 2, ErrorKind::parse_error, "lattice CSV needs columns x0, x1, ...");
    for (int i = 0; i <= n; ++i)
        require(t.column("u" + std::to_string(i)) >= 0, ErrorKind::parse_error,
                "lattice CSV needs n+1 value columns u0...");
    require(t.rows.size() >= 2, ErrorKind::parse_error, "lattice CSV has too few rows");

    Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    for (const auto& r : t.rows)
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], r[i]);
            hi[i] = std::max(hi[i], r[i]);
        }
    double h = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        std::vector<double> cs;
        for (const auto& r : t.rows) cs.push_back(r[i]);
        std::sort(cs.begin(), cs.end());
        for (size_t k = 1; k < cs.size(); ++k) {
            double d = cs[k] - cs[k - 1];
            if (d > 1e-12) h = std::min(h, d);
        }
    }
    require(std::isfinite(h), ErrorKind::parse_error, "cannot infer lattice spacing");

    SampledMap m;
    m.n = n;
    m.h = h;
    m.origin = lo;
    m.shape.resize(n);
    for (int i = 0; i < n; ++i) m.shape[i] = int(std::llround((hi[i] - lo[i]) / h)) + 1;
    m.slot.assign(m.lattice_size(), -1);
    m.values.reserve(t.rows.size() * (n + 1));
    std::vector<int> idx(n);
    for (const auto& r : t.rows) {
        for (int i = 0; i < n; ++i) {
            double snapped = (r[i] - lo[i]) / h;
            idx[i] = int(std::llround(snapped));
            require(std::abs(snapped - idx[i]) < 1e-6, ErrorKind::parse_error,
                    "sample coordinates do not sit on a regular lattice");
        }
        long f = m.flat(idx);
        require(m.slot[f] < 0, ErrorKind::parse_error, "duplicate lattice node in CSV");
        m.slot[f] = int32_t(m.node_count++);
        for (int i = 0; i <= n; ++i) m.values.push_back(r[n + i]);
    }
    return m;
}

// ---- INI config ------------------------------------------------------------

// [section] blocks of key = value lines; '#' and ';' start comments.
struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config parse_file(const std::string& path)
    {
        std::ifstream is(path);
        require(is.good(), ErrorKind::parse_error, "cannot open config " + path);
        std::stringstream ss;
        ss << is.rdbuf();
        return parse(ss.str(), path);
    }

    static Config parse(const std::string& text, const std::string& origin = "<string>")
    {
        Config cfg;
        std::string section;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto cut = line.find_first_of("#;");
            if (cut != std::string::npos) line = line.substr(0, cut);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                require(line.back() == ']', ErrorKind::parse_error,
                        origin + ":" + std::to_string(lineno) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                cfg.sections[section];
                continue;
            }
            auto eq = line.find('=');
            require(eq != std::string::npos, ErrorKind::parse_error,
                    origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            require(!key.empty(), ErrorKind::parse_error,
                    origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.sections[section][key] = val;
        }
        return cfg;
    }

    bool has(const std::string& sec, const std::string& key) const
    {
        auto it = sections.find(sec);
        return it != sections.end() && it->second.count(key);
    }

    std::string get(const std::string& sec, const std::string& key) const
    {
        require(has(sec, key), ErrorKind::parse_error,
                "config is missing [" + sec + "] " + key);
        return sections.at(sec).at(key);
    }

    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const
    {
        return has(sec, key) ? sections.at(sec).at(key) : fallback;
    }

    double get_double(const std::string& sec, const std::string& key) const
    {
        return to_double(get(sec, key), sec, key);
    }

    double get_double(const std::string& sec, const std::string& key, double fallback) const
    {
        return has(sec, key) ? to_double(get(sec, key), sec, key) : fallback;
    }

    int get_int(const std::string& sec, const std::string& key, int fallback) const
    {
        return has(sec, key) ? int(std::llround(to_double(get(sec, key), sec, key)))
                             : fallback;
    }

    bool get_bool(const std::string& sec, const std::string& key, bool fallback) const
    {
        if (!has(sec, key)) return fallback;
        std::string v = get(sec, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(ErrorKind::parse_error, "config [" + sec + "] " + key + ": expected a boolean");
    }

    std::vector<double> get_list(const std::string& sec, const std::string& key) const
    {
        std::vector<double> out;
        std::istringstream is(get(sec, key));
        std::string tok;
        while (is >> tok) out.push_back(to_double(tok, sec, key));
        require(!out.empty(), ErrorKind::parse_error,
                "config [" + sec + "] " + key + ": expected numbers");
        return out;
    }

    Vec get_vec(const std::string& sec, const std::string& key) const
    {
        auto v = get_list(sec, key);
        return Eigen::Map<const Vec>(v.data(), long(v.size()));
    }

private:
    static std::string trim(const std::string& s)
    {
        auto a = s.find_first_not_of(" \t\r");
        auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& v, const std::string& sec,
                            const std::string& key)
    {
        try {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            require(pos == v.size(), ErrorKind::parse_error,
                    "config [" + sec + "] " + key + ": trailing characters in '" + v + "'");
            return d;
        } catch (const Error&) {
            throw;
        } catch (...) {
            fail(ErrorKind::parse_error,
                 "config [" + sec + "] " + key + ": cannot parse number '" + v + "'");
        }
    }
};

} // namespace devim
