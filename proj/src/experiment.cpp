#include "quench/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <unistd.h>

#include "json.hpp"

#include "quench/classical.hpp"
#include "quench/errors.hpp"
#include "quench/lattice.hpp"
#include "quench/quantum.hpp"

namespace quench {

const char* const kCodeVersion = "quench 0.1.0";

namespace {

using boost::property_tree::ptree;
using nlohmann::json;

// Shortest text that parses back to the same double.
std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    const auto s = trim(text);
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto r = std::from_chars(first, s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

template <typename T>
T to_number(std::string_view text, const std::string& path) {
    T v{};
    if (!parse_number(text, v)) throw ConfigError(path, "cannot parse '" + std::string(text) + "' as a number");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v)) throw ConfigError(path, "value must be finite");
    return v;
}

template <typename T>
std::vector<T> to_list(std::string_view text, const std::string& path) {
    std::vector<T> out;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) out.push_back(to_number<T>(item, path));
    if (out.empty()) throw ConfigError(path, "list is empty");
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_floating_point_v<T>) s += fmt(v[i]);
        else s += std::to_string(v[i]);
    }
    return s;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"model", {"family", "d", "J", "critical_point", "eta", "z", "L", "h"}},
        {"run",
         {"t_max", "t_min", "points_per_decade", "n_realizations", "n_equil", "seed", "threads", "output_dir",
          "krylov_tol"}},
        {"analysis",
         {"beta", "gamma", "delta", "fit_fraction", "anchor", "w_min", "w_max", "scan_points", "refine_tol", "k",
          "grid_points_per_decade", "crossing_w"}},
        {"synthetic", {"w_star", "function", "noise", "x_min", "x_max", "points_per_decade"}},
    };
    return keys;
}

// Reads a tree into a config; fields absent from the tree keep their defaults.
ExperimentConfig from_tree(const ptree& tree) {
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError(section, "unknown section");
        if (!body.data().empty()) throw ConfigError(section, "key outside of a section");
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
            (void)value;
        }
    }

    ExperimentConfig c;
    auto text = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(ptree::path_type(path, '.'))) return trim(*v);
        return std::nullopt;
    };
    auto num = [&]<typename T>(const std::string& path, T& field) {
        if (auto v = text(path)) field = to_number<T>(*v, path);
    };
    auto opt = [&]<typename T>(const std::string& path, std::optional<T>& field) {
        if (auto v = text(path)) field = to_number<T>(*v, path);
    };
    auto list = [&]<typename T>(const std::string& path, std::vector<T>& field) {
        if (auto v = text(path)) field = to_list<T>(*v, path);
    };

    auto& m = c.model;
    if (auto v = text("model.family")) {
        try {
            m.family = parse_family(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("model.family", e.what());
        }
    }
    num("model.d", m.d);
    num("model.J", m.J);
    opt("model.critical_point", m.critical_point);
    opt("model.eta", m.eta);
    opt("model.z", m.z);
    list("model.L", m.Ls);
    list("model.h", m.hs);

    auto& r = c.run;
    num("run.t_max", r.t_max);
    num("run.t_min", r.t_min);
    num("run.points_per_decade", r.points_per_decade);
    num("run.n_realizations", r.n_realizations);
    opt("run.n_equil", r.n_equil);
    opt("run.seed", r.seed);
    num("run.threads", r.threads);
    if (auto v = text("run.output_dir")) r.output_dir = *v;
    num("run.krylov_tol", r.krylov_tol);

    auto& a = c.analysis;
    list("analysis.beta", a.beta_fracs);
    list("analysis.gamma", a.gamma_fracs);
    num("analysis.delta", a.delta);
    num("analysis.fit_fraction", a.fit_fraction);
    if (auto v = text("analysis.anchor")) {
        if (*v == "steepest") a.anchor = CrossoverAnchor::steepest;
        else if (*v == "first") a.anchor = CrossoverAnchor::first;
        else throw ConfigError("analysis.anchor", "expected 'steepest' or 'first'");
    }
    num("analysis.w_min", a.w_min);
    num("analysis.w_max", a.w_max);
    num("analysis.scan_points", a.scan_points);
    num("analysis.refine_tol", a.refine_tol);
    num("analysis.k", a.k);
    num("analysis.grid_points_per_decade", a.grid_points_per_decade);
    num("analysis.crossing_w", a.crossing_w);

    auto& s = c.synthetic;
    num("synthetic.w_star", s.w_star);
    if (auto v = text("synthetic.function")) {
        try {
            s.function = parse_scaling_function(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("synthetic.function", e.what());
        }
    }
    num("synthetic.noise", s.noise);
    num("synthetic.x_min", s.x_min);
    num("synthetic.x_max", s.x_max);
    num("synthetic.points_per_decade", s.points_per_decade);
    return c;
}

void apply_override(ptree& tree, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError(spec, "override must look like section.key=value");
    const auto key = trim(std::string_view(spec).substr(0, eq));
    const auto value = trim(std::string_view(spec).substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw ConfigError(key, "override key must be section.key");
    tree.put(ptree::path_type(key, '.'), value);
}

std::string anchor_name(CrossoverAnchor a) { return a == CrossoverAnchor::first ? "first" : "steepest"; }

void check(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ConfigError(path, message);
}

void validate_analysis(const AnalysisSection& a) {
    check(!a.beta_fracs.empty(), "analysis.beta", "list is empty");
    check(!a.gamma_fracs.empty(), "analysis.gamma", "list is empty");
    for (double b : a.beta_fracs) check(b > 0.0, "analysis.beta", "fractions must be positive");
    for (double b : a.beta_fracs)
        for (double g : a.gamma_fracs) check(g > b, "analysis.gamma", "every gamma must exceed every beta");
    check(a.beta_fracs.size() * a.gamma_fracs.size() >= 3, "analysis.beta", "need at least 3 windows");
    check(a.delta > 0.0, "analysis.delta", "must be positive");
    check(a.fit_fraction > 0.0 && a.fit_fraction < 1.0, "analysis.fit_fraction", "must lie in (0, 1)");
    check(a.w_min > 0.0 && a.w_max > a.w_min, "analysis.w_max", "need 0 < w_min < w_max");
    check(a.scan_points >= 3, "analysis.scan_points", "must be >= 3");
    check(a.refine_tol > 0.0, "analysis.refine_tol", "must be positive");
    check(a.k >= 1.0, "analysis.k", "must be >= 1");
    check(a.grid_points_per_decade >= 2, "analysis.grid_points_per_decade", "must be >= 2");
    check(a.crossing_w > 0.0, "analysis.crossing_w", "must be positive");
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

json constants_json(const CriticalConstants& c) {
    return {{"family", std::string(to_string(c.family))},
            {"d", c.d},
            {"J", c.J},
            {"eta", c.eta},
            {"z", c.z},
            {"critical_point", c.critical_point},
            {"kappa", c.kappa},
            {"y_h", c.y_h},
            {"provenance",
             {{"eta", std::string(to_string(c.eta_source))},
              {"z", std::string(to_string(c.z_source))},
              {"critical_point", std::string(to_string(c.critical_point_source))}}}};
}

Provenance parse_provenance(const std::string& s) {
    if (s == "paper") return Provenance::paper;
    if (s == "literature-default") return Provenance::literature_default;
    if (s == "user-override") return Provenance::user_override;
    throw std::invalid_argument("unknown provenance '" + s + "'");
}

CriticalConstants constants_from_json(const json& j) {
    auto c = derive_constants(parse_family(j.at("family").get<std::string>()), j.at("d").get<int>(),
                              j.at("eta").get<double>(), j.at("z").get<double>(), j.at("J").get<double>(),
                              j.at("critical_point").get<double>());
    const auto& p = j.at("provenance");
    c.eta_source = parse_provenance(p.at("eta").get<std::string>());
    c.z_source = parse_provenance(p.at("z").get<std::string>());
    c.critical_point_source = parse_provenance(p.at("critical_point").get<std::string>());
    return c;
}

CriticalConstants apply_overrides(CriticalConstants c, const ModelSection& m) {
    const auto src = c;
    c = derive_constants(m.family, m.d, m.eta.value_or(c.eta), m.z.value_or(c.z), m.J,
                         m.critical_point.value_or(c.critical_point));
    c.eta_source = m.eta ? Provenance::user_override : src.eta_source;
    c.z_source = m.z ? Provenance::user_override : src.z_source;
    c.critical_point_source = m.critical_point ? Provenance::user_override : src.critical_point_source;
    return c;
}

void add_file(RunManifest& manifest, const fs::path& dir, const fs::path& file) {
    manifest.files.push_back({fs::relative(file, dir).generic_string(), sha256_hex(file)});
}

void write_series_files(RunManifest& manifest, const fs::path& dir, const EnsembleSeries& s) {
    const auto csv = dir / series_filename(s.label);
    write_series(csv, s);
    add_file(manifest, dir, csv);
    add_file(manifest, dir, sidecar_path(csv));
    manifest.counts.push_back({s.label.L, s.label.h, s.n_realizations});
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<EnsembleSeries> load_all(const std::vector<fs::path>& files) {
    std::vector<EnsembleSeries> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(read_series(f));
    return out;
}

void require_consistent(const std::vector<EnsembleSeries>& series) {
    for (const auto& s : series) {
        const auto& a = series.front().label;
        if (s.label.family != a.family || s.label.d != a.d)
            throw std::invalid_argument("input series mix model families or dimensions");
        if (s.label.time_unit != a.time_unit)
            throw std::invalid_argument("input series mix time units (Jt and t_MCS)");
    }
}

json inputs_json(const std::vector<fs::path>& files) {
    json j = json::array();
    for (const auto& f : files)
        j.push_back({{"path", fs::absolute(f).lexically_normal().generic_string()}, {"sha256", sha256_hex(f)}});
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::vector<CollapseWindow> AnalysisSection::windows() const {
    std::vector<CollapseWindow> out;
    for (double b : beta_fracs)
        for (double g : gamma_fracs) out.push_back({b, g});
    return out;
}

CollapseOptions AnalysisSection::options() const {
    CollapseOptions o;
    o.crossover.delta = delta;
    o.crossover.fit_fraction = fit_fraction;
    o.crossover.anchor = anchor;
    o.search.w_min = w_min;
    o.search.w_max = w_max;
    o.search.scan_points = scan_points;
    o.search.refine_tol = refine_tol;
    o.points_per_decade = grid_points_per_decade;
    return o;
}

void ExperimentConfig::validate() const {
    const auto& m = model;
    check(m.d >= 1, "model.d", "must be >= 1");
    check(m.J > 0.0, "model.J", "must be positive");
    check(!m.Ls.empty(), "model.L", "list is empty");
    check(!m.hs.empty(), "model.h", "list is empty");
    for (int L : m.Ls) check(L >= 2, "model.L", "sizes must be >= 2");
    for (double h : m.hs) check(h >= 0.0, "model.h", "fields must be non-negative");
    if (m.family == ModelFamily::quantum) check(m.d <= 2, "model.d", "quantum runs support d = 1, 2");
    try {
        (void)constants();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("model", e.what());
    }

    const auto& r = run;
    check(r.t_max > 0.0, "run.t_max", "must be positive");
    if (m.family == ModelFamily::classical)
        check(r.t_max >= 1.0 && r.t_max == std::floor(r.t_max), "run.t_max", "classical t_max is a whole number of sweeps");
    else
        check(r.t_min > 0.0 && r.t_min < r.t_max, "run.t_min", "need 0 < t_min < t_max");
    check(r.points_per_decade >= 1, "run.points_per_decade", "must be >= 1");
    check(r.n_realizations >= 1, "run.n_realizations", "must be >= 1");
    if (r.n_equil) check(*r.n_equil >= 0, "run.n_equil", "must be non-negative");
    check(r.seed.has_value(), "run.seed", "a seed is required");
    check(!r.output_dir.empty(), "run.output_dir", "must be nonempty");
    check(r.krylov_tol > 0.0, "run.krylov_tol", "must be positive");

    validate_analysis(analysis);

    const auto& s = synthetic;
    check(s.w_star > 0.0, "synthetic.w_star", "must be positive");
    check(s.noise >= 0.0, "synthetic.noise", "must be non-negative");
    check(s.x_min > 0.0 && s.x_max > s.x_min, "synthetic.x_max", "need 0 < x_min < x_max");
    check(s.points_per_decade >= 1, "synthetic.points_per_decade", "must be >= 1");
}

CriticalConstants ExperimentConfig::constants() const {
    return apply_overrides(default_constants(model.family, model.d), model);
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
    for (const auto& o : overrides) apply_override(tree, o);
    return from_tree(tree);
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError("", e.what());
    }
    return parse_config(text, overrides);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    const auto& m = c.model;
    os << "[model]\n";
    os << "family = " << to_string(m.family) << "\n";
    os << "d = " << m.d << "\n";
    os << "J = " << fmt(m.J) << "\n";
    if (m.critical_point) os << "critical_point = " << fmt(*m.critical_point) << "\n";
    if (m.eta) os << "eta = " << fmt(*m.eta) << "\n";
    if (m.z) os << "z = " << fmt(*m.z) << "\n";
    if (!m.Ls.empty()) os << "L = " << join(m.Ls) << "\n";
    if (!m.hs.empty()) os << "h = " << join(m.hs) << "\n";

    const auto& r = c.run;
    os << "\n[run]\n";
    os << "t_max = " << fmt(r.t_max) << "\n";
    os << "t_min = " << fmt(r.t_min) << "\n";
    os << "points_per_decade = " << r.points_per_decade << "\n";
    os << "n_realizations = " << r.n_realizations << "\n";
    if (r.n_equil) os << "n_equil = " << *r.n_equil << "\n";
    if (r.seed) os << "seed = " << *r.seed << "\n";
    os << "threads = " << r.threads << "\n";
    os << "output_dir = " << r.output_dir << "\n";
    os << "krylov_tol = " << fmt(r.krylov_tol) << "\n";

    const auto& a = c.analysis;
    os << "\n[analysis]\n";
    os << "beta = " << join(a.beta_fracs) << "\n";
    os << "gamma = " << join(a.gamma_fracs) << "\n";
    os << "delta = " << fmt(a.delta) << "\n";
    os << "fit_fraction = " << fmt(a.fit_fraction) << "\n";
    os << "anchor = " << anchor_name(a.anchor) << "\n";
    os << "w_min = " << fmt(a.w_min) << "\n";
    os << "w_max = " << fmt(a.w_max) << "\n";
    os << "scan_points = " << a.scan_points << "\n";
    os << "refine_tol = " << fmt(a.refine_tol) << "\n";
    os << "k = " << fmt(a.k) << "\n";
    os << "grid_points_per_decade = " << a.grid_points_per_decade << "\n";
    os << "crossing_w = " << fmt(a.crossing_w) << "\n";

    const auto& s = c.synthetic;
    os << "\n[synthetic]\n";
    os << "w_star = " << fmt(s.w_star) << "\n";
    os << "function = " << to_string(s.function) << "\n";
    os << "noise = " << fmt(s.noise) << "\n";
    os << "x_min = " << fmt(s.x_min) << "\n";
    os << "x_max = " << fmt(s.x_max) << "\n";
    os << "points_per_decade = " << s.points_per_decade << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".meta.json"); }

std::string series_filename(const SeriesLabel& label) {
    return std::string(to_string(label.family)) + "_d" + std::to_string(label.d) + "_L" + std::to_string(label.L) +
           "_h" + fmt(label.h) + ".csv";
}

void write_series(const fs::path& csv, const EnsembleSeries& series) {
    validate(series);
    std::string text = "time,mean_M2,stderr_M2,n\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        text += fmt(series.times[k]) + "," + fmt(series.mean_M2[k]) + "," + fmt(series.stderr_M2[k]) + "," +
                std::to_string(series.n_realizations) + "\n";
    write_text(csv, text);

    const json meta{{"family", std::string(to_string(series.label.family))},
                    {"d", series.label.d},
                    {"L", series.label.L},
                    {"h", series.label.h},
                    {"time_unit", std::string(to_string(series.label.time_unit))},
                    {"n_realizations", series.n_realizations}};
    write_text(sidecar_path(csv), meta.dump(2) + "\n");
}

EnsembleSeries read_series(const fs::path& csv) {
    EnsembleSeries s;
    try {
        const auto meta = json::parse(read_text(sidecar_path(csv)));
        s.label.family = parse_family(meta.at("family").get<std::string>());
        s.label.d = meta.at("d").get<int>();
        s.label.L = meta.at("L").get<int>();
        s.label.h = meta.at("h").get<double>();
        s.label.time_unit = parse_time_unit(meta.at("time_unit").get<std::string>());
        s.n_realizations = meta.at("n_realizations").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw std::runtime_error("bad sidecar for " + csv.string() + ": " + e.what());
    }
    if (s.label.time_unit != time_unit_for(s.label.family))
        throw std::runtime_error(csv.string() + ": time unit does not match model family");

    std::istringstream in(read_text(csv));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "time,mean_M2,stderr_M2,n")
        throw std::runtime_error(csv.string() + ": missing or unexpected header");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        double t = 0, m = 0, e = 0;
        std::int64_t n = 0;
        if (cells.size() != 4 || !parse_number(cells[0], t) || !parse_number(cells[1], m) || !parse_number(cells[2], e) ||
            !parse_number(cells[3], n))
            throw std::runtime_error(csv.string() + ": malformed row " + std::to_string(row));
        s.times.push_back(t);
        s.mean_M2.push_back(m);
        s.stderr_M2.push_back(e);
    }
    validate(s);
    return s;
}

std::string sha256_hex(const fs::path& file) {
    const auto data = read_text(file);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    json counts = json::array();
    for (const auto& c : m.counts) counts.push_back({{"L", c.L}, {"h", c.h}, {"realizations", c.realizations}});
    json files = json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}});
    const json j{{"config", m.config_text},   {"constants", constants_json(m.constants)},
                 {"code_version", m.code_version}, {"counts", counts},
                 {"wall_seconds", m.wall_seconds}, {"files", files},
                 {"complete", m.complete},     {"failures", m.failures}};
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& dir) {
    const auto j = json::parse(read_text(dir / "manifest.json"));
    RunManifest m;
    m.config_text = j.at("config").get<std::string>();
    m.constants = constants_from_json(j.at("constants"));
    m.code_version = j.at("code_version").get<std::string>();
    for (const auto& c : j.at("counts"))
        m.counts.push_back({c.at("L").get<int>(), c.at("h").get<double>(), c.at("realizations").get<std::int64_t>()});
    m.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& f : j.at("files")) m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    m.complete = j.at("complete").get<bool>();
    m.failures = j.at("failures").get<std::vector<std::string>>();
    return m;
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
    std::vector<std::string> problems;
    const auto m = read_manifest(dir);
    std::set<std::string> listed;
    for (const auto& f : m.files) {
        listed.insert(f.path);
        const auto p = dir / f.path;
        if (!fs::exists(p)) problems.push_back("missing " + f.path);
        else if (sha256_hex(p) != f.sha256) problems.push_back("digest mismatch " + f.path);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        const bool data = entry.path().extension() == ".csv" || name.ends_with(".meta.json");
        if (data && !listed.contains(name)) problems.push_back("unlisted data file " + name);
    }
    if (!m.complete) problems.push_back("run marked incomplete");
    return problems;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

RunManifest simulate_classical(const ExperimentConfig& config) {
    config.validate();
    if (config.model.family != ModelFamily::classical) throw ConfigError("model.family", "simulate-classical needs family = classical");
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = config.run.output_dir;
    fs::create_directories(dir);

    RunManifest manifest;
    manifest.config_text = serialize_config(config);
    manifest.constants = config.constants();
    manifest.code_version = kCodeVersion;

    const auto& c = manifest.constants;
    const auto schedule =
        QuenchSchedule::log_spaced(static_cast<std::int64_t>(config.run.t_max), config.run.points_per_decade);
    for (int L : config.model.Ls) {
        const LatticeGeometry geometry(config.model.d, L);
        const auto n_equil = config.run.n_equil.value_or(default_equilibration_updates(geometry));
        for (double h : config.model.hs) {
            try {
                const ClassicalModelSpec spec(geometry, c.J, c.critical_point, h);
                const auto traj = run_quench_ensemble(spec, schedule, n_equil, *config.run.seed,
                                                      config.run.n_realizations, config.run.threads);
                const SeriesLabel label{ModelFamily::classical, c.d, L, h, TimeUnit::t_mcs};
                write_series_files(manifest, dir, ensemble_average(traj, label));
            } catch (const std::exception& e) {
                manifest.complete = false;
                manifest.failures.push_back("L=" + std::to_string(L) + " h=" + fmt(h) + ": " + e.what());
            }
        }
    }
    manifest.wall_seconds = seconds_since(start);
    write_manifest(dir, manifest);
    if (!manifest.complete)
        throw PartialResultsError(std::to_string(manifest.failures.size()) + " series failed; first: " +
                                  manifest.failures.front());
    return manifest;
}

std::vector<double> quantum_record_times(const RunSection& run) {
    const double decades = std::log10(run.t_max / run.t_min);
    const int n = std::max(1, static_cast<int>(std::ceil(decades * run.points_per_decade - 1e-9)));
    std::vector<double> t{0.0};
    for (int k = 0; k <= n; ++k) t.push_back(run.t_min * std::pow(10.0, decades * k / n));
    t.back() = run.t_max;
    return t;
}

RunManifest simulate_quantum(const ExperimentConfig& config) {
    config.validate();
    if (config.model.family != ModelFamily::quantum) throw ConfigError("model.family", "simulate-quantum needs family = quantum");
    const auto& c0 = config.constants();
    // Capacity is checked for every size before any work starts.
    for (int L : config.model.Ls) (void)QuantumModelSpec(LatticeGeometry(c0.d, L), c0.J, c0.critical_point, 0.0);

    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = config.run.output_dir;
    fs::create_directories(dir);
    RunManifest manifest;
    manifest.config_text = serialize_config(config);
    manifest.constants = c0;
    manifest.code_version = kCodeVersion;

    const auto times = quantum_record_times(config.run);
    for (int L : config.model.Ls) {
        for (double h : config.model.hs) {
            try {
                const QuantumModelSpec spec(LatticeGeometry(c0.d, L), c0.J, c0.critical_point, h);
                write_series_files(manifest, dir, run_quantum_quench(spec, times, config.run.krylov_tol));
            } catch (const std::exception& e) {
                manifest.complete = false;
                manifest.failures.push_back("L=" + std::to_string(L) + " h=" + fmt(h) + ": " + e.what());
            }
        }
    }
    manifest.wall_seconds = seconds_since(start);
    write_manifest(dir, manifest);
    if (!manifest.complete)
        throw PartialResultsError(std::to_string(manifest.failures.size()) + " series failed; first: " +
                                  manifest.failures.front());
    return manifest;
}

RunManifest make_synthetic_files(const ExperimentConfig& config) {
    config.validate();
    SyntheticSpec spec;
    spec.constants = config.constants();
    spec.w_star = config.synthetic.w_star;
    spec.Ls = config.model.Ls;
    spec.hs = config.model.hs;
    spec.function = config.synthetic.function;
    spec.x_min = config.synthetic.x_min;
    spec.x_max = config.synthetic.x_max;
    spec.points_per_decade = config.synthetic.points_per_decade;
    spec.noise = config.synthetic.noise;
    spec.seed = *config.run.seed;
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("synthetic", e.what());
    }

    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = config.run.output_dir;
    fs::create_directories(dir);
    RunManifest manifest;
    manifest.config_text = serialize_config(config);
    manifest.constants = spec.constants;
    manifest.code_version = kCodeVersion;
    for (const auto& s : make_synthetic(spec)) write_series_files(manifest, dir, s);
    manifest.wall_seconds = seconds_since(start);
    write_manifest(dir, manifest);
    return manifest;
}

CriticalConstants analysis_constants(const std::vector<EnsembleSeries>& series, const ExperimentConfig* config) {
    if (series.empty()) throw std::invalid_argument("no input series");
    const auto& label = series.front().label;
    auto c = default_constants(label.family, label.d);
    if (!config) return c;
    const auto& m = config->model;
    // A config without constant overrides defers to the series labels.
    if (!m.eta && !m.z && !m.critical_point && m.J == 1.0) return c;
    if (config->model.family != label.family || config->model.d != label.d)
        throw ConfigError("model", "config model does not match the input series");
    return apply_overrides(c, config->model);
}

CollapseReport analyze_collapse(const std::vector<fs::path>& files, const ExperimentConfig& config,
                                const fs::path& out_dir) {
    validate_analysis(config.analysis);
    if (files.size() < 2) throw std::invalid_argument("collapse analysis needs at least 2 series files");
    const auto series = load_all(files);
    require_consistent(series);
    std::set<int> Ls;
    std::set<double> hs;
    for (const auto& s : series) {
        Ls.insert(s.label.L);
        hs.insert(s.label.h);
    }
    if (Ls.size() < 2 && hs.size() < 2) throw std::invalid_argument("input series must span at least 2 values of L or h");

    const auto c = analysis_constants(series, &config);
    const auto& a = config.analysis;
    const auto windows = a.windows();
    CollapseReport report;
    report.result = estimate_w(series, c, windows, a.k, a.options(), config.run.threads);
    const auto& r = report.result;

    json table = json::array();
    for (const auto& e : r.estimates)
        table.push_back({{"beta", e.window.beta_frac},
                         {"gamma", e.window.gamma_frac},
                         {"w_opt", e.w_opt},
                         {"cost", e.cost_min},
                         {"n_grid", e.n_grid},
                         {"accepted", e.accepted},
                         {"reason", e.reason}});
    json crossover = json::array();
    for (std::size_t i = 0; i < series.size(); ++i)
        crossover.push_back({{"L", series[i].label.L}, {"h", series[i].label.h}, {"t_x", r.crossover_times[i]}});
    const json j{{"inputs", inputs_json(files)},
                 {"constants", constants_json(c)},
                 {"w_rep", r.w_rep},
                 {"sigma_sys", r.sigma_sys},
                 {"k", r.k},
                 {"band", {r.band_low(), r.band_high()}},
                 {"accepted_windows", r.accepted_count()},
                 {"min_accepted_cost", r.min_accepted_cost()},
                 {"crossover_times", crossover},
                 {"windows", table},
                 {"code_version", kCodeVersion}};
    report.report = out_dir / "collapse_report.json";
    write_text(report.report, j.dump(2) + "\n");

    std::string csv = "L,h,time,x,y,y_err\n";
    for (const auto& s : series) {
        const auto curve = rescale_curve(s, c, r.w_rep);
        for (std::size_t k = 0; k < curve.size(); ++k)
            csv += std::to_string(s.label.L) + "," + fmt(s.label.h) + "," + fmt(curve.times[k]) + "," +
                   fmt(curve.x_values[k]) + "," + fmt(curve.y_values[k]) + "," + fmt(curve.y_errors[k]) + "\n";
    }
    report.curves = out_dir / "collapse_curves.csv";
    write_text(report.curves, csv);
    return report;
}

CrossingReport analyze_crossing(const std::vector<fs::path>& files, const ExperimentConfig& config,
                                const fs::path& out_dir) {
    validate_analysis(config.analysis);
    if (files.size() < 2) throw std::invalid_argument("crossing analysis needs at least 2 series files");
    const auto series = load_all(files);
    require_consistent(series);
    std::set<int> Ls;
    for (const auto& s : series) {
        if (s.label.h != series.front().label.h) throw std::invalid_argument("crossing analysis needs a single h value");
        if (!Ls.insert(s.label.L).second) throw std::invalid_argument("crossing analysis needs distinct L values");
    }
    const auto c = analysis_constants(series, &config);
    const double w = config.analysis.crossing_w;
    std::vector<RescaledCurve> curves;
    for (const auto& s : series) curves.push_back(rescale_curve(s, c, w));

    CrossingReport report;
    report.diagnostic = crossing_spread(curves, config.analysis.grid_points_per_decade);
    const auto& d = report.diagnostic;
    const json j{{"inputs", inputs_json(files)},
                 {"constants", constants_json(c)},
                 {"w", w},
                 {"x_min", d.x_min},
                 {"delta_min", d.delta[d.index_min]},
                 {"grid_points", d.x_grid.size()},
                 {"code_version", kCodeVersion}};
    report.report = out_dir / "crossing_report.json";
    write_text(report.report, j.dump(2) + "\n");
    std::string csv = "x,delta\n";
    for (std::size_t i = 0; i < d.x_grid.size(); ++i) csv += fmt(d.x_grid[i]) + "," + fmt(d.delta[i]) + "\n";
    report.table = out_dir / "crossing_delta.csv";
    write_text(report.table, csv);
    return report;
}

// ---------------------------------------------------------------------------
// Invariant suite
// ---------------------------------------------------------------------------

namespace {

CheckResult run_check(const std::string& name, const std::function<std::string()>& body) {
    try {
        const auto why = body();
        return {name, why.empty(), why};
    } catch (const std::exception& e) {
        return {name, false, e.what()};
    }
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(unsigned threads) {
    std::vector<CheckResult> out;

    out.push_back(run_check("config-round-trip", [] {
        ExperimentConfig c;
        c.model.Ls = {8, 12};
        c.model.hs = {0.05, 0.1};
        c.model.eta = 0.1;
        c.run.seed = 12345;
        c.analysis.beta_fracs = {0.1, 0.3};
        const auto once = parse_config(serialize_config(c));
        const auto twice = parse_config(serialize_config(once));
        return serialize_config(once) == serialize_config(twice) && serialize_config(c) == serialize_config(once)
                   ? std::string{}
                   : std::string("serialized text changed");
    }));

    out.push_back(run_check("classical-determinism", [threads] {
        const ClassicalModelSpec spec(LatticeGeometry(2, 6), 1.0, default_constants(ModelFamily::classical, 2).critical_point, 0.2);
        const auto sched = QuenchSchedule::log_spaced(50, 5);
        const SeriesLabel label{ModelFamily::classical, 2, 6, 0.2, TimeUnit::t_mcs};
        const auto a = ensemble_average(run_quench_ensemble(spec, sched, 60, 7, 16, 1), label);
        const auto b = ensemble_average(run_quench_ensemble(spec, sched, 60, 7, 16, threads), label);
        return a.mean_M2 == b.mean_M2 && a.stderr_M2 == b.stderr_M2 ? std::string{}
                                                                   : std::string("results depend on thread count");
    }));

    out.push_back(run_check("classical-stationarity", [threads] {
        const auto c = default_constants(ModelFamily::classical, 2);
        const ClassicalModelSpec spec(LatticeGeometry(2, 8), 1.0, c.critical_point, 0.0);
        const auto traj = run_quench_ensemble(spec, QuenchSchedule({0, 100}), 80, 99, 600, threads);
        const auto s = ensemble_average(traj, {ModelFamily::classical, 2, 8, 0.0, TimeUnit::t_mcs});
        const double se = std::hypot(s.stderr_M2[0], s.stderr_M2[1]);
        const double dev = std::abs(s.mean_M2[1] - s.mean_M2[0]);
        return dev <= 4.0 * se ? std::string{} : "M2 moved by " + fmt(dev) + " > 4 * " + fmt(se);
    }));

    out.push_back(run_check("synthetic-recovery", [threads] {
        SyntheticSpec spec;
        spec.constants = default_constants(ModelFamily::classical, 3);
        spec.w_star = 1.3;
        spec.Ls = {10, 12, 14, 16};
        spec.hs = {0.05, 0.1, 0.2};
        const auto series = make_synthetic(spec);
        const auto windows = default_window_grid();
        const auto r = estimate_w(series, spec.constants, windows, 4.0, {}, threads);
        const double err = std::abs(r.w_rep - spec.w_star);
        return err <= 1e-2 ? std::string{} : "recovered " + fmt(r.w_rep) + " for 1.3";
    }));

    out.push_back(run_check("quantum-energy-conservation", [] {
        const QuantumModelSpec spec(LatticeGeometry(2, 4), 1.0, default_constants(ModelFamily::quantum, 2).critical_point, 0.1);
        const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
        const auto q = run_quantum_quench_detailed(spec, times);
        double drift = 0.0;
        for (double e : q.energies) drift = std::max(drift, std::abs(e - q.energies.front()));
        const double rel = drift / std::abs(q.energies.front());
        return rel < 1e-8 ? std::string{} : "relative energy drift " + fmt(rel);
    }));

    out.push_back(run_check("quantum-zero-field-constant", [] {
        const QuantumModelSpec spec(LatticeGeometry(1, 8), 1.0, 1.0, 0.0);
        const std::vector<double> times{0.0, 1.0, 3.0};
        const auto s = run_quantum_quench(spec, times);
        for (double m : s.mean_M2)
            if (std::abs(m - s.mean_M2.front()) > 1e-8 * s.mean_M2.front()) return std::string("series not constant");
        return std::string{};
    }));

    out.push_back(run_check("series-file-round-trip", [] {
        const auto dir = fs::temp_directory_path() / ("quench-validate-" + std::to_string(::getpid()));
        EnsembleSeries s;
        s.label = {ModelFamily::classical, 3, 10, 0.1, TimeUnit::t_mcs};
        s.times = {0, 1, 2, 5};
        s.mean_M2 = {1.0 / 3.0, 0.1 + 0.2, 1e-300, 123456.789};
        s.stderr_M2 = {0.0, 1e-17, 2.5, 0.125};
        s.n_realizations = 17;
        const auto path = dir / series_filename(s.label);
        write_series(path, s);
        const auto back = read_series(path);
        fs::remove_all(dir);
        const bool same = back.label == s.label && back.times == s.times && back.mean_M2 == s.mean_M2 &&
                          back.stderr_M2 == s.stderr_M2 && back.n_realizations == s.n_realizations;
        return same ? std::string{} : std::string("series changed on disk");
    }));
    return out;
}

}  // namespace quench
