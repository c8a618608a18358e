#include "fibermem/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "fibermem/errors.hpp"

namespace fibermem {

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    double out{};
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& v) {
    int out{};
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("expected true or false, got '" + v + "'");
}

std::string num(double v) { return fmt::format("{}", v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

template <class Enum>
Enum to_enum(const std::string& v, std::initializer_list<std::pair<const char*, Enum>> names) {
    std::string options;
    for (const auto& [name, value] : names) {
        if (v == name) return value;
        options += options.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError("expected one of {" + options + "}, got '" + v + "'");
}

#define FM_DOUBLE(sec, name, member)                                                    \
    Field {                                                                              \
        sec, name, [](RunConfig& c, const std::string& v) { c.member = to_double(v); }, \
            [](const RunConfig& c) { return num(c.member); }                             \
    }
#define FM_INT(sec, name, member)                                                    \
    Field {                                                                           \
        sec, name, [](RunConfig& c, const std::string& v) { c.member = to_int(v); }, \
            [](const RunConfig& c) { return std::to_string(c.member); }               \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"geometry", "kind",
         [](RunConfig& c, const std::string& v) {
             c.geometry.kind = to_enum<GeometryKind>(
                 v, {{"spheroid", GeometryKind::Spheroid}, {"strip", GeometryKind::Strip}});
         },
         [](const RunConfig& c) {
             return std::string(c.geometry.kind == GeometryKind::Spheroid ? "spheroid" : "strip");
         }},
        FM_INT("geometry", "n_lat", geometry.n_lat),
        FM_INT("geometry", "n_lon", geometry.n_lon),
        {"geometry", "half",
         [](RunConfig& c, const std::string& v) { c.geometry.half = to_bool(v); },
         [](const RunConfig& c) { return boolean(c.geometry.half); }},
        FM_DOUBLE("geometry", "radius_xy", geometry.radius_xy),
        FM_DOUBLE("geometry", "radius_z", geometry.radius_z),
        {"geometry", "exact_surface",
         [](RunConfig& c, const std::string& v) { c.geometry.exact_surface = to_bool(v); },
         [](const RunConfig& c) { return boolean(c.geometry.exact_surface); }},
        FM_INT("geometry", "nx", geometry.nx),
        FM_INT("geometry", "ny", geometry.ny),
        FM_DOUBLE("geometry", "length", geometry.length),
        FM_DOUBLE("geometry", "width", geometry.width),
        FM_DOUBLE("geometry", "load_length", geometry.load_length),
        {"geometry", "load_position",
         [](RunConfig& c, const std::string& v) {
             c.geometry.load_position = to_enum<LoadSegment>(
                 v, {{"center", LoadSegment::Centered}, {"corner", LoadSegment::Corner}});
         },
         [](const RunConfig& c) {
             return std::string(c.geometry.load_position == LoadSegment::Centered ? "center"
                                                                                   : "corner");
         }},
        FM_DOUBLE("material", "E", material.E),
        FM_DOUBLE("material", "nu", material.nu),
        FM_DOUBLE("material", "t_b", material.t_b),
        FM_DOUBLE("material", "alpha", material.alpha),
        FM_DOUBLE("load", "pressure", load.pressure),
        FM_DOUBLE("load", "traction", load.traction),
        {"load", "traction_direction",
         [](RunConfig& c, const std::string& v) {
             c.load.traction_direction = to_enum<TractionDirection>(
                 v, {{"normal", TractionDirection::Normal},
                     {"tangential", TractionDirection::Tangential}});
         },
         [](const RunConfig& c) {
             return std::string(c.load.traction_direction == TractionDirection::Normal
                                    ? "normal"
                                    : "tangential");
         }},
        FM_DOUBLE("design", "volume", design.volume),
        FM_DOUBLE("design", "t1_min", design.lower[0]),
        FM_DOUBLE("design", "t2_min", design.lower[1]),
        FM_DOUBLE("design", "t1_max", design.upper[0]),
        FM_DOUBLE("design", "t2_max", design.upper[1]),
        {"design", "init_direction",
         [](RunConfig& c, const std::string& v) {
             c.design.init_direction = to_enum<InitDirection>(
                 v, {{"axis", InitDirection::AxisAligned},
                     {"principal", InitDirection::PrincipalFromUnreinforced}});
         },
         [](const RunConfig& c) {
             return std::string(c.design.init_direction == InitDirection::AxisAligned ? "axis"
                                                                                      : "principal");
         }},
        FM_DOUBLE("settings", "eta", settings.eta),
        FM_DOUBLE("settings", "obj_tol", settings.obj_tol),
        FM_DOUBLE("settings", "dir_tol", settings.dir_tol),
        FM_INT("settings", "max_oc_iters", settings.max_oc_iters),
        FM_INT("settings", "max_rotation_updates", settings.max_rotation_updates),
        FM_DOUBLE("settings", "lambda_min", settings.lambda_bracket[0]),
        FM_DOUBLE("settings", "lambda_max", settings.lambda_bracket[1]),
        FM_DOUBLE("settings", "tie_tol", settings.tie_tol),
        FM_DOUBLE("settings", "bound_tol", settings.bound_tol),
        {"settings", "sensitivity",
         [](RunConfig& c, const std::string& v) {
             c.settings.sensitivity = to_enum<SensitivityRule>(
                 v, {{"element_average", SensitivityRule::ElementAverage},
                     {"centroid", SensitivityRule::Centroid}});
         },
         [](const RunConfig& c) {
             return std::string(c.settings.sensitivity == SensitivityRule::ElementAverage
                                    ? "element_average"
                                    : "centroid");
         }},
        {"settings", "strict_monotonicity",
         [](RunConfig& c, const std::string& v) { c.settings.strict_monotonicity = to_bool(v); },
         [](const RunConfig& c) { return boolean(c.settings.strict_monotonicity); }},
        {"settings", "fixed_directions",
         [](RunConfig& c, const std::string& v) { c.settings.fixed_directions = to_bool(v); },
         [](const RunConfig& c) { return boolean(c.settings.fixed_directions); }},
        {"output", "directory",
         [](RunConfig& c, const std::string& v) { c.output.directory = v; },
         [](const RunConfig& c) { return c.output.directory; }},
        {"output", "formats",
         [](RunConfig& c, const std::string& v) {
             c.output.formats.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ','))
                 if (!trim(item).empty()) c.output.formats.push_back(trim(item));
         },
         [](const RunConfig& c) {
             std::string out;
             for (const auto& f : c.output.formats) out += (out.empty() ? "" : ",") + f;
             return out;
         }},
    };
    return table;
}

#undef FM_DOUBLE
#undef FM_INT

// 1-based line of `key` inside `[section]`, 0 when not found.
int locate(std::string_view text, const std::string& section, const std::string& key) {
    std::istringstream in{std::string(text)};
    std::string line, current;
    for (int n = 1; std::getline(in, line); ++n) {
        line = trim(line);
        if (line.size() > 1 && line.front() == '[' && line.back() == ']') {
            current = trim(line.substr(1, line.size() - 2));
        } else if (current == section) {
            const auto eq = line.find('=');
            if (eq != std::string::npos && trim(line.substr(0, eq)) == key) return n;
        }
    }
    return 0;
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
    try {
        material.validate();
        settings.validate();
    } catch (const InvalidArgument& e) {
        fail(e.what());
    }
    const auto& g = geometry;
    if (g.kind == GeometryKind::Spheroid) {
        if (g.n_lat < 2) fail("geometry.n_lat must be >= 2");
        if (g.n_lon < 4 || g.n_lon % 4 != 0) fail("geometry.n_lon must be a multiple of 4, >= 4");
        if (!(g.radius_xy > 0.0) || !(g.radius_z > 0.0)) fail("geometry radii must be positive");
    } else {
        if (g.nx < 1 || g.ny < 1) fail("geometry.nx and geometry.ny must be >= 1");
        if (!(g.length > 0.0) || !(g.width > 0.0)) fail("strip dimensions must be positive");
        if (!(g.load_length > 0.0 && g.load_length <= g.width))
            fail("geometry.load_length must lie in (0, width]");
    }
    if (!std::isfinite(load.pressure) || !std::isfinite(load.traction))
        fail("load values must be finite");
    if (!(design.volume > 0.0)) fail("design.volume must be positive");
    for (int f = 0; f < 2; ++f) {
        if (!(design.lower[f] >= 0.0)) fail("fiber lower bounds must be non-negative");
        if (!(design.upper[f] >= design.lower[f])) fail("fiber upper bound below lower bound");
    }
    if (!(design.upper[0] + design.upper[1] > 0.0)) fail("fiber upper bounds must not both be zero");
    static const std::set<std::string> known{"csv", "vtk", "json"};
    for (const auto& f : output.formats)
        if (!known.count(f)) fail("unknown output format '" + f + "'");
    if (output.directory.empty()) fail("output.directory must not be empty");
}

RunConfig parse_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " +
                          e.message());
    }

    RunConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside any section");
        for (const auto& [key, node] : body) {
            const auto& table = fields();
            auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
                return f.section == section && f.key == key;
            });
            const int line = locate(text, section, key);
            const std::string where =
                "config line " + std::to_string(line) + ", key '" + section + "." + key + "'";
            if (it == table.end()) throw ConfigError(where + ": unknown key");
            try {
                it->set(config, trim(node.data()));
            } catch (const ConfigError& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string emit_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

}  // namespace fibermem
