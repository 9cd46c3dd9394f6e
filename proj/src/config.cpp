#include "crane/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace crane::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line) {
    const std::string t = trim(v);
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) fail(line, "expected a number, got '" + t + "'");
    return x;
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
    if (out.empty()) fail(line, "expected a comma-separated list of numbers");
    return out;
}

long long parse_int(const std::string& v, int line) {
    const std::string t = trim(v);
    char* end = nullptr;
    const long long x = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size()) fail(line, "expected an integer, got '" + t + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    const std::string t = trim(v);
    char* end = nullptr;
    const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        fail(line, "expected an unsigned integer, got '" + t + "'");
    return x;
}

bool parse_bool(const std::string& v, int line) {
    const std::string t = trim(v);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    fail(line, "expected true/false, got '" + t + "'");
}

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::set<std::string> kSections{"params", "scenario", "poles", "integration", "stability"};

const std::map<std::string, std::set<std::string>> kKeys{
    {"params", {"M", "m", "I", "g", "l"}},
    {"scenario", {"model", "start", "target", "settle_fraction"}},
    {"poles", {"poles", "assign_z", "assign_l", "assign_theta"}},
    {"integration", {"step", "horizon", "adaptive", "abs_tol", "rel_tol"}},
    {"stability", {"radius_max", "samples", "seed"}},
};

} // namespace

RunConfig parse(const std::string& text) {
    std::map<std::string, Section> doc;
    std::string section;
    int section_line = 0;

    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (!kSections.count(section)) fail(line, "unknown section [" + section + "]");
            section_line = line;
            doc[section]; // sections may legitimately be empty
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
        if (section.empty()) fail(line, "key outside of any section");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (!kKeys.at(section).count(key)) fail(line, "unknown key '" + key + "' in [" + section + "]");
        if (doc[section].count(key)) fail(line, "duplicate key '" + key + "' in [" + section + "]");
        doc[section][key] = {value, line};
    }
    (void)section_line;

    auto need = [&](const std::string& sec, const std::string& key) -> const Entry& {
        const auto si = doc.find(sec);
        if (si == doc.end() || !si->second.count(key))
            throw ConfigError("missing required key '" + key + "' in [" + sec + "]");
        return si->second.at(key);
    };
    auto maybe = [&](const std::string& sec, const std::string& key) -> const Entry* {
        const auto si = doc.find(sec);
        if (si == doc.end()) return nullptr;
        const auto ki = si->second.find(key);
        return ki == si->second.end() ? nullptr : &ki->second;
    };

    RunConfig cfg;
    sim::Scenario& sc = cfg.scenario;

    // [scenario] first: the model decides the expected vector sizes.
    {
        const Entry& e = need("scenario", "model");
        const std::string m = trim(e.value);
        if (m == "varying6")
            sc.model = sim::CraneModelKind::varying6;
        else if (m == "constant4")
            sc.model = sim::CraneModelKind::constant4;
        else
            fail(e.line, "model must be varying6 or constant4, got '" + m + "'");
    }

    sc.params.M = parse_double(need("params", "M").value, need("params", "M").line);
    sc.params.m = parse_double(need("params", "m").value, need("params", "m").line);
    sc.params.I = parse_double(need("params", "I").value, need("params", "I").line);
    sc.params.g = parse_double(need("params", "g").value, need("params", "g").line);
    if (const Entry* e = maybe("params", "l"))
        sc.params.l = parse_double(e->value, e->line);
    else if (sc.model == sim::CraneModelKind::constant4)
        throw ConfigError("missing required key 'l' in [params] (fixed-rope model)");

    {
        const Entry& e = need("scenario", "start");
        sc.start = parse_list(e.value, e.line);
        if (static_cast<int>(sc.start.size()) != sc.dim())
            fail(e.line, "start must have " + std::to_string(sc.dim()) + " components");
    }
    {
        const Entry& e = need("scenario", "target");
        sc.target = parse_list(e.value, e.line);
        if (static_cast<int>(sc.target.size()) != sc.dim())
            fail(e.line, "target must have " + std::to_string(sc.dim()) + " components");
    }
    if (const Entry* e = maybe("scenario", "settle_fraction"))
        sc.settle_fraction = parse_double(e->value, e->line);

    {
        const Entry& e = need("poles", "poles");
        sc.poles.poles = parse_list(e.value, e.line);
        if (static_cast<int>(sc.poles.poles.size()) != sc.dim())
            fail(e.line, "expected " + std::to_string(sc.dim()) + " poles");
        for (double p : sc.poles.poles)
            if (!(p < 0.0))
                fail(e.line, "pole " + std::to_string(p) + " is not strictly negative");
    }
    {
        const Entry* ez = maybe("poles", "assign_z");
        const Entry* el = maybe("poles", "assign_l");
        const Entry* et = maybe("poles", "assign_theta");
        const int given = (ez != nullptr) + (el != nullptr) + (et != nullptr);
        if (given != 0) {
            if (sc.model != sim::CraneModelKind::varying6)
                fail(ez ? ez->line : (el ? el->line : et->line),
                     "channel assignment applies to the varying-rope model only");
            if (given != 3)
                throw ConfigError("assign_z, assign_l, assign_theta must be given together");
            synthesis::ChannelAssignment asg;
            const Entry* entries[3] = {ez, el, et};
            for (int c = 0; c < 3; ++c) {
                auto pair = parse_list(entries[c]->value, entries[c]->line);
                if (pair.size() != 2) fail(entries[c]->line, "expected a pole pair");
                asg.pairs[c] = {pair[0], pair[1]};
            }
            if (!asg.covers(sc.poles))
                throw ConfigError("channel assignment does not partition the pole set");
            sc.assignment = asg;
        }
    }

    if (const Entry* e = maybe("integration", "step")) sc.step = parse_double(e->value, e->line);
    if (const Entry* e = maybe("integration", "horizon"))
        sc.horizon = parse_double(e->value, e->line);
    if (const Entry* e = maybe("integration", "adaptive")) sc.adaptive = parse_bool(e->value, e->line);
    if (const Entry* e = maybe("integration", "abs_tol")) sc.abs_tol = parse_double(e->value, e->line);
    if (const Entry* e = maybe("integration", "rel_tol")) sc.rel_tol = parse_double(e->value, e->line);

    if (const Entry* e = maybe("stability", "radius_max"))
        cfg.stability.radius_max = parse_double(e->value, e->line);
    if (const Entry* e = maybe("stability", "samples"))
        cfg.stability.samples = static_cast<int>(parse_int(e->value, e->line));
    if (const Entry* e = maybe("stability", "seed"))
        cfg.stability.seed = parse_u64(e->value, e->line);

    try {
        sc.validate();
    } catch (const Error& err) {
        throw ConfigError(err.what());
    }
    return cfg;
}

RunConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

namespace {

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += sim::format_double(v[i]);
    }
    return out;
}

} // namespace

std::string serialize(const RunConfig& cfg) {
    const sim::Scenario& sc = cfg.scenario;
    std::string out;
    out += "[params]\n";
    out += "M = " + sim::format_double(sc.params.M) + "\n";
    out += "m = " + sim::format_double(sc.params.m) + "\n";
    out += "I = " + sim::format_double(sc.params.I) + "\n";
    out += "g = " + sim::format_double(sc.params.g) + "\n";
    out += "l = " + sim::format_double(sc.params.l) + "\n";
    out += "\n[scenario]\n";
    out += std::string("model = ") +
           (sc.model == sim::CraneModelKind::varying6 ? "varying6" : "constant4") + "\n";
    out += "start = " + join(sc.start) + "\n";
    out += "target = " + join(sc.target) + "\n";
    out += "settle_fraction = " + sim::format_double(sc.settle_fraction) + "\n";
    out += "\n[poles]\n";
    out += "poles = " + join(sc.poles.poles) + "\n";
    if (sc.assignment) {
        const auto& p = sc.assignment->pairs;
        out += "assign_z = " + join({p[0][0], p[0][1]}) + "\n";
        out += "assign_l = " + join({p[1][0], p[1][1]}) + "\n";
        out += "assign_theta = " + join({p[2][0], p[2][1]}) + "\n";
    }
    out += "\n[integration]\n";
    out += "step = " + sim::format_double(sc.step) + "\n";
    out += "horizon = " + sim::format_double(sc.horizon) + "\n";
    out += std::string("adaptive = ") + (sc.adaptive ? "true" : "false") + "\n";
    out += "abs_tol = " + sim::format_double(sc.abs_tol) + "\n";
    out += "rel_tol = " + sim::format_double(sc.rel_tol) + "\n";
    out += "\n[stability]\n";
    out += "radius_max = " + sim::format_double(cfg.stability.radius_max) + "\n";
    out += "samples = " + std::to_string(cfg.stability.samples) + "\n";
    out += "seed = " + std::to_string(cfg.stability.seed) + "\n";
    return out;
}

bool semantically_equal(const RunConfig& a, const RunConfig& b) {
    const sim::Scenario &sa = a.scenario, &sb = b.scenario;
    if (sa.model != sb.model || sa.start != sb.start || sa.target != sb.target ||
        sa.poles.poles != sb.poles.poles || sa.horizon != sb.horizon || sa.step != sb.step ||
        sa.adaptive != sb.adaptive || sa.abs_tol != sb.abs_tol || sa.rel_tol != sb.rel_tol ||
        sa.settle_fraction != sb.settle_fraction)
        return false;
    if (sa.params.M != sb.params.M || sa.params.m != sb.params.m || sa.params.I != sb.params.I ||
        sa.params.g != sb.params.g || sa.params.l != sb.params.l)
        return false;
    if (sa.assignment.has_value() != sb.assignment.has_value()) return false;
    if (sa.assignment && sa.assignment->pairs != sb.assignment->pairs) return false;
    return a.stability.radius_max == b.stability.radius_max &&
           a.stability.samples == b.stability.samples && a.stability.seed == b.stability.seed;
}

} // namespace crane::config
