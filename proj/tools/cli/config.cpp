#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "critwave/errors.hpp"
#include "critwave/phase_plane.hpp"

namespace critwave::cli {

namespace {

const std::vector<std::pair<Command, std::string>>& command_table() {
    static const std::vector<std::pair<Command, std::string>> table{
        {Command::simulate, "simulate"},         {Command::verify_super, "verify-super"},
        {Command::verify_sub, "verify-sub"},     {Command::bump, "bump"},
        {Command::bramson, "bramson"},           {Command::wave_profile, "wave-profile"},
        {Command::phase_search, "phase-search"}, {Command::sweep, "sweep"}};
    return table;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& expected, const std::string& text) {
    throw ConfigError("key '" + key + "': expected " + expected + ", got '" + text + "'");
}

double to_double(const std::string& key, const std::string& text) {
    double x = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(x)) {
        bad_value(key, "a finite number", text);
    }
    return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t x = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || end != text.data() + text.size()) bad_value(key, "a non-negative integer", text);
    return x;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    bad_value(key, "true or false", text);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
    if (out.empty()) bad_value(key, "a comma-separated list of numbers", text);
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_number(xs[i]);
    return s;
}

std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
    return s;
}

struct InitSpec {
    std::string kind = "indicator";
    std::optional<double> left, right, height, B, q;
};

// Parsed values before defaults and validation.
struct Draft {
    ExperimentConfig cfg;
    SuperSolParams super{};
    bool super_given = false;
    SubSolParams sub{};
    bool sub_given = false;
    InitSpec u0, v0;
    std::optional<std::string> command_name;
    std::optional<std::string> sweep_command_name;

    Draft() {
        sub.r2 = sub.c2 = sub.k = 0.0;
    }
};

using Setter = std::function<void(Draft&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::optional<std::string>(const ExperimentConfig&)>;

struct KeyDef {
    std::string name;
    Setter set;
    Getter get;
};

template <typename F>
Setter number(F apply) {
    return [apply](Draft& d, const std::string& k, const std::string& v) { apply(d, to_double(k, v)); };
}

template <typename F>
Setter integer(F apply) {
    return [apply](Draft& d, const std::string& k, const std::string& v) { apply(d, to_unsigned(k, v)); };
}

template <typename F>
Setter boolean(F apply) {
    return [apply](Draft& d, const std::string& k, const std::string& v) { apply(d, to_bool(k, v)); };
}

Getter show(std::function<double(const ExperimentConfig&)> f) {
    return [f](const ExperimentConfig& c) { return std::optional(format_number(f(c))); };
}

Getter show_int(std::function<std::uint64_t(const ExperimentConfig&)> f) {
    return [f](const ExperimentConfig& c) { return std::optional(std::to_string(f(c))); };
}

Getter show_bool(std::function<bool(const ExperimentConfig&)> f) {
    return [f](const ExperimentConfig& c) { return std::optional(std::string(f(c) ? "true" : "false")); };
}

Getter show_super(std::function<double(const SuperSolParams&)> f) {
    return [f](const ExperimentConfig& c) -> std::optional<std::string> {
        if (!c.super) return std::nullopt;
        return format_number(f(*c.super));
    };
}

Getter show_sub(std::function<double(const SubSolParams&)> f) {
    return [f](const ExperimentConfig& c) -> std::optional<std::string> {
        if (!c.sub) return std::nullopt;
        return format_number(f(*c.sub));
    };
}

const SpeciesInit& species_init(const ExperimentConfig& c, bool is_u) { return is_u ? c.init.u : c.init.v; }

std::vector<KeyDef> init_keys(bool is_u) {
    const std::string p = is_u ? "u0" : "v0";
    auto spec = [is_u](Draft& d) -> InitSpec& { return is_u ? d.u0 : d.v0; };
    auto indicator = [is_u](const ExperimentConfig& c) -> const IndicatorInit* {
        return std::get_if<IndicatorInit>(&species_init(c, is_u));
    };
    auto tail = [is_u](const ExperimentConfig& c) -> const ExponentialTailInit* {
        return std::get_if<ExponentialTailInit>(&species_init(c, is_u));
    };
    return {
        {p,
         [spec](Draft& d, const std::string& k, const std::string& v) {
             if (v != "indicator" && v != "zero" && v != "exp_tail") bad_value(k, "indicator, zero or exp_tail", v);
             spec(d).kind = v;
         },
         [is_u](const ExperimentConfig& c) -> std::optional<std::string> {
             const auto& s = species_init(c, is_u);
             if (std::holds_alternative<ZeroInit>(s)) return "zero";
             if (std::holds_alternative<ExponentialTailInit>(s)) return "exp_tail";
             return "indicator";
         }},
        {p + "_left", number([spec](Draft& d, double x) { spec(d).left = x; }),
         [indicator](const ExperimentConfig& c) -> std::optional<std::string> {
             if (auto* i = indicator(c)) return format_number(i->intervals.front().first);
             return std::nullopt;
         }},
        {p + "_right", number([spec](Draft& d, double x) { spec(d).right = x; }),
         [indicator](const ExperimentConfig& c) -> std::optional<std::string> {
             if (auto* i = indicator(c)) return format_number(i->intervals.front().second);
             return std::nullopt;
         }},
        {p + "_height", number([spec](Draft& d, double x) { spec(d).height = x; }),
         [indicator](const ExperimentConfig& c) -> std::optional<std::string> {
             if (auto* i = indicator(c)) return format_number(i->height);
             return std::nullopt;
         }},
        {p + "_B", number([spec](Draft& d, double x) { spec(d).B = x; }),
         [tail](const ExperimentConfig& c) -> std::optional<std::string> {
             if (auto* t = tail(c)) return format_number(t->B);
             return std::nullopt;
         }},
        {p + "_q", number([spec](Draft& d, double x) { spec(d).q = x; }),
         [tail](const ExperimentConfig& c) -> std::optional<std::string> {
             if (auto* t = tail(c)) return format_number(t->q);
             return std::nullopt;
         }},
    };
}

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table = [] {
        std::vector<KeyDef> t{
            {"command", [](Draft& d, const std::string&, const std::string& v) { d.command_name = v; },
             [](const ExperimentConfig& c) { return std::optional(to_string(c.command)); }},
            {"a", number([](Draft& d, double x) { d.cfg.params.a = x; }), show([](auto& c) { return c.params.a; })},
            {"b", number([](Draft& d, double x) { d.cfg.params.b = x; }), show([](auto& c) { return c.params.b; })},
            {"d", number([](Draft& d, double x) { d.cfg.params.d = x; }), show([](auto& c) { return c.params.d; })},
            {"r", number([](Draft& d, double x) { d.cfg.params.r = x; }), show([](auto& c) { return c.params.r; })},
            {"dt", number([](Draft& d, double x) { d.cfg.solver.dt = x; }), show([](auto& c) { return c.solver.dt; })},
            {"t_end", number([](Draft& d, double x) { d.cfg.solver.t_end = x; }),
             show([](auto& c) { return c.solver.t_end; })},
            {"dx", number([](Draft& d, double x) { d.cfg.solver.dx = x; }), show([](auto& c) { return c.solver.dx; })},
            {"boundary",
             [](Draft& d, const std::string& k, const std::string& v) {
                 if (v == "no_flux") d.cfg.solver.boundary = Boundary::no_flux;
                 else if (v == "absorbing") d.cfg.solver.boundary = Boundary::absorbing;
                 else bad_value(k, "no_flux or absorbing", v);
             },
             [](const ExperimentConfig& c) {
                 return std::optional<std::string>(c.solver.boundary == Boundary::no_flux ? "no_flux" : "absorbing");
             }},
            {"snapshot_stride", integer([](Draft& d, std::uint64_t n) { d.cfg.solver.snapshot_stride = n; }),
             show_int([](auto& c) { return c.solver.snapshot_stride; })},
            {"field_stride", integer([](Draft& d, std::uint64_t n) { d.cfg.solver.field_stride = n; }),
             show_int([](auto& c) { return c.solver.field_stride; })},
            {"domain_margin", number([](Draft& d, double x) { d.cfg.solver.domain_margin = x; }),
             show([](auto& c) { return c.solver.domain_margin; })},
            {"half_width", number([](Draft& d, double x) { d.cfg.solver.half_width = x; }),
             show([](auto& c) { return c.solver.half_width; })},
            {"reaction", boolean([](Draft& d, bool b) { d.cfg.solver.reaction = b; }),
             show_bool([](auto& c) { return c.solver.reaction; })},
            {"startup_steps", integer([](Draft& d, std::uint64_t n) { d.cfg.solver.startup_steps = n; }),
             show_int([](auto& c) { return c.solver.startup_steps; })},
        };
        for (bool is_u : {true, false}) {
            auto keys = init_keys(is_u);
            t.insert(t.end(), keys.begin(), keys.end());
        }
        std::vector<KeyDef> rest{
            {"out",
             [](Draft& d, const std::string& k, const std::string& v) {
                 if (v.empty()) bad_value(k, "a directory path", v);
                 d.cfg.out = v;
             },
             [](const ExperimentConfig& c) { return std::optional(c.out); }},
            {"jobs",
             integer([](Draft& d, std::uint64_t n) {
                 if (n < 1) throw ConfigError("key 'jobs': must be >= 1");
                 d.cfg.jobs = n;
             }),
             show_int([](auto& c) { return c.jobs; })},
            {"csv_stride", integer([](Draft& d, std::uint64_t n) { d.cfg.csv_stride = n; }),
             show_int([](auto& c) { return c.csv_stride; })},
            {"level", number([](Draft& d, double x) { d.cfg.level = x; }), show([](auto& c) { return c.level; })},
            {"r1", number([](Draft& d, double x) { d.super.r1 = x; d.super_given = true; }),
             show_super([](auto& s) { return s.r1; })},
            {"c1", number([](Draft& d, double x) { d.super.c1 = x; d.super_given = true; }),
             show_super([](auto& s) { return s.c1; })},
            {"q", number([](Draft& d, double x) { d.super.q = x; d.super_given = true; }),
             show_super([](auto& s) { return s.q; })},
            {"tau", number([](Draft& d, double x) { d.super.tau = x; d.super_given = true; }),
             show_super([](auto& s) { return s.tau; })},
            {"B1", number([](Draft& d, double x) { d.super.B1 = x; d.super_given = true; }),
             show_super([](auto& s) { return s.B1; })},
            {"mu", number([](Draft& d, double x) { d.super.mu = x; d.super_given = true; }),
             [](const ExperimentConfig& c) -> std::optional<std::string> {
                 if (!c.super || !c.super->mu) return std::nullopt;
                 return format_number(*c.super->mu);
             }},
            {"r2", number([](Draft& d, double x) { d.sub.r2 = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.r2; })},
            {"c2", number([](Draft& d, double x) { d.sub.c2 = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.c2; })},
            {"delta", number([](Draft& d, double x) { d.sub.delta = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.delta; })},
            {"theta", number([](Draft& d, double x) { d.sub.theta = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.theta; })},
            {"k", number([](Draft& d, double x) { d.sub.k = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.k; })},
            {"gamma", number([](Draft& d, double x) { d.sub.gamma = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.gamma; })},
            {"B2", number([](Draft& d, double x) { d.sub.B2 = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.B2; })},
            {"zeta0", number([](Draft& d, double x) { d.sub.zeta0 = x; d.sub_given = true; }),
             show_sub([](auto& s) { return s.zeta0; })},
            {"allow_invalid_bounds", boolean([](Draft& d, bool b) { d.cfg.allow_invalid_bounds = b; }),
             show_bool([](auto& c) { return c.allow_invalid_bounds; })},
            {"onset", number([](Draft& d, double x) { d.cfg.onset = x; }), show([](auto& c) { return c.onset; })},
            {"scan_nt", integer([](Draft& d, std::uint64_t n) { d.cfg.scan_nt = n; }),
             show_int([](auto& c) { return c.scan_nt; })},
            {"scan_nx", integer([](Draft& d, std::uint64_t n) { d.cfg.scan_nx = n; }),
             show_int([](auto& c) { return c.scan_nx; })},
            {"epsilon", number([](Draft& d, double x) { d.cfg.epsilon = x; }), show([](auto& c) { return c.epsilon; })},
            {"scan_ratio", number([](Draft& d, double x) { d.cfg.scan_ratio = x; }),
             show([](auto& c) { return c.scan_ratio; })},
            {"ordering", boolean([](Draft& d, bool b) { d.cfg.ordering = b; }),
             show_bool([](auto& c) { return c.ordering; })},
            {"ordering_tolerance", number([](Draft& d, double x) { d.cfg.ordering_tolerance = x; }),
             show([](auto& c) { return c.ordering_tolerance; })},
            {"bump_onset", number([](Draft& d, double x) { d.cfg.bump_onset = x; }),
             show([](auto& c) { return c.bump_onset; })},
            {"fit_t_min", number([](Draft& d, double x) { d.cfg.fit_t_min = x; }),
             show([](auto& c) { return c.fit_t_min; })},
            {"fit_t_max", number([](Draft& d, double x) { d.cfg.fit_t_max = x; }),
             show([](auto& c) { return c.fit_t_max; })},
            {"profile_times",
             [](Draft& d, const std::string& k, const std::string& v) { d.cfg.profile_times = to_list(k, v); },
             [](const ExperimentConfig& c) { return std::optional(join(c.profile_times)); }},
            {"wave_c", number([](Draft& d, double x) { d.cfg.wave_c = x; }), show([](auto& c) { return c.wave_c; })},
            {"alpha", number([](Draft& d, double x) { d.cfg.alpha = x; }), show([](auto& c) { return c.alpha; })},
            {"beta", number([](Draft& d, double x) { d.cfg.beta = x; }), show([](auto& c) { return c.beta; })},
            {"c_values", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.c_values = to_list(k, v); },
             [](const ExperimentConfig& c) { return std::optional(join(c.c_values)); }},
            {"ensemble", integer([](Draft& d, std::uint64_t n) { d.cfg.ensemble = n; }),
             show_int([](auto& c) { return c.ensemble; })},
            {"seed", integer([](Draft& d, std::uint64_t n) { d.cfg.seed = n; }),
             show_int([](auto& c) { return c.seed; })},
            {"span", number([](Draft& d, double x) { d.cfg.span = x; }), show([](auto& c) { return c.span; })},
            {"sweep_command", [](Draft& d, const std::string&, const std::string& v) { d.sweep_command_name = v; },
             [](const ExperimentConfig& c) -> std::optional<std::string> {
                 if (c.command != Command::sweep) return std::nullopt;
                 return to_string(c.sweep_command);
             }},
            {"sweep_key", [](Draft& d, const std::string&, const std::string& v) { d.cfg.sweep_key = v; },
             [](const ExperimentConfig& c) -> std::optional<std::string> {
                 if (c.command != Command::sweep) return std::nullopt;
                 return c.sweep_key;
             }},
            {"sweep_values",
             [](Draft& d, const std::string&, const std::string& v) { d.cfg.sweep_values = split_list(v); },
             [](const ExperimentConfig& c) -> std::optional<std::string> {
                 if (c.command != Command::sweep) return std::nullopt;
                 return join(c.sweep_values);
             }},
        };
        t.insert(t.end(), rest.begin(), rest.end());
        return t;
    }();
    return table;
}

const KeyDef* find_key(const std::string& name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

std::vector<std::pair<std::string, std::string>> tokenize(const std::string& text) {
    static const std::regex around_eq(R"([ \t]*=[ \t]*)");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream lines(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(lines, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = std::regex_replace(line, around_eq, "=");
        std::istringstream words(line);
        std::string word;
        while (words >> word) {
            const auto eq = word.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ConfigError("line " + std::to_string(number) + ": expected key=value, got '" + word + "'");
            }
            pairs.emplace_back(word.substr(0, eq), word.substr(eq + 1));
        }
    }
    return pairs;
}

SpeciesInit build_init(const InitSpec& s, const std::string& prefix) {
    auto reject_keys = [&](std::initializer_list<std::pair<const char*, bool>> keys) {
        for (const auto& [name, given] : keys) {
            if (given) {
                throw ConfigError("key '" + prefix + name + "' does not apply to " + prefix + " = " + s.kind);
            }
        }
    };
    if (s.kind == "zero") {
        reject_keys({{"_left", bool(s.left)}, {"_right", bool(s.right)}, {"_height", bool(s.height)},
                     {"_B", bool(s.B)}, {"_q", bool(s.q)}});
        return ZeroInit{};
    }
    if (s.kind == "exp_tail") {
        reject_keys({{"_left", bool(s.left)}, {"_right", bool(s.right)}, {"_height", bool(s.height)}});
        return ExponentialTailInit{s.B.value_or(1.0), s.q.value_or(1.0)};
    }
    reject_keys({{"_B", bool(s.B)}, {"_q", bool(s.q)}});
    IndicatorInit ind;
    ind.intervals = {{s.left.value_or(-1.0), s.right.value_or(1.0)}};
    ind.height = s.height.value_or(1.0);
    return ind;
}

bool needs_super(Command c) { return c == Command::verify_super; }
bool needs_sub(Command c) { return c == Command::verify_sub; }

ExperimentConfig finish(Draft& d) {
    ExperimentConfig& c = d.cfg;
    c.command = parse_command(d.command_name.value_or("simulate"));
    if (d.sweep_command_name) c.sweep_command = parse_command(*d.sweep_command_name);
    c.init.u = build_init(d.u0, "u0");
    c.init.v = build_init(d.v0, "v0");

    c.params.validate();
    c.solver.validate(c.params);
    c.init.validate();
    if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("key 'level': must lie in (0, 1)");
    if (c.csv_stride < 1) throw ConfigError("key 'csv_stride': must be >= 1");
    if (c.out.find_first_of(" \t#") != std::string::npos) {
        throw ConfigError("key 'out': must not contain whitespace or '#'");
    }

    if (d.super_given || needs_super(c.command)) {
        c.super = complete_super_params(c.params, d.super);
        if (!c.allow_invalid_bounds) c.super->validate(c.params);
    }
    if (d.sub_given || needs_sub(c.command)) {
        c.sub = complete_sub_params(c.params, d.sub);
        if (!c.allow_invalid_bounds) c.sub->validate(c.params);
    }
    if (c.onset < 0.0) throw ConfigError("key 'onset': must be >= 0 (0 searches for it)");
    if (c.scan_nt < 1 || c.scan_nx < 1) throw ConfigError("keys 'scan_nt', 'scan_nx': must be >= 1");
    if (!(c.epsilon > 0.0)) throw ConfigError("key 'epsilon': must be > 0");
    if (!(c.scan_ratio >= 1.0)) throw ConfigError("key 'scan_ratio': must be >= 1");
    if (!(c.ordering_tolerance > 0.0)) throw ConfigError("key 'ordering_tolerance': must be > 0");
    if (!(c.bump_onset > 0.0)) throw ConfigError("key 'bump_onset': must be > 0");
    if (!(c.fit_t_min >= 0.0)) throw ConfigError("key 'fit_t_min': must be >= 0");
    if (c.fit_t_max != 0.0 && !(c.fit_t_max > c.fit_t_min)) {
        throw ConfigError("key 'fit_t_max': must exceed fit_t_min (or be 0 for t_end)");
    }
    if (c.wave_c < 0.0) throw ConfigError("key 'wave_c': must be >= 0 (0 selects the minimal speed)");
    if (c.command == Command::phase_search) {
        TwParams{c.alpha, c.beta, 1.0, c.params.d, c.params.r}.validate();
    }
    if (c.ensemble < 1) throw ConfigError("key 'ensemble': must be >= 1");
    if (!(c.span > 0.0)) throw ConfigError("key 'span': must be > 0");

    if (c.command == Command::sweep) {
        if (c.sweep_command == Command::sweep) throw ConfigError("key 'sweep_command': sweeps cannot nest");
        static const std::set<std::string> fixed{"command", "out", "jobs", "sweep_command", "sweep_key", "sweep_values"};
        if (!find_key(c.sweep_key) || fixed.contains(c.sweep_key)) {
            throw ConfigError("key 'sweep_key': '" + c.sweep_key + "' cannot be swept");
        }
        if (c.sweep_values.empty()) throw ConfigError("key 'sweep_values': needs at least one value");
        std::set<std::string> seen;
        for (const auto& v : c.sweep_values) {
            if (v.empty() || !seen.insert(v).second) {
                throw ConfigError("key 'sweep_values': values must be non-empty and distinct");
            }
            sweep_child(c, v);  // validates eagerly
        }
    } else {
        c.sweep_command = Command::simulate;
        c.sweep_key.clear();
        c.sweep_values.clear();
    }
    return c;
}

ExperimentConfig parse_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    Draft d;
    for (const auto& [key, value] : pairs) {
        const KeyDef* def = find_key(key);
        if (!def) throw ConfigError("unknown key '" + key + "'");
        def->set(d, key, value);
    }
    return finish(d);
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [c, name] : command_table()) n.push_back(name);
        return n;
    }();
    return names;
}

std::string to_string(Command c) {
    for (const auto& [cmd, name] : command_table())
        if (cmd == c) return name;
    return "unknown";
}

Command parse_command(const std::string& name) {
    for (const auto& [cmd, n] : command_table())
        if (n == name) return cmd;
    std::string list;
    for (const auto& n : command_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("key 'command': unknown command '" + name + "' (expected one of " + list + ")");
}

std::string format_number(double x) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

ExperimentConfig parse_config(const std::string& text) { return parse_config(text, {}); }

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    auto pairs = tokenize(text);
    std::set<std::string> seen;
    for (const auto& [key, value] : pairs) {
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value, got '" + o + "'");
        const std::string key = o.substr(0, eq), value = o.substr(eq + 1);
        auto it = std::find_if(pairs.begin(), pairs.end(), [&](const auto& kv) { return kv.first == key; });
        if (it != pairs.end()) it->second = value;
        else pairs.emplace_back(key, value);
    }
    return parse_pairs(pairs);
}

std::string serialize(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& k : key_table()) {
        if (auto v = k.get(cfg)) out += k.name + " = " + *v + "\n";
    }
    return out;
}

ExperimentConfig sweep_child(const ExperimentConfig& parent, const std::string& value) {
    ExperimentConfig base = parent;
    base.command = parent.sweep_command;
    base.sweep_key.clear();
    base.sweep_values.clear();
    return parse_config(serialize(base), {parent.sweep_key + "=" + value,
                                          "out=" + parent.out + "/" + parent.sweep_key + "=" + value});
}

}  // namespace critwave::cli
