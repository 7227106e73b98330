#include "resdim/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "resdim/errors.hpp"
#include "resdim/validate.hpp"
#include "format.hpp"

namespace resdim {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Shortest decimal text that parses back to the same double; used by the
// delimited writers so files round-trip exactly.
std::string double_repr(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write '" + path.string() + "'");
    os << content;
    os.flush();
    if (!os) throw InputError("write failed for '" + path.string() + "'");
}

// --- JSON field access with located errors ------------------------------------

[[noreturn]] void fail_schema(const std::string& src, const std::string& path,
                              const std::string& what) {
    throw SchemaError(src + ": " + path + ": " + what);
}

const json* find_key(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& need(const std::string& src, const json& obj, const std::string& path,
                 const char* key) {
    const json* f = find_key(obj, key);
    if (!f) fail_schema(src, path + "." + key, "missing");
    return *f;
}

double need_number(const std::string& src, const json& obj, const std::string& path,
                   const char* key) {
    const json& f = need(src, obj, path, key);
    if (!f.is_number()) fail_schema(src, path + "." + key, "expected a number");
    return f.get<double>();
}

int need_integer(const std::string& src, const json& obj, const std::string& path,
                 const char* key) {
    const json& f = need(src, obj, path, key);
    if (!f.is_number_integer()) fail_schema(src, path + "." + key, "expected an integer");
    return f.get<int>();
}

std::string need_string(const std::string& src, const json& obj, const std::string& path,
                        const char* key) {
    const json& f = need(src, obj, path, key);
    if (!f.is_string()) fail_schema(src, path + "." + key, "expected a string");
    return f.get<std::string>();
}

const json& section(const std::string& src, const json& root, const char* key, bool array) {
    const json* f = find_key(root, key);
    if (!f) throw SchemaError(src + ": missing section '" + std::string(key) + "'");
    if (array && !f->is_array()) fail_schema(src, key, "expected an array");
    if (!array && !f->is_object()) fail_schema(src, key, "expected an object");
    return *f;
}

void check_fields(const std::string& src, const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail_schema(src, path + "." + it.key(), "unknown field");
    }
}

std::string at(const char* sect, size_t i) {
    return std::string(sect) + "[" + std::to_string(i) + "]";
}

const json& entry(const std::string& src, const json& arr, const char* sect, size_t i) {
    const json& e = arr[i];
    if (!e.is_object()) fail_schema(src, at(sect, i), "expected an object");
    return e;
}

// id registration and reference resolution, both with duplicate/unknown checks
int register_id(const std::string& src, std::map<std::string, int>& ids, const std::string& id,
                const std::string& path) {
    auto [it, fresh] = ids.emplace(id, static_cast<int>(ids.size()));
    if (!fresh) fail_schema(src, path, "duplicate id '" + id + "'");
    return it->second;
}

int resolve(const std::string& src, const std::map<std::string, int>& ids, const std::string& id,
            const std::string& path, const char* kind) {
    auto it = ids.find(id);
    if (it == ids.end()) fail_schema(src, path, std::string("unknown ") + kind + " '" + id + "'");
    return it->second;
}

std::vector<double> number_list(const std::string& src, const json& arr, const std::string& path) {
    if (!arr.is_array()) fail_schema(src, path, "expected an array");
    std::vector<double> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            fail_schema(src, path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(arr[i].get<double>());
    }
    return out;
}

// --- delimited-text helpers ----------------------------------------------------

std::string trimmed(std::string s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        out.push_back(trimmed(line.substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& tok, const std::string& src, int lineno) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(src + ":" + std::to_string(lineno) + ": '" + tok + "' is not a number");
    return v;
}

} // namespace

// --- case files ------------------------------------------------------------------

SystemCase parse_case(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string what = e.what();
        if (auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
        throw ParseError(source + ": " + what);
    }
    if (!root.is_object()) throw SchemaError(source + ": top level must be an object");
    for (auto it = root.begin(); it != root.end(); ++it) {
        static const char* known[] = {"name", "zones",  "nodes", "lines",
                                      "generators", "wind", "loads", "options"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known))
            throw SchemaError(source + ": unknown section '" + it.key() + "'");
    }

    SystemCase sys;
    if (const json* n = find_key(root, "name")) {
        if (!n->is_string()) fail_schema(source, "name", "expected a string");
        sys.name = n->get<std::string>();
    }

    std::map<std::string, int> zone_ids;
    {
        const json& zones = section(source, root, "zones", true);
        for (size_t i = 0; i < zones.size(); ++i) {
            if (!zones[i].is_string()) fail_schema(source, at("zones", i), "expected a string");
            std::string z = zones[i].get<std::string>();
            register_id(source, zone_ids, z, at("zones", i));
            sys.zones.push_back(z);
        }
    }

    std::map<std::string, int> node_ids;
    {
        const json& nodes = section(source, root, "nodes", true);
        for (size_t i = 0; i < nodes.size(); ++i) {
            const json& e = entry(source, nodes, "nodes", i);
            check_fields(source, e, at("nodes", i), {"id", "zone"});
            Node nd;
            nd.id = need_string(source, e, at("nodes", i), "id");
            register_id(source, node_ids, nd.id, at("nodes", i) + ".id");
            nd.zone = resolve(source, zone_ids, need_string(source, e, at("nodes", i), "zone"),
                              at("nodes", i) + ".zone", "zone");
            sys.nodes.push_back(nd);
        }
    }

    {
        const json& lines = section(source, root, "lines", true);
        std::map<std::string, int> ids;
        for (size_t i = 0; i < lines.size(); ++i) {
            const json& e = entry(source, lines, "lines", i);
            check_fields(source, e, at("lines", i),
                         {"id", "from", "to", "reactance", "capacity"});
            Line ln;
            ln.id = need_string(source, e, at("lines", i), "id");
            register_id(source, ids, ln.id, at("lines", i) + ".id");
            ln.from = resolve(source, node_ids, need_string(source, e, at("lines", i), "from"),
                              at("lines", i) + ".from", "node");
            ln.to = resolve(source, node_ids, need_string(source, e, at("lines", i), "to"),
                            at("lines", i) + ".to", "node");
            ln.reactance = need_number(source, e, at("lines", i), "reactance");
            ln.capacity = need_number(source, e, at("lines", i), "capacity");
            sys.lines.push_back(ln);
        }
    }

    {
        const json& gens = section(source, root, "generators", true);
        std::map<std::string, int> ids;
        for (size_t i = 0; i < gens.size(); ++i) {
            const json& e = entry(source, gens, "generators", i);
            const std::string p = at("generators", i);
            check_fields(source, e, p,
                         {"id", "node", "energy_price", "up_reserve_price", "down_reserve_price",
                          "capacity", "up_reserve_cap", "down_reserve_cap", "uc"});
            Generator g;
            g.id = need_string(source, e, p, "id");
            register_id(source, ids, g.id, p + ".id");
            g.node = resolve(source, node_ids, need_string(source, e, p, "node"), p + ".node",
                             "node");
            g.energy_price = need_number(source, e, p, "energy_price");
            g.up_reserve_price = need_number(source, e, p, "up_reserve_price");
            g.down_reserve_price = need_number(source, e, p, "down_reserve_price");
            g.capacity = need_number(source, e, p, "capacity");
            g.up_reserve_cap = need_number(source, e, p, "up_reserve_cap");
            g.down_reserve_cap = need_number(source, e, p, "down_reserve_cap");
            if (const json* u = find_key(e, "uc")) {
                if (!u->is_object()) fail_schema(source, p + ".uc", "expected an object");
                const std::string up = p + ".uc";
                check_fields(source, *u, up,
                             {"min_output", "startup_cost", "ramp_up", "ramp_down",
                              "initial_output", "initial_commitment"});
                UcData uc;
                uc.min_output = need_number(source, *u, up, "min_output");
                uc.startup_cost = need_number(source, *u, up, "startup_cost");
                uc.ramp_up = need_number(source, *u, up, "ramp_up");
                uc.ramp_down = need_number(source, *u, up, "ramp_down");
                uc.initial_output = need_number(source, *u, up, "initial_output");
                uc.initial_commitment = need_integer(source, *u, up, "initial_commitment");
                g.uc = uc;
            }
            sys.generators.push_back(g);
        }
    }

    {
        const json& wind = section(source, root, "wind", true);
        std::map<std::string, int> ids;
        for (size_t i = 0; i < wind.size(); ++i) {
            const json& e = entry(source, wind, "wind", i);
            const std::string p = at("wind", i);
            check_fields(source, e, p, {"id", "node", "expected_output", "installed_capacity"});
            WindFarm w;
            w.id = need_string(source, e, p, "id");
            register_id(source, ids, w.id, p + ".id");
            w.node = resolve(source, node_ids, need_string(source, e, p, "node"), p + ".node",
                             "node");
            w.expected_output = need_number(source, e, p, "expected_output");
            w.installed_capacity = need_number(source, e, p, "installed_capacity");
            sys.wind_farms.push_back(w);
        }
    }

    {
        const json& loads = section(source, root, "loads", true);
        std::map<std::string, int> ids;
        for (size_t i = 0; i < loads.size(); ++i) {
            const json& e = entry(source, loads, "loads", i);
            const std::string p = at("loads", i);
            check_fields(source, e, p, {"id", "node", "demand"});
            Load d;
            d.id = need_string(source, e, p, "id");
            register_id(source, ids, d.id, p + ".id");
            d.node = resolve(source, node_ids, need_string(source, e, p, "node"), p + ".node",
                             "node");
            d.demand = need_number(source, e, p, "demand");
            sys.loads.push_back(d);
        }
    }

    {
        const json& opt = section(source, root, "options", false);
        check_fields(source, opt, "options", {"voll", "load_profile", "wind_profile"});
        sys.voll = need_number(source, opt, "options", "voll");
        if (const json* lp = find_key(opt, "load_profile"))
            sys.load_profile = number_list(source, *lp, "options.load_profile");
        if (const json* wp = find_key(opt, "wind_profile"))
            sys.wind_profile = number_list(source, *wp, "options.wind_profile");
    }

    require_valid(sys);
    return sys;
}

SystemCase load_case(const std::filesystem::path& path) {
    return parse_case(read_file(path), path.string());
}

std::string serialize_case(const SystemCase& sys) {
    require_valid(sys);
    ordered root;
    root["name"] = sys.name;
    root["zones"] = sys.zones;
    ordered nodes = ordered::array();
    for (const auto& n : sys.nodes) nodes.push_back({{"id", n.id}, {"zone", sys.zones[n.zone]}});
    root["nodes"] = std::move(nodes);
    ordered lines = ordered::array();
    for (const auto& l : sys.lines)
        lines.push_back({{"id", l.id},
                         {"from", sys.nodes[l.from].id},
                         {"to", sys.nodes[l.to].id},
                         {"reactance", l.reactance},
                         {"capacity", l.capacity}});
    root["lines"] = std::move(lines);
    ordered gens = ordered::array();
    for (const auto& g : sys.generators) {
        ordered e{{"id", g.id},
                  {"node", sys.nodes[g.node].id},
                  {"energy_price", g.energy_price},
                  {"up_reserve_price", g.up_reserve_price},
                  {"down_reserve_price", g.down_reserve_price},
                  {"capacity", g.capacity},
                  {"up_reserve_cap", g.up_reserve_cap},
                  {"down_reserve_cap", g.down_reserve_cap}};
        if (g.uc)
            e["uc"] = ordered{{"min_output", g.uc->min_output},
                              {"startup_cost", g.uc->startup_cost},
                              {"ramp_up", g.uc->ramp_up},
                              {"ramp_down", g.uc->ramp_down},
                              {"initial_output", g.uc->initial_output},
                              {"initial_commitment", g.uc->initial_commitment}};
        gens.push_back(std::move(e));
    }
    root["generators"] = std::move(gens);
    ordered wind = ordered::array();
    for (const auto& w : sys.wind_farms)
        wind.push_back({{"id", w.id},
                        {"node", sys.nodes[w.node].id},
                        {"expected_output", w.expected_output},
                        {"installed_capacity", w.installed_capacity}});
    root["wind"] = std::move(wind);
    ordered loads = ordered::array();
    for (const auto& d : sys.loads)
        loads.push_back({{"id", d.id}, {"node", sys.nodes[d.node].id}, {"demand", d.demand}});
    root["loads"] = std::move(loads);
    ordered opt;
    opt["voll"] = sys.voll;
    if (!sys.load_profile.empty()) opt["load_profile"] = sys.load_profile;
    if (!sys.wind_profile.empty()) opt["wind_profile"] = sys.wind_profile;
    root["options"] = std::move(opt);
    return root.dump(2) + "\n";
}

void save_case(const std::filesystem::path& path, const SystemCase& sys) {
    write_file(path, serialize_case(sys));
}

// --- scenario files ----------------------------------------------------------------

ScenarioSet parse_scenarios(const std::string& text, const std::string& source) {
    // physical lines with their 1-based numbers; blank and '#' lines skipped
    std::vector<std::pair<int, std::string>> rows;
    {
        int lineno = 0;
        size_t start = 0;
        while (start <= text.size()) {
            size_t nl = text.find('\n', start);
            std::string line =
                text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string t = trimmed(line);
            if (!t.empty() && t[0] != '#') rows.emplace_back(lineno, line);
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }
    if (rows.empty()) throw ParseError(source + ": missing 'scenario,probability' header");
    std::vector<std::string> header = split_fields(rows[0].second);
    if (header.size() < 2 || header[0] != "scenario" || header[1] != "probability")
        throw ParseError(source + ":" + std::to_string(rows[0].first) +
                         ": header must begin with 'scenario,probability'");

    ScenarioSet sc;
    sc.farm_ids.assign(header.begin() + 2, header.end());
    {
        std::set<std::string> seen;
        for (const auto& id : sc.farm_ids)
            if (!seen.insert(id).second)
                throw SchemaError(source + ":" + std::to_string(rows[0].first) +
                                  ": duplicate wind-farm column '" + id + "'");
    }
    const int nw = sc.num_farms();
    sc.outcome.assign(nw, {});

    std::set<std::string> ids;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& [lineno, line] = rows[r];
        std::vector<std::string> f = split_fields(line);
        if (f.size() != header.size())
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size()));
        if (!ids.insert(f[0]).second)
            throw SchemaError(source + ":" + std::to_string(lineno) + ": duplicate scenario id '" +
                              f[0] + "'");
        sc.scenario_ids.push_back(f[0]);
        double p = parse_number(f[1], source, lineno);
        if (p < 0.0)
            throw ValidationError(source + ":" + std::to_string(lineno) +
                                  ": negative probability for scenario '" + f[0] + "'");
        sc.probability.push_back(p);
        for (int k = 0; k < nw; ++k)
            sc.outcome[k].push_back(parse_number(f[2 + k], source, lineno));
    }
    if (sc.probability.empty()) throw SchemaError(source + ": no scenario rows");

    double total = std::accumulate(sc.probability.begin(), sc.probability.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6)
        throw ValidationError(source + ": scenario probabilities sum to " + double_repr(total) +
                              ", not 1");
    for (double& p : sc.probability) p /= total;
    return sc;
}

ScenarioSet parse_scenarios(const std::string& text, const SystemCase& sys,
                            const std::string& source) {
    ScenarioSet raw = parse_scenarios(text, source);

    std::map<std::string, int> column;
    for (int k = 0; k < raw.num_farms(); ++k) column[raw.farm_ids[k]] = k;
    std::set<std::string> case_ids;
    for (const auto& w : sys.wind_farms) case_ids.insert(w.id);
    for (const auto& id : raw.farm_ids)
        if (!case_ids.count(id)) throw SchemaError(source + ": unknown wind farm '" + id + "'");

    ScenarioSet sc;
    sc.scenario_ids = std::move(raw.scenario_ids);
    sc.probability = std::move(raw.probability);
    for (const auto& w : sys.wind_farms) {
        auto it = column.find(w.id);
        if (it == column.end()) throw SchemaError(source + ": missing wind farm '" + w.id + "'");
        sc.farm_ids.push_back(w.id);
        sc.outcome.push_back(std::move(raw.outcome[it->second]));
    }
    require_valid(sys, sc);
    return sc;
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
    return parse_scenarios(read_file(path), path.string());
}

ScenarioSet load_scenarios(const std::filesystem::path& path, const SystemCase& sys) {
    return parse_scenarios(read_file(path), sys, path.string());
}

std::string serialize_scenarios(const ScenarioSet& scenarios) {
    std::ostringstream os;
    os << "scenario,probability";
    for (const auto& id : scenarios.farm_ids) os << ',' << id;
    os << '\n';
    for (int w = 0; w < scenarios.num_scenarios(); ++w) {
        std::string sid = w < static_cast<int>(scenarios.scenario_ids.size())
                              ? scenarios.scenario_ids[w]
                              : "s" + std::to_string(w + 1);
        os << sid << ',' << double_repr(scenarios.probability[w]);
        for (int k = 0; k < scenarios.num_farms(); ++k)
            os << ',' << double_repr(scenarios.outcome[k][w]);
        os << '\n';
    }
    return os.str();
}

void save_scenarios(const std::filesystem::path& path, const ScenarioSet& scenarios) {
    write_file(path, serialize_scenarios(scenarios));
}

// --- digests & run directories ---------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string digest_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

RunDirectory::RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
        throw InputError("cannot create run directory '" + dir_.string() + "': " + ec.message());
}

std::filesystem::path RunDirectory::write(const std::string& name, const std::string& content) {
    std::filesystem::path p = dir_ / name;
    write_file(p, content);
    std::string digest = digest_hex(content);
    for (auto& e : entries_)
        if (e.first == name) {
            e.second = digest;
            return p;
        }
    entries_.emplace_back(name, digest);
    return p;
}

void RunDirectory::finalize() {
    std::vector<std::pair<std::string, std::string>> sorted = entries_;
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream os;
    for (const auto& [name, digest] : sorted) os << digest << "  " << name << '\n';
    write_file(dir_ / "manifest.txt", os.str());
}

std::filesystem::path run_root() {
    const char* env = std::getenv("RESDIM_RUN_DIR");
    if (env && *env) return {env};
    return {"runs"};
}

// --- reports -----------------------------------------------------------------------

void write_outcome_report(std::ostream& os, const SystemCase& sys, const ScenarioSet& scenarios,
                          const MarketOutcome& outcome) {
    using detail::format_number;
    os << "[costs]\nreserve,day_ahead,real_time_expected,total\n"
       << format_number(outcome.cost.reserve) << ',' << format_number(outcome.cost.day_ahead)
       << ',' << format_number(outcome.cost.real_time_expected) << ','
       << format_number(outcome.cost.total) << "\n\n";
    os << "[requirements]\nzone,up,down\n";
    for (int z = 0; z < sys.num_zones(); ++z)
        os << sys.zones[z] << ',' << format_number(outcome.requirements.up[z]) << ','
           << format_number(outcome.requirements.down[z]) << '\n';
    os << "\n[reserve]\ngenerator,up,down\n";
    for (size_t i = 0; i < sys.generators.size(); ++i)
        os << sys.generators[i].id << ',' << format_number(outcome.reserve.up[i]) << ','
           << format_number(outcome.reserve.down[i]) << '\n';
    os << "\n[day_ahead]\nunit,dispatch\n";
    for (size_t i = 0; i < sys.generators.size(); ++i)
        os << sys.generators[i].id << ',' << format_number(outcome.day_ahead.conventional[i])
           << '\n';
    for (size_t k = 0; k < sys.wind_farms.size(); ++k)
        os << sys.wind_farms[k].id << ',' << format_number(outcome.day_ahead.wind[k]) << '\n';
    os << "\n[real_time]\nscenario,probability,cost\n";
    for (int w = 0; w < scenarios.num_scenarios(); ++w)
        os << scenarios.scenario_ids[w] << ',' << format_number(scenarios.probability[w]) << ','
           << format_number(outcome.real_time[w].cost) << '\n';
}

} // namespace resdim
