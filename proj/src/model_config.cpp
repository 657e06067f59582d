#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wg/config.hpp"
#include "wg/error.hpp"

namespace wg {

namespace {

using nlohmann::json;

// Semantic error located by a JSON pointer; turned into a ConfigError with a
// line number once the source text is known.
struct Located : Error {
    std::string pointer;
    Located(std::string ptr, const std::string& msg) : Error(msg), pointer(std::move(ptr)) {}
};

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) { throw Located(ptr, msg); }

const json* member(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& key, const std::string& base, std::optional<double> def = {}) {
    const json* v = member(j, key);
    if (!v) {
        if (def) return *def;
        fail(base + "/" + key, "missing number '" + key + "'");
    }
    if (!v->is_number()) fail(base + "/" + key, "'" + key + "' must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(base + "/" + key, "'" + key + "' must be finite");
    return x;
}

long long integer(const json& j, const std::string& key, const std::string& base, long long def) {
    const json* v = member(j, key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(base + "/" + key, "'" + key + "' must be an integer");
    return v->get<long long>();
}

int dim_of(const json& j, const std::string& base, int def) {
    const long long d = integer(j, "dim", base, def);
    if (d < 1 || d > kMaxDim) fail(base + "/dim", "dim must be between 1 and " + std::to_string(kMaxDim));
    return static_cast<int>(d);
}

// {"value": weight} with numeric keys, returned sorted by value.
std::pair<std::vector<double>, std::vector<double>> value_weights(const json& j, const std::string& ptr) {
    if (!j.is_object() || j.empty()) fail(ptr, "nu must be a nonempty object {value: weight}");
    std::vector<std::pair<double, double>> vw;
    for (auto it = j.begin(); it != j.end(); ++it) {
        double v;
        std::size_t used = 0;
        try {
            v = std::stod(it.key(), &used);
        } catch (const std::exception&) {
            fail(ptr + "/" + it.key(), "nu key '" + it.key() + "' is not a number");
        }
        if (used != it.key().size()) fail(ptr + "/" + it.key(), "nu key '" + it.key() + "' is not a number");
        if (!it.value().is_number()) fail(ptr + "/" + it.key(), "nu weight must be a number");
        const double w = it.value().get<double>();
        if (!(w > 0.0)) fail(ptr + "/" + it.key(), "nu weights must be positive");
        vw.emplace_back(v, w);
    }
    std::sort(vw.begin(), vw.end());
    for (std::size_t i = 1; i < vw.size(); ++i)
        if (vw[i].first == vw[i - 1].first) fail(ptr, "duplicate nu value");
    double s = 0.0;
    for (auto& p : vw) s += p.second;
    if (std::abs(s - 1.0) > 1e-9) fail(ptr, "nu weights must sum to 1");
    std::vector<double> vals, ws;
    for (auto& p : vw) {
        vals.push_back(p.first);
        ws.push_back(p.second);
    }
    return {vals, ws};
}

std::vector<int> int_list(const json& j, const std::string& ptr) {
    if (!j.is_array()) fail(ptr, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) fail(ptr + "/" + std::to_string(i), "expected an integer");
        out.push_back(j[i].get<int>());
    }
    return out;
}

ModelSpec custom_model(const json& j, const std::string& base) {
    const int dim = dim_of(j, base, 2);
    ModelParams p;
    p.name = "custom";
    p.dim = dim;
    const json* sv = member(j, "spin_values");
    p.spin_values = sv ? int_list(*sv, base + "/spin_values") : std::vector<int>{-1, 1};
    if (p.spin_values.empty()) fail(base + "/spin_values", "empty spin alphabet");

    const json* nu = member(j, "nu");
    if (!nu) fail(base + "/nu", "custom model needs nu");
    auto [vals, ws] = value_weights(*nu, base + "/nu");
    for (double v : vals) p.disorder_values.push_back({{v}});
    p.nu = ws;
    p.collar_disorder = static_cast<int>(integer(j, "collar_disorder", base, 0));
    if (p.collar_disorder < 0 || p.collar_disorder >= static_cast<int>(vals.size()))
        fail(base + "/collar_disorder", "collar_disorder out of range");
    if (const json* f = member(j, "ferromagnetic")) {
        if (!f->is_boolean()) fail(base + "/ferromagnetic", "expected true or false");
        p.ferromagnetic = f->get<bool>();
    }

    const std::size_t S = p.spin_values.size(), D = vals.size();
    const json* terms = member(j, "terms");
    if (terms && !terms->is_array()) fail(base + "/terms", "terms must be an array");
    if (terms)
        for (std::size_t t = 0; t < terms->size(); ++t) {
            const std::string tp = base + "/terms/" + std::to_string(t);
            const json& tj = (*terms)[t];
            if (!tj.is_object()) fail(tp, "term must be an object");
            TermShape shape;
            shape.name = tj.value("name", "term" + std::to_string(t));
            const json* offs = member(tj, "offsets");
            if (!offs || !offs->is_array() || offs->empty()) fail(tp + "/offsets", "term needs offsets");
            for (std::size_t k = 0; k < offs->size(); ++k) {
                auto c = int_list((*offs)[k], tp + "/offsets/" + std::to_string(k));
                if (static_cast<int>(c.size()) != dim) fail(tp + "/offsets/" + std::to_string(k), "offset has wrong dimension");
                shape.offsets.emplace_back(c);
            }
            const std::size_t K = shape.offsets.size();
            shape.uses_disorder.assign(K, true);
            if (const json* u = member(tj, "uses_disorder")) {
                if (!u->is_array() || u->size() != K) fail(tp + "/uses_disorder", "one flag per offset");
                for (std::size_t k = 0; k < K; ++k) {
                    if (!(*u)[k].is_boolean()) fail(tp + "/uses_disorder", "flags must be booleans");
                    shape.uses_disorder[k] = (*u)[k].get<bool>();
                }
            }
            const json* tab = member(tj, "table");
            const double size = std::pow(static_cast<double>(S * D), static_cast<double>(K));
            if (size > 1 << 20) fail(tp + "/table", "term table too large");
            if (!tab || !tab->is_array() || tab->size() != static_cast<std::size_t>(size))
                fail(tp + "/table", "table must list (|spins| * |nu|)^k = " +
                                        std::to_string(static_cast<std::size_t>(size)) + " energies");
            std::vector<double> energies;
            for (std::size_t i = 0; i < tab->size(); ++i) {
                if (!(*tab)[i].is_number()) fail(tp + "/table/" + std::to_string(i), "energy must be a number");
                energies.push_back((*tab)[i].get<double>());
            }
            // index sum_k (s_k + S d_k) (S D)^k
            shape.energy = [energies, S, D](std::span<const int> s, std::span<const int> d) {
                std::size_t idx = 0, mul = 1;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    idx += (static_cast<std::size_t>(s[k]) + S * static_cast<std::size_t>(d[k])) * mul;
                    mul *= S * D;
                }
                return energies[idx];
            };
            p.shapes.push_back(std::move(shape));
        }
    p.description = j.dump();
    try {
        return ModelSpec(std::move(p));
    } catch (const DomainError& e) {
        fail(base, e.what());
    }
}

ModelSpec model_at(const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "model must be an object");
    const json* kind = member(j, "model");
    if (!kind || !kind->is_string()) fail(base + "/model", "model must name rfim, random_bond, dilute, free or custom");
    const std::string k = kind->get<std::string>();
    try {
        if (k == "rfim") {
            const json* nu = member(j, "nu");
            std::vector<double> vals{-1.0, 1.0}, ws{0.5, 0.5};
            if (nu) std::tie(vals, ws) = value_weights(*nu, base + "/nu");
            return make_rfim(number(j, "J", base, 1.0), number(j, "h", base, 1.0), vals, ws, dim_of(j, base, 2));
        }
        if (k == "random_bond") {
            std::vector<CouplingLaw> laws;
            if (const json* l = member(j, "laws")) {
                if (!l->is_array() || l->empty()) fail(base + "/laws", "laws must be a nonempty array");
                for (std::size_t e = 0; e < l->size(); ++e) {
                    const std::string lp = base + "/laws/" + std::to_string(e);
                    const json* nu = (*l)[e].is_object() ? member((*l)[e], "nu") : nullptr;
                    if (!nu) fail(lp, "each law needs nu");
                    auto [v, w] = value_weights(*nu, lp + "/nu");
                    laws.push_back({v, w});
                }
            } else {
                const json* nu = member(j, "nu");
                if (!nu) fail(base + "/nu", "random_bond needs nu or laws");
                auto [v, w] = value_weights(*nu, base + "/nu");
                laws.assign(dim_of(j, base, 1), CouplingLaw{v, w});
            }
            return make_random_bond(laws);
        }
        if (k == "dilute") {
            double p = 0.5;
            if (const json* nu = member(j, "nu")) {
                auto [v, w] = value_weights(*nu, base + "/nu");
                if (v != std::vector<double>{0.0, 1.0}) fail(base + "/nu", "dilute nu must be over {0, 1}");
                p = w[1];
            } else {
                p = number(j, "p", base);
            }
            return make_dilute(number(j, "J", base, 1.0), p, dim_of(j, base, 2));
        }
        if (k == "free") {
            const long long s = integer(j, "states", base, 2);
            if (s < 1 || s > 64) fail(base + "/states", "states must be between 1 and 64");
            return make_free_model(dim_of(j, base, 2), static_cast<int>(s));
        }
        if (k == "custom") return custom_model(j, base);
    } catch (const DomainError& e) {
        fail(base, e.what());
    }
    fail(base + "/model", "unknown model '" + k + "'");
}

std::vector<int> extents_at(const json& j, const std::string& ptr) {
    if (j.is_string()) {
        try {
            return parse_extents(j.get<std::string>());
        } catch (const ConfigError& e) {
            fail(ptr, e.what());
        }
    }
    auto v = int_list(j, ptr);
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) fail(ptr, "bad box extents");
    for (int x : v)
        if (x < 1) fail(ptr, "box extents must be positive");
    return v;
}

// Best-effort line of the value a pointer names: scan for the keys in order.
std::size_t line_of(const std::string& text, const std::string& pointer) {
    std::size_t pos = 0;
    std::stringstream ss(pointer);
    std::string tok;
    while (std::getline(ss, tok, '/')) {
        if (tok.empty() || std::all_of(tok.begin(), tok.end(), ::isdigit)) continue;
        const std::size_t p = text.find("\"" + tok + "\"", pos);
        if (p == std::string::npos) break;
        pos = p;
    }
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

RunConfig parse_json(const json& j) {
    if (!j.is_object()) fail("", "config must be a JSON object");
    RunConfig c;
    c.version = static_cast<int>(integer(j, "version", "", kConfigVersion));
    if (c.version != kConfigVersion) fail("/version", "unsupported config version " + std::to_string(c.version));
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::vector<std::string> known{
            "version", "model", "box",   "boxes",       "window",      "bc",      "alpha",    "seed",
            "samples", "trials", "tol",  "out",         "radii",       "separations", "regroup", "dilute_J"};
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            fail("/" + it.key(), "unknown field '" + it.key() + "'");
    }
    const json* m = member(j, "model");
    if (!m) fail("/model", "missing model section");
    c.model_json = *m;
    c.model = share(model_at(*m, "/model"));

    if (const json* b = member(j, "box")) c.boxes.push_back(extents_at(*b, "/box"));
    if (const json* bs = member(j, "boxes")) {
        if (!bs->is_array() || bs->empty()) fail("/boxes", "boxes must be a nonempty array");
        for (std::size_t i = 0; i < bs->size(); ++i)
            c.boxes.push_back(extents_at((*bs)[i], "/boxes/" + std::to_string(i)));
    }
    if (c.boxes.empty()) c.boxes.push_back(std::vector<int>(c.model->dim(), 3));
    for (std::size_t i = 0; i < c.boxes.size(); ++i)
        if (static_cast<int>(c.boxes[i].size()) != c.model->dim())
            fail(member(j, "boxes") ? "/boxes/" + std::to_string(i) : "/box", "box dimension differs from the model's");
    if (const json* w = member(j, "window")) {
        c.window = extents_at(*w, "/window");
        if (static_cast<int>(c.window.size()) != c.model->dim()) fail("/window", "window dimension differs from the model's");
    }
    if (const json* b = member(j, "bc")) {
        if (!b->is_string()) fail("/bc", "bc must be a string");
        c.bc = b->get<std::string>();
        if (c.bc != "default" && c.bc != "free" && c.bc != "plus" && c.bc != "minus")
            fail("/bc", "bc must be default, free, plus or minus");
    }
    if (const json* a = member(j, "alpha")) {
        if (a->is_string()) {
            c.alpha = a->get<std::string>();
        } else if (a->is_object()) {
            const json* k = member(*a, "kind");
            if (!k || !k->is_string()) fail("/alpha/kind", "alpha needs a kind");
            c.alpha = k->get<std::string>();
            c.vacuum_index = static_cast<int>(integer(*a, "vacuum_index", "/alpha", 0));
        } else {
            fail("/alpha", "alpha must be \"IP\", \"vacuum\" or an object");
        }
        if (c.alpha != "IP" && c.alpha != "vacuum") fail("/alpha", "alpha kind must be IP or vacuum");
        if (c.vacuum_index < 0 || c.vacuum_index >= c.model->disorder_radix())
            fail("/alpha/vacuum_index", "vacuum index out of range");
    }
    if (const json* s = member(j, "seed")) {
        if (!s->is_number_unsigned()) fail("/seed", "seed must be a nonnegative integer");
        c.seed = s->get<std::uint64_t>();
    }
    c.samples = static_cast<std::size_t>(std::max(1LL, integer(j, "samples", "", 1000)));
    c.trials = static_cast<std::size_t>(std::max(1LL, integer(j, "trials", "", 100)));
    c.tol = number(j, "tol", "", 1e-9);
    if (!(c.tol > 0.0)) fail("/tol", "tol must be positive");
    if (const json* o = member(j, "out")) {
        if (!o->is_string()) fail("/out", "out must be a path string");
        c.out = o->get<std::string>();
    }
    if (const json* r = member(j, "radii")) c.radii = int_list(*r, "/radii");
    if (const json* s = member(j, "separations")) c.separations = int_list(*s, "/separations");
    for (int r : c.radii)
        if (r < 0) fail("/radii", "radii must be nonnegative");
    for (int m : c.separations)
        if (m < 1) fail("/separations", "separations start at 1");
    if (const json* g = member(j, "regroup")) {
        if (!g->is_string()) fail("/regroup", "regroup must be a string");
        c.regroup = g->get<std::string>();
        if (c.regroup != "none" && c.regroup != "kozlov" && c.regroup != "shell")
            fail("/regroup", "regroup must be none, kozlov or shell");
    }
    c.dilute_J = number(j, "dilute_J", "", 0.8);
    return c;
}

}  // namespace

ModelSpec model_from_json(const nlohmann::json& j) {
    try {
        return model_at(j, "");
    } catch (const Located& e) {
        throw ConfigError((e.pointer.empty() ? std::string("/") : e.pointer) + ": " + e.what());
    }
}

std::vector<int> parse_extents(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, 'x')) {
        if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit) || tok.size() > 6)
            throw ConfigError("bad box '" + s + "': expected extents like 3x3");
        out.push_back(std::stoi(tok));
        if (out.back() < 1) throw ConfigError("bad box '" + s + "': extents must be positive");
    }
    if (out.empty() || out.size() > static_cast<std::size_t>(kMaxDim))
        throw ConfigError("bad box '" + s + "': expected 1 to " + std::to_string(kMaxDim) + " extents");
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line:column
        const std::size_t off = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const std::size_t line = 1 + std::count(text.begin(), text.begin() + off, '\n');
        const std::size_t nl = text.rfind('\n', off == 0 ? 0 : off - 1);
        const std::size_t col = (nl == std::string::npos || off == 0) ? off + 1 : off - nl;
        std::string msg = e.what();
        if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }
    try {
        return parse_json(j);
    } catch (const Located& e) {
        throw ConfigError(source + ": near line " + std::to_string(line_of(text, e.pointer)) + ": " +
                          (e.pointer.empty() ? std::string("/") : e.pointer) + ": " + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

nlohmann::json RunConfig::to_json() const {
    json j{{"version", version},
           {"model", model_json},
           {"boxes", boxes},
           {"bc", bc},
           {"alpha", {{"kind", alpha}, {"vacuum_index", vacuum_index}}},
           {"samples", samples},
           {"trials", trials},
           {"tol", tol},
           {"out", out},
           {"radii", radii},
           {"separations", separations},
           {"regroup", regroup},
           {"dilute_J", dilute_J}};
    if (!window.empty()) j["window"] = window;
    if (seed) j["seed"] = *seed;
    return j;
}

BoundaryCondition make_boundary(const ModelSpec& spec, const std::string& name) {
    if (name == "default") return default_boundary(spec);
    if (name == "free") return BoundaryCondition::free_bc();
    if (name == "plus") return BoundaryCondition::uniform(spec.plus_spin());
    if (name == "minus") return BoundaryCondition::uniform(spec.minus_spin());
    throw ConfigError("unknown boundary condition '" + name + "'");
}

NormalizingMeasure make_alpha(const RunConfig& cfg, std::size_t box_size) {
    if (cfg.alpha == "vacuum")
        return NormalizingMeasure::point_mass(std::vector<int>(box_size, cfg.vacuum_index));
    return NormalizingMeasure::product();
}

}  // namespace wg
