#include "thermolab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "thermolab/errors.hpp"
#include "thermolab/families.hpp"
#include "thermolab/flow.hpp"
#include "thermolab/fourier.hpp"
#include "thermolab/liouville.hpp"
#include "thermolab/parallel.hpp"
#include "thermolab/pde.hpp"
#include "thermolab/riccati.hpp"

namespace fs = std::filesystem;

namespace thermolab {

namespace {

const std::set<std::string> kFamilies = {"geodesic", "magnetic", "theoremB", "theoremC", "custom"};
const std::set<std::string> kMeasurements = {"orbit", "lyapunov", "slopes", "gv", "identities", "entropy", "pde"};

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw SchemaError(join(path, it.key()), "unknown field");
}

double get_number(const json& obj, const std::string& key, double def, const std::string& path, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw SchemaError(join(path, key), "required field missing");
        return def;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(join(path, key), "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(join(path, key), "must be finite");
    return x;
}

int get_int(const json& obj, const std::string& key, int def, const std::string& path) {
    double x = get_number(obj, key, def, path);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw SchemaError(join(path, key), "expected an integer");
    return static_cast<int>(x);
}

Complex get_complex(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw SchemaError(path, "expected [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void positive(double x, const std::string& path) {
    if (!(x > 0)) throw SchemaError(path, "must be positive");
}

Numerics parse_numerics(const json& j) {
    const std::string p = "numerics";
    Numerics n;
    if (j.is_null()) return n;
    if (!j.is_object()) throw SchemaError(p, "expected an object");
    reject_unknown(j,
                   {"dt", "orbit_T", "lyapunov_T", "entropy_T", "slope_T", "slope_dt", "gap_tol", "cert_samples",
                    "cert_margin", "n_base", "N_theta", "richardson", "drift_tol", "word_length", "prune_radius",
                    "mesh_n", "pde_tol", "profile_bases"},
                   p);
    n.dt = get_number(j, "dt", n.dt, p);
    n.orbit_T = get_number(j, "orbit_T", n.orbit_T, p);
    n.lyapunov_T = get_number(j, "lyapunov_T", n.lyapunov_T, p);
    n.entropy_T = get_number(j, "entropy_T", n.entropy_T, p);
    n.slope_T = get_number(j, "slope_T", n.slope_T, p);
    n.slope_dt = get_number(j, "slope_dt", n.slope_dt, p);
    n.gap_tol = get_number(j, "gap_tol", n.gap_tol, p);
    n.cert_samples = get_int(j, "cert_samples", n.cert_samples, p);
    n.cert_margin = get_number(j, "cert_margin", n.cert_margin, p);
    n.n_base = get_int(j, "n_base", n.n_base, p);
    n.N_theta = get_int(j, "N_theta", n.N_theta, p);
    if (j.contains("richardson")) {
        if (!j["richardson"].is_boolean()) throw SchemaError(join(p, "richardson"), "expected a boolean");
        n.richardson = j["richardson"].get<bool>();
    }
    n.drift_tol = get_number(j, "drift_tol", n.drift_tol, p);
    n.word_length = get_int(j, "word_length", n.word_length, p);
    n.prune_radius = get_number(j, "prune_radius", n.prune_radius, p);
    n.mesh_n = get_int(j, "mesh_n", n.mesh_n, p);
    n.pde_tol = get_number(j, "pde_tol", n.pde_tol, p);
    n.profile_bases = get_int(j, "profile_bases", n.profile_bases, p);
    for (auto [v, name] : {std::pair{n.dt, "dt"}, {n.orbit_T, "orbit_T"}, {n.lyapunov_T, "lyapunov_T"},
                           {n.entropy_T, "entropy_T"}, {n.slope_T, "slope_T"}, {n.slope_dt, "slope_dt"},
                           {n.gap_tol, "gap_tol"}, {n.drift_tol, "drift_tol"}, {n.prune_radius, "prune_radius"},
                           {n.pde_tol, "pde_tol"}})
        positive(v, join(p, name));
    if (n.cert_samples < 1) throw SchemaError(join(p, "cert_samples"), "must be >= 1");
    if (n.cert_margin < 0) throw SchemaError(join(p, "cert_margin"), "must be >= 0");
    if (n.n_base < 1) throw SchemaError(join(p, "n_base"), "must be >= 1");
    if (n.N_theta < 8 || (n.N_theta & (n.N_theta - 1))) throw SchemaError(join(p, "N_theta"), "must be a power of 2 >= 8");
    if (n.word_length < 0) throw SchemaError(join(p, "word_length"), "must be >= 0");
    if (n.mesh_n < 2) throw SchemaError(join(p, "mesh_n"), "must be >= 2");
    if (n.profile_bases < 0) throw SchemaError(join(p, "profile_bases"), "must be >= 0");
    return n;
}

json numerics_json(const Numerics& n) {
    return {{"dt", n.dt},
            {"orbit_T", n.orbit_T},
            {"lyapunov_T", n.lyapunov_T},
            {"entropy_T", n.entropy_T},
            {"slope_T", n.slope_T},
            {"slope_dt", n.slope_dt},
            {"gap_tol", n.gap_tol},
            {"cert_samples", n.cert_samples},
            {"cert_margin", n.cert_margin},
            {"n_base", n.n_base},
            {"N_theta", n.N_theta},
            {"richardson", n.richardson},
            {"drift_tol", n.drift_tol},
            {"word_length", n.word_length},
            {"prune_radius", n.prune_radius},
            {"mesh_n", n.mesh_n},
            {"pde_tol", n.pde_tol},
            {"profile_bases", n.profile_bases}};
}

json parse_params(const std::string& family, const json& j) {
    const std::string p = "params";
    json in = j.is_null() ? json::object() : j;
    if (!in.is_object()) throw SchemaError(p, "expected an object");
    json out;
    if (family == "geodesic") {
        reject_unknown(in, {"c"}, p);
        out["c"] = get_number(in, "c", 1.0, p);
    } else if (family == "magnetic") {
        reject_unknown(in, {"c", "f0"}, p);
        out["c"] = get_number(in, "c", 1.0, p);
        out["f0"] = get_number(in, "f0", 0.0, p, true);
    } else if (family == "theoremB") {
        reject_unknown(in, {"c", "epsilon", "rho0", "center"}, p);
        out["c"] = get_number(in, "c", 1.0, p);
        out["epsilon"] = get_number(in, "epsilon", 0.0, p, true);
        out["rho0"] = get_number(in, "rho0", 1.2, p);
        out["center"] = complex_json(in.contains("center") ? get_complex(in["center"], join(p, "center")) : 0.0);
    } else if (family == "theoremC") {
        reject_unknown(in, {"h", "amplitude", "seed_poly"}, p);
        out["h"] = get_number(in, "h", 1.0, p);
        out["amplitude"] = get_number(in, "amplitude", 0.15, p);
        json seed = json::array();
        if (in.contains("seed_poly")) {
            if (!in["seed_poly"].is_array() || in["seed_poly"].empty())
                throw SchemaError(join(p, "seed_poly"), "expected a non-empty array of [re, im]");
            for (std::size_t i = 0; i < in["seed_poly"].size(); ++i)
                seed.push_back(complex_json(get_complex(in["seed_poly"][i], join(p, "seed_poly." + std::to_string(i)))));
        } else {
            seed.push_back(complex_json(1.0));
        }
        out["seed_poly"] = seed;
        if (out["h"].get<double>() == 0.0) throw SchemaError(join(p, "h"), "must be nonzero");
        positive(out["amplitude"].get<double>(), join(p, "amplitude"));
    } else {  // custom
        reject_unknown(in, {"spec"}, p);
        if (!in.contains("spec")) throw SchemaError(join(p, "spec"), "required field missing");
        parse_custom_spec(in["spec"]);  // validation
        out["spec"] = in["spec"];
    }
    if (out.contains("c")) positive(out["c"].get<double>(), join(p, "c"));
    return out;
}

}  // namespace

FieldPtr parse_field(const json& j, const std::string& path) {
    if (j.is_number()) return std::make_shared<ConstantField>(j.get<double>());
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw SchemaError(path, "expected a field object with a 'kind'");
    std::string kind = j["kind"];
    if (kind == "constant") return std::make_shared<ConstantField>(get_number(j, "value", 0.0, path, true));
    if (kind == "radial_bump") {
        Complex center = j.contains("center") ? get_complex(j["center"], join(path, "center")) : 0.0;
        if (!(std::norm(center) < 1.0)) throw SchemaError(join(path, "center"), "must lie in the disk");
        double rho0 = get_number(j, "rho0", 0.0, path, true);
        positive(rho0, join(path, "rho0"));
        double amp = get_number(j, "amplitude", 0.0, path, true);
        RadialOuter outer;
        std::string ok = j.value("outer", std::string("linear"));
        if (ok == "linear")
            outer.kind = RadialOuter::Kind::Linear;
        else if (ok == "arcsin")
            outer.kind = RadialOuter::Kind::Arcsin;
        else if (ok == "sqrt_complement")
            outer.kind = RadialOuter::Kind::SqrtComplement;
        else
            throw SchemaError(join(path, "outer"), "unknown outer function '" + ok + "'");
        outer.scale = get_number(j, "outer_scale", 1.0, path);
        outer.c = get_number(j, "outer_c", 1.0, path);
        if (outer.kind != RadialOuter::Kind::Linear && !(std::abs(amp) < std::abs(outer.c)))
            throw SchemaError(join(path, "amplitude"), "must be below outer_c in magnitude");
        return std::make_shared<RadialBumpField>(center, rho0, amp, outer);
    }
    if (kind == "sum") {
        if (!j.contains("terms") || !j["terms"].is_array()) throw SchemaError(join(path, "terms"), "expected an array");
        std::vector<std::pair<double, FieldPtr>> terms;
        for (std::size_t i = 0; i < j["terms"].size(); ++i) {
            std::string tp = join(path, "terms." + std::to_string(i));
            const json& t = j["terms"][i];
            if (!t.is_object() || !t.contains("field")) throw SchemaError(tp, "expected {coef, field}");
            terms.push_back({get_number(t, "coef", 1.0, tp), parse_field(t["field"], join(tp, "field"))});
        }
        return std::make_shared<SumField>(terms);
    }
    if (kind == "exp_scaled") {
        if (!j.contains("base") || !j.contains("exponent")) throw SchemaError(path, "exp_scaled needs base and exponent");
        return std::make_shared<ExpScaledField>(parse_field(j["base"], join(path, "base")),
                                                parse_field(j["exponent"], join(path, "exponent")),
                                                get_number(j, "a", 1.0, path));
    }
    throw SchemaError(join(path, "kind"), "unknown field kind '" + kind + "'");
}

ThermostatSpec parse_custom_spec(const json& j) {
    const std::string p = "params.spec";
    if (!j.is_object()) throw SchemaError(p, "expected an object");
    reject_unknown(j, {"c", "f", "u", "theta", "q", "q_log_weight", "label"}, p);
    ThermostatSpec s;
    s.group = shared_genus2();
    s.c = get_number(j, "c", 1.0, p);
    positive(s.c, join(p, "c"));
    if (j.contains("f") && !j["f"].is_null()) s.f = parse_field(j["f"], join(p, "f"));
    if (j.contains("u") && !j["u"].is_null()) s.u = parse_field(j["u"], join(p, "u"));
    if (j.contains("q_log_weight") && !j["q_log_weight"].is_null())
        s.q_log_weight = parse_field(j["q_log_weight"], join(p, "q_log_weight"));
    if (j.contains("theta") && !j["theta"].is_null()) {
        if (!j["theta"].is_array()) throw SchemaError(join(p, "theta"), "expected an array");
        for (std::size_t i = 0; i < j["theta"].size(); ++i) {
            std::string tp = join(p, "theta." + std::to_string(i));
            const json& t = j["theta"][i];
            if (!t.is_object() || !t.contains("potential")) throw SchemaError(tp, "expected {kind, coef, potential}");
            std::string k = t.value("kind", std::string("gradient"));
            OneFormTerm term;
            if (k == "gradient")
                term.kind = FormKind::Gradient;
            else if (k == "rotated_gradient")
                term.kind = FormKind::Rotated;
            else
                throw SchemaError(join(tp, "kind"), "expected gradient or rotated_gradient");
            term.coef = get_number(t, "coef", 1.0, tp);
            term.potential = parse_field(t["potential"], join(tp, "potential"));
            s.theta.push_back(term);
        }
    }
    if (j.contains("q") && !j["q"].is_null()) {
        const json& q = j["q"];
        if (!q.is_object() || !q.contains("coeffs") || !q["coeffs"].is_array())
            throw SchemaError(join(p, "q"), "expected {coeffs: [[re, im], ...]}");
        std::vector<Complex> co;
        for (std::size_t i = 0; i < q["coeffs"].size(); ++i)
            co.push_back(get_complex(q["coeffs"][i], join(p, "q.coeffs." + std::to_string(i))));
        s.q = std::make_shared<QuadDiffField>(co);
    }
    s.label = j.value("label", std::string("custom"));
    return s;
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw SchemaError("", "scenario must be a JSON object");
    reject_unknown(doc, {"schema_version", "family", "params", "numerics", "seed", "initial_state", "measurements"}, "");
    if (!doc.contains("schema_version")) throw SchemaError("schema_version", "required field missing");
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kSchemaVersion)
        throw SchemaError("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
    Scenario s;
    if (!doc.contains("family") || !doc["family"].is_string()) throw SchemaError("family", "required string field");
    s.family = doc["family"];
    if (!kFamilies.count(s.family)) throw SchemaError("family", "unknown family '" + s.family + "'");
    s.params = parse_params(s.family, doc.value("params", json()));
    s.num = parse_numerics(doc.value("numerics", json()));
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0) throw SchemaError("seed", "expected a non-negative integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("initial_state")) {
        const json& st = doc["initial_state"];
        if (!st.is_object()) throw SchemaError("initial_state", "expected {z, phi}");
        reject_unknown(st, {"z", "phi"}, "initial_state");
        if (st.contains("z")) s.initial.z = get_complex(st["z"], "initial_state.z");
        s.initial.phi = get_number(st, "phi", s.initial.phi, "initial_state");
        if (!(std::norm(s.initial.z) < 1.0)) throw SchemaError("initial_state.z", "must lie in the open disk");
    }
    if (!doc.contains("measurements") || !doc["measurements"].is_array() || doc["measurements"].empty())
        throw SchemaError("measurements", "expected a non-empty array");
    for (std::size_t i = 0; i < doc["measurements"].size(); ++i) {
        const json& m = doc["measurements"][i];
        std::string mp = "measurements." + std::to_string(i);
        if (!m.is_string() || !kMeasurements.count(m.get<std::string>()))
            throw SchemaError(mp, "unknown measurement");
        if (std::find(s.measurements.begin(), s.measurements.end(), m.get<std::string>()) == s.measurements.end())
            s.measurements.push_back(m);
    }
    if (std::count(s.measurements.begin(), s.measurements.end(), "pde") && s.family != "theoremC")
        throw SchemaError("measurements", "pde requires family theoremC");
    s.normalized = {{"schema_version", kSchemaVersion},
                    {"family", s.family},
                    {"params", s.params},
                    {"numerics", numerics_json(s.num)},
                    {"seed", s.seed},
                    {"initial_state", {{"z", complex_json(s.initial.z)}, {"phi", s.initial.phi}}},
                    {"measurements", s.measurements}};
    return s;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t upto = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
        int line = 1, col = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SchemaError("", path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                  ": JSON syntax error");
    }
}

Scenario load_scenario(const fs::path& path) { return parse_scenario(read_json_file(path)); }

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string inputs_hash(const Scenario& s) { return fnv1a_hex(s.normalized.dump()); }

namespace {

struct Built {
    ThermostatSpec spec;
    std::optional<TheoremBSpec> B;
    std::optional<TheoremCSpec> C;
    json construction = json::object();
};

Built build(const Scenario& s) {
    Built b;
    const json& p = s.params;
    if (s.family == "geodesic") {
        b.spec = make_theoremA_spec(p["c"], 0.0);
    } else if (s.family == "magnetic") {
        b.spec = make_theoremA_spec(p["c"], p["f0"]);
        b.construction["slope_magnitude"] = theoremA_slope_magnitude(p["c"], p["f0"]);
    } else if (s.family == "theoremB") {
        try {
            b.B = make_theoremB_spec(p["c"], p["epsilon"], p["rho0"], get_complex(p["center"], "params.center"));
        } catch (const SchemaError& e) {
            throw SchemaError(join("params", e.field()), e.what());
        }
        b.spec = b.B->spec;
    } else if (s.family == "theoremC") {
        TheoremCOptions o;
        o.h = p["h"];
        o.poincare.amplitude = p["amplitude"];
        o.poincare.max_length = s.num.word_length;
        o.poincare.prune_radius = s.num.prune_radius;
        o.seed.clear();
        for (const auto& c : p["seed_poly"]) o.seed.push_back(get_complex(c, "params.seed_poly"));
        o.mesh_n = s.num.mesh_n;
        o.pde.tol = s.num.pde_tol;
        b.C = make_theoremC_spec(o);
        b.spec = b.C->spec;
        b.construction["poincare_elements"] = b.C->poincare.n_elements;
        b.construction["invariance_defect"] = b.C->poincare.defect;
        b.construction["q_coefficients"] = b.C->poincare.q->coeffs().size();
    } else {
        b.spec = parse_custom_spec(p["spec"]);
    }
    return b;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

SlopeOptions slope_options(const Numerics& n) {
    SlopeOptions o;
    o.T = n.slope_T;
    o.dt = n.slope_dt;
    o.gap_tol = n.gap_tol;
    return o;
}

bool wants(const Scenario& s, const char* m) {
    return std::find(s.measurements.begin(), s.measurements.end(), m) != s.measurements.end();
}

}  // namespace

ThermostatSpec build_spec(const Scenario& s, json* construction) {
    Built b = build(s);
    if (construction) *construction = b.construction;
    return b.spec;
}

RunResult run_scenario(const Scenario& s, const fs::path& out_dir) {
    RunResult res;
    json m;
    m["schema_version"] = kSchemaVersion;
    m["tool"] = "thermolab";
    m["inputs_hash"] = inputs_hash(s);
    m["scenario"] = s.normalized;
    json meas = json::object();
    json cert = json::object();
    json inv = {{"gv_plus", nullptr},     {"gv_minus", nullptr},    {"gv_error", nullptr},
                {"riccint_lhs", nullptr}, {"riccint_rhs", nullptr}, {"entropy", nullptr},
                {"lyapunov", nullptr},    {"mass_check", nullptr},  {"gb_check", nullptr}};
    std::vector<std::string> artifacts;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    auto artifact = [&](const std::string& name, const std::string& text) {
        if (out_dir.empty()) return;
        write_text(out_dir / name, text);
        artifacts.push_back(name);
    };
    bool uncertified = false;
    try {
        Built b = build(s);
        const ThermostatSpec& spec = b.spec;
        m["construction"] = b.construction;
        const Numerics& n = s.num;
        const SlopeOptions sopt = slope_options(n);
        auto g = spec.group;

        if (wants(s, "orbit")) {
            Orbit o = integrate_flow(spec, s.initial, n.orbit_T, n.dt);
            std::string csv = "t,re_z,im_z,phi,lambda,v_lambda,kappa0\n";
            for (const auto& smp : o.samples)
                csv += fmt(smp.t) + "," + fmt(smp.state.z.real()) + "," + fmt(smp.state.z.imag()) + "," +
                       fmt(smp.state.phi) + "," + fmt(smp.lambda) + "," + fmt(smp.vlambda) + "," + fmt(smp.kappa0) +
                       "\n";
            artifact("orbit.csv", csv);
            const auto& last = o.samples.back();
            meas["orbit"] = {{"T", last.t},
                             {"n_samples", o.samples.size()},
                             {"final_state", {{"z", complex_json(last.state.z)}, {"phi", last.state.phi}}},
                             {"deck_letters", o.deck_letters.size()},
                             {"max_speed_defect", o.max_speed_defect}};
        }

        if (wants(s, "lyapunov")) {
            LyapunovResult l = lyapunov_exponents(spec, s.initial, n.lyapunov_T, n.dt);
            bool conv = l.drift <= n.drift_tol;
            meas["lyapunov"] = {{"chi_plus", l.chi_plus},
                                {"chi_minus", l.chi_minus},
                                {"mean_v_lambda", l.mean_vlambda},
                                {"drift", l.drift},
                                {"converged", conv}};
            inv["lyapunov"] = json::array({l.chi_plus, l.chi_minus});
        }

        const bool slope_dependent = wants(s, "slopes") || wants(s, "gv") || wants(s, "identities");
        bool certified = true;
        if (slope_dependent) {
            auto states = sample_liouville(*g, n.cert_samples, s.seed);
            HyperbolicityReport h = hyperbolicity_certificate(spec, states, sopt, n.cert_margin);
            certified = h.certified;
            cert["hyperbolicity"] = {{"certified", h.certified},    {"delta_min", h.delta_min},
                                     {"max_gap", h.max_gap},        {"max_abs_slope", h.max_abs_slope},
                                     {"n_samples", h.n_samples},    {"n_flagged", h.n_flagged}};
            if (!certified) uncertified = true;
            if (certified && b.B) {
                double worst = 0;
                for (const auto& smp : h.samples) worst = std::max(worst, std::abs(smp.r_plus - b.B->r_pred(smp.state)));
                meas["theoremB"] = {{"max_smooth_slope_deviation", worst}};
            }
        }

        if (wants(s, "slopes") && certified) {
            SlopeSample s0 = slopes_at(spec, s.initial, sopt);
            json prof = json::array();
            std::string csv = "re_z,im_z,theta,r_plus,r_minus,v_r_plus,v_r_minus,gap\n";
            std::string modes_csv = "function,n,re,im\n";
            std::vector<Complex> bases{s.initial.z};
            auto extra = sample_liouville(*g, n.profile_bases, s.seed + 1);
            for (const auto& e : extra) bases.push_back(e.z);
            double fiber_test = 0;
            for (std::size_t k = 0; k < bases.size(); ++k) {
                SlopeFiberProfile p = slope_fiber_profile(spec, bases[k], n.N_theta, sopt);
                prof.push_back({{"z", complex_json(p.z)}, {"certified", p.certified}, {"max_gap", p.max_convergence_gap}});
                if (!p.certified) uncertified = true;
                for (int j = 0; j < p.N_theta; ++j)
                    csv += fmt(p.z.real()) + "," + fmt(p.z.imag()) + "," + fmt(p.theta[j]) + "," + fmt(p.r_plus[j]) +
                           "," + fmt(p.r_minus[j]) + "," + fmt(p.v_r_plus[j]) + "," + fmt(p.v_r_minus[j]) + "," +
                           fmt(p.max_convergence_gap) + "\n";
                if (b.C) {
                    BasePoint bp = eval_base(spec, p.z);
                    std::vector<double> dp(p.N_theta), dm(p.N_theta);
                    for (int j = 0; j < p.N_theta; ++j) {
                        double hv = 0.5 * vq_of_v(bp, p.theta[j]);
                        dp[j] = p.r_plus[j] - hv;
                        dm[j] = p.r_minus[j] - hv;
                    }
                    for (const auto& v : {spectral_derivative(dp), spectral_derivative(dm)})
                        for (double x : v) fiber_test = std::max(fiber_test, std::abs(x));
                }
                if (k == 0) {
                    FiberModes lm = lambda_modes(spec, p.z, p.N_theta);
                    FiberModes rp = fiber_decompose(p.r_plus, p.z), rm = fiber_decompose(p.r_minus, p.z);
                    for (auto [name, fm] : {std::pair{"lambda", &lm}, {"r_plus", &rp}, {"r_minus", &rm}})
                        for (int q = -p.N_theta / 2 + 1; q < p.N_theta / 2; ++q)
                            modes_csv += std::string(name) + "," + std::to_string(q) + "," + fmt(fm->coef(q).real()) +
                                         "," + fmt(fm->coef(q).imag()) + "\n";
                }
            }
            artifact("slopes.csv", csv);
            artifact("modes.csv", modes_csv);
            meas["slopes"] = {{"initial", {{"r_plus", s0.r_plus}, {"r_minus", s0.r_minus}, {"gap", s0.convergence_gap}}},
                              {"profiles", prof}};
            if (b.C) meas["slopes"]["theoremC_fiber_test"] = fiber_test;
        }

        std::optional<QuadratureGrid> grid;
        std::optional<SlopeField> field;
        auto need_grid = [&] {
            if (!grid) grid = build_grid(*g, n.n_base, n.N_theta);
        };
        auto need_field = [&] {
            need_grid();
            if (!field) field = compute_slope_field(spec, grid->bases, grid->N_theta, sopt);
        };

        if (wants(s, "gv") && certified) {
            need_field();
            json gv = {{"mesh_n", grid->mesh_n},
                       {"n_base", grid->bases.size()},
                       {"N_theta", grid->N_theta},
                       {"certified", field->certified()},
                       {"max_convergence_gap", field->max_convergence_gap},
                       {"n_flagged", field->n_flagged}};
            if (field->certified()) {
                double vals[2];
                for (Side side : {Side::Plus, Side::Minus}) {
                    const char* tag = side == Side::Plus ? "plus" : "minus";
                    vals[side_index(side)] = gv_general(spec, *grid, *field, side);
                    gv[std::string("general_") + tag] = vals[side_index(side)];
                    gv[std::string("specialized_") + tag] = gv_specialized(spec, *grid, *field, side);
                    gv[std::string("fourier_") + tag] = gv_fourier(spec, *grid, *field, side);
                }
                double err[2] = {NAN, NAN};
                if (n.richardson) {
                    QuadratureGrid coarse = coarsen(*g, *grid);
                    SlopeField cf = compute_slope_field(spec, coarse.bases, coarse.N_theta, sopt);
                    if (cf.certified())
                        for (Side side : {Side::Plus, Side::Minus})
                            err[side_index(side)] = std::abs(vals[side_index(side)] - gv_general(spec, coarse, cf, side)) / 3.0;
                    else
                        uncertified = true;
                }
                gv["error_plus"] = err[0];
                gv["error_minus"] = err[1];
                inv["gv_plus"] = vals[0];
                inv["gv_minus"] = vals[1];
                inv["gv_error"] = std::isnan(err[0]) ? json(nullptr) : json(std::max(err[0], err[1]));
            } else {
                uncertified = true;
            }
            meas["gv"] = gv;
        }

        if (wants(s, "identities")) {
            need_grid();
            json id;
            id["mass_check"] = mass_check(spec, *grid);
            id["gb_check"] = gauss_bonnet_check(spec, *grid);
            inv["mass_check"] = id["mass_check"];
            inv["gb_check"] = id["gb_check"];
            CocycleState cs = integrate_cocycle(spec, s.initial, n.orbit_T, n.dt);
            id["wronskian_residual"] = std::abs(cs.log_det() - cs.int_vlambda) / std::max(1.0, std::abs(cs.int_vlambda));
            if (spec.has_theta()) {
                auto states = sample_liouville(*g, 16, s.seed + 2);
                ClosedCoclosed cc = closed_coclosed_test(spec, states);
                id["closed_residual"] = cc.closed_residual;
                id["coclosed_residual"] = cc.coclosed_residual;
            }
            if (certified) {
                need_field();
                if (field->certified()) {
                    RiccintResult ri = riccint_check(spec, *grid, *field, Side::Plus);
                    id["riccint_lhs"] = ri.lhs;
                    id["riccint_rhs"] = ri.rhs;
                    id["riccint_residual"] = ri.residual;
                    inv["riccint_lhs"] = ri.lhs;
                    inv["riccint_rhs"] = ri.rhs;
                } else {
                    uncertified = true;
                }
                OrbitSlopes os = slopes_along_orbit(spec, s.initial, std::min(n.orbit_T, 100.0), n.dt);
                id["riccati_residual_plus"] = riccati_residual(os.orbit, os.r_plus);
                id["riccati_residual_minus"] = riccati_residual(os.orbit, os.r_minus);
                id["lemma_vol_residual"] = lemma_vol_check(os.orbit, os.r_plus, os.r_minus);
            }
            meas["identities"] = id;
        }

        if (wants(s, "entropy")) {
            EntropyResult e = entropy_production(spec, s.initial, n.entropy_T, n.dt);
            meas["entropy"] = {{"e", e.e},
                               {"std_error", e.std_error},
                               {"chi_plus", e.chi_plus},
                               {"chi_minus", e.chi_minus},
                               {"lyapunov_consistency", e.lyapunov_consistency},
                               {"drift", e.drift},
                               {"converged", e.drift <= n.drift_tol}};
            inv["entropy"] = e.e;
        }

        if (wants(s, "pde") && b.C) {
            const TheoremCSpec& C = *b.C;
            auto states = sample_liouville(*g, 500, s.seed + 3);
            double worst = 0;
            for (const auto& st : states) worst = std::max(worst, std::abs(theoremC_identity_residual(C, st.z)));
            meas["pde"] = {{"residual", C.pde.residual},
                           {"newton_iterations", C.pde.newton_iterations},
                           {"picard_iterations", C.pde.picard_iterations},
                           {"used_picard", C.pde.used_picard},
                           {"bracket_held", C.pde.bracket_held},
                           {"u_minus", C.pde.u_minus},
                           {"u_plus", C.pde.u_plus},
                           {"n_classes", C.mesh->n_classes},
                           {"invariance_defect", C.poincare.defect},
                           {"lift_fit_residual", C.lift_fit_residual},
                           {"curvature_identity_residual", worst}};
        }
        res.exit_code = uncertified ? kExitUncertified : kExitOk;
        if (uncertified) res.message = "hyperbolicity not certified for a slope-dependent measurement";
    } catch (const SchemaError& e) {
        res.exit_code = kExitSchema;
        res.message = e.what();
    } catch (const CertificationError& e) {
        res.exit_code = kExitUncertified;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitFault;
        res.message = e.what();
    }
    m["measurements"] = meas;
    m["certification"] = cert;
    m["invariant_report"] = inv;
    m["exit_code"] = res.exit_code;
    if (!res.message.empty()) m["message"] = res.message;
    if (!out_dir.empty()) {
        artifacts.push_back("manifest.json");
        m["artifacts"] = artifacts;
        write_text(out_dir / "manifest.json", m.dump(2) + "\n");
    } else {
        m["artifacts"] = json::array();
    }
    res.manifest = m;
    return res;
}

std::vector<std::pair<std::string, json>> flatten_leaves(const json& j, const std::string& prefix) {
    std::vector<std::pair<std::string, json>> out;
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            auto sub = flatten_leaves(it.value(), join(prefix, it.key()));
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto sub = flatten_leaves(j[i], join(prefix, std::to_string(i)));
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else if (j.is_number() || j.is_boolean()) {
        out.push_back({prefix, j});
    }
    return out;
}

namespace {

void set_path(json& doc, const std::string& path, double value) {
    json* cur = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw SchemaError(path, "empty sweep axis");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        json& next = (*cur)[parts[i]];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw SchemaError(path, "axis does not address a scalar field");
        cur = &next;
    }
    json& leaf = (*cur)[parts.back()];
    if (!leaf.is_null() && !leaf.is_number()) throw SchemaError(path, "axis does not address a scalar field");
    if (value == std::floor(value) && std::abs(value) < 1e15)
        leaf = static_cast<long long>(value);
    else
        leaf = value;
}

std::string csv_cell(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt(v.get<double>());
    return "";
}

}  // namespace

SweepResult sweep_scenarios(const json& templ, const std::string& axis, const std::vector<double>& values,
                            const fs::path& out_dir) {
    SweepResult sr;
    sr.rows.resize(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof name, "row_%03zu", i);
        fs::path dir = out_dir.empty() ? fs::path() : out_dir / name;
        try {
            json doc = templ;
            set_path(doc, axis, values[i]);
            Scenario s = parse_scenario(doc);
            sr.rows[i] = run_scenario(s, dir);
        } catch (const SchemaError& e) {
            sr.rows[i].exit_code = kExitSchema;
            sr.rows[i].message = e.what();
        } catch (const std::exception& e) {
            sr.rows[i].exit_code = kExitFault;
            sr.rows[i].message = e.what();
        }
    });
    std::set<std::string> cols;
    std::vector<std::map<std::string, json>> flat(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const json& m = sr.rows[i].manifest;
        for (const char* sec : {"invariant_report", "measurements", "construction"})
            if (m.contains(sec))
                for (auto& [k, v] : flatten_leaves(m[sec], sec)) {
                    cols.insert(k);
                    flat[i][k] = v;
                }
    }
    sr.columns.assign(cols.begin(), cols.end());
    std::string csv = axis + ",exit_code";
    for (const auto& c : sr.columns) csv += "," + c;
    csv += ",message\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv += fmt(values[i]) + "," + std::to_string(sr.rows[i].exit_code);
        for (const auto& c : sr.columns) {
            auto it = flat[i].find(c);
            csv += "," + (it == flat[i].end() ? std::string() : csv_cell(it->second));
        }
        std::string msg = sr.rows[i].message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        csv += "," + msg + "\n";
    }
    sr.csv = csv;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(out_dir / "sweep.csv", csv);
    }
    return sr;
}

VerifyResult verify_golden(const json& golden) {
    VerifyResult vr;
    if (!golden.is_object() || !golden.contains("scenario")) throw SchemaError("scenario", "golden file has no scenario");
    Scenario s = parse_scenario(golden["scenario"]);
    RunResult now = run_scenario(s);
    double rel = 1e-9;
    json fields = json::object();
    if (golden.contains("tolerances")) {
        const json& t = golden["tolerances"];
        rel = get_number(t, "default", rel, "tolerances");
        if (t.contains("fields")) fields = t["fields"];
    }
    auto tol_for = [&](const std::string& path, double ref) {
        std::string leaf = path.substr(path.rfind('.') + 1);
        if (fields.contains(path) && fields[path].is_number()) return fields[path].get<double>();
        if (fields.contains(leaf) && fields[leaf].is_number()) return fields[leaf].get<double>();
        return rel * std::max(1.0, std::abs(ref));
    };
    if (golden.value("inputs_hash", std::string()) != now.manifest["inputs_hash"].get<std::string>())
        vr.mismatches.push_back("inputs_hash");
    if (golden.value("exit_code", 0) != now.exit_code) vr.mismatches.push_back("exit_code");
    for (const char* sec : {"measurements", "invariant_report"}) {
        if (!golden.contains(sec)) continue;
        std::map<std::string, json> cur;
        for (auto& [k, v] : flatten_leaves(now.manifest[sec], sec)) cur[k] = v;
        for (auto& [k, v] : flatten_leaves(golden[sec], sec)) {
            auto it = cur.find(k);
            if (it == cur.end()) {
                vr.mismatches.push_back(k);
                continue;
            }
            const json& w = it->second;
            bool same;
            if (v.is_boolean() || w.is_boolean())
                same = v == w;
            else if (v.is_number_integer() && w.is_number_integer())
                same = v.get<long long>() == w.get<long long>();
            else {
                double a = v.get<double>(), b = w.get<double>();
                same = std::abs(a - b) <= tol_for(k, a);
            }
            if (!same) vr.mismatches.push_back(k);
        }
    }
    vr.pass = vr.mismatches.empty();
    vr.exit_code = vr.pass ? kExitOk : kExitMismatch;
    return vr;
}

}  // namespace thermolab
