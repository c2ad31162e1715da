#include "hyperstab/scenario.hpp"

#include "hyperstab/errors.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace hyperstab {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError("unknown key \"" + key + "\" in " + where);
    }
}

Matrix parse_matrix(const json& rows, const std::string& where) {
    if (!rows.is_array() || rows.empty())
        throw ValidationError(where + " must be a nonempty nested array");
    const size_t ncols = rows[0].size();
    Matrix M(rows.size(), ncols);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != ncols)
            throw DimensionError(where + " row " + std::to_string(i) + " length mismatch");
        for (size_t j = 0; j < ncols; ++j) M(static_cast<long>(i), static_cast<long>(j)) = rows[i][j].get<double>();
    }
    return M;
}

Vector parse_vector(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ValidationError(where + " must be an array");
    Vector v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v(static_cast<long>(i)) = arr[i].get<double>();
    return v;
}

FeedbackDevice parse_device(const json& d) {
    check_keys(d, "device", {"id", "kind", "params", "gamma"});
    FeedbackDevice dev;
    dev.device_id = d.at("id").get<int>();
    dev.gamma = d.value("gamma", 1.0);
    const std::string kind = d.at("kind").get<std::string>();
    const json params = d.value("params", json::object());
    if (kind == "linear") {
        dev.kind = DeviceKind::LinearGain;
        check_keys(params, "linear params", {"k"});
        dev.k = params.at("k").get<double>();
    } else if (kind == "sector") {
        dev.kind = DeviceKind::Sector;
        check_keys(params, "sector params", {"k1", "k2"});
        dev.k1 = params.at("k1").get<double>();
        dev.k2 = params.at("k2").get<double>();
    } else if (kind == "saturation") {
        dev.kind = DeviceKind::Saturation;
        check_keys(params, "saturation params", {"k", "L"});
        dev.k = params.at("k").get<double>();
        dev.limit = params.at("L").get<double>();
    } else if (kind == "relay") {
        dev.kind = DeviceKind::Relay;
        check_keys(params, "relay params", {"threshold"});
        dev.threshold = params.at("threshold").get<double>();
    } else if (kind == "time_varying_gain") {
        dev.kind = DeviceKind::TimeVaryingGain;
        check_keys(params, "time_varying_gain params", {"t", "k"});
        dev.table_t = params.at("t").get<std::vector<double>>();
        dev.table_v = params.at("k").get<std::vector<double>>();
    } else if (kind == "tabulated") {
        dev.kind = DeviceKind::Tabulated;
        check_keys(params, "tabulated params", {"t", "v"});
        dev.table_t = params.at("t").get<std::vector<double>>();
        dev.table_v = params.at("v").get<std::vector<double>>();
    } else {
        throw ValidationError("unknown device kind \"" + kind + "\"");
    }
    dev.validate();
    return dev;
}

Probe parse_probe(const json& p) {
    Probe probe;
    check_keys(p, "probe", {"kind", "amplitude", "rate", "t", "w"});
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "exp") {
        probe.kind = Probe::Kind::Exp;
        probe.amplitude = p.value("amplitude", 1.0);
        probe.rate = p.value("rate", 1.0);
    } else if (kind == "tabulated") {
        probe.kind = Probe::Kind::Tabulated;
        probe.table_t = p.at("t").get<std::vector<double>>();
        probe.table_w = p.at("w").get<std::vector<double>>();
        if (probe.table_t.size() != probe.table_w.size() || probe.table_t.empty())
            throw ValidationError("probe table needs matching nonempty t/w lists");
    } else {
        throw ValidationError("unknown probe kind \"" + kind + "\"");
    }
    return probe;
}

}  // namespace

std::string scenario_digest(const json& doc) {
    const std::string text = doc.dump();
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

LoadedScenario parse_scenario(const json& doc) {
    check_keys(doc, "scenario",
               {"spec_version", "modes", "devices", "schedule", "simulation", "analysis"});
    if (doc.value("spec_version", 1) != 1)
        throw ValidationError("unsupported spec_version");

    LoadedScenario out;
    out.raw = doc;
    Scenario& sc = out.scenario;

    for (const auto& m : doc.at("modes")) {
        check_keys(m, "mode", {"id", "A", "b", "c", "d"});
        StateSpaceMode mode(m.at("id").get<int>(), parse_matrix(m.at("A"), "A"),
                            parse_vector(m.at("b"), "b"), parse_vector(m.at("c"), "c"),
                            m.value("d", 0.0));
        sc.modes.push_back(std::move(mode));
    }
    for (const auto& d : doc.at("devices")) sc.devices.push_back(parse_device(d));

    const json& sch = doc.at("schedule");
    check_keys(sch, "schedule", {"sti", "sti0", "marked", "min_dwell"});
    for (const auto& e : sch.at("sti")) {
        check_keys(e, "sti entry", {"t", "mode"});
        sc.schedule.sti.push_back({e.at("t").get<double>(), e.at("mode").get<int>()});
    }
    for (const auto& e : sch.at("sti0")) {
        check_keys(e, "sti0 entry", {"t", "device"});
        sc.schedule.sti0.push_back({e.at("t").get<double>(), e.at("device").get<int>()});
    }
    if (sch.contains("marked")) sc.schedule.marked = sch.at("marked").get<std::vector<double>>();
    sc.schedule.min_dwell = sch.value("min_dwell", 0.0);

    const json& sim = doc.at("simulation");
    check_keys(sim, "simulation", {"x0", "horizon", "dt", "probe"});
    sc.x0 = parse_vector(sim.at("x0"), "x0");
    sc.horizon = sim.at("horizon").get<double>();
    sc.dt = sim.at("dt").get<double>();
    if (sim.contains("probe")) sc.probe = parse_probe(sim.at("probe"));

    AnalysisConfig& an = out.analysis;
    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        check_keys(a, "analysis",
                   {"frequency_grid", "eps_margin", "delta", "lambda0", "K_sat", "lambda_sat",
                    "u_sq_cap", "lyapunov"});
        if (a.contains("frequency_grid")) {
            const json& fg = a.at("frequency_grid");
            check_keys(fg, "frequency_grid", {"omega_min", "omega_max", "points"});
            an.grid.omega_min = fg.value("omega_min", an.grid.omega_min);
            an.grid.omega_max = fg.value("omega_max", an.grid.omega_max);
            an.grid.points = fg.value("points", an.grid.points);
        }
        an.eps_margin = a.value("eps_margin", an.eps_margin);
        an.delta = a.value("delta", an.delta);
        an.lambda0 = a.value("lambda0", an.lambda0);
        if (a.contains("K_sat")) an.K_sat = a.at("K_sat").get<double>();
        if (a.contains("lambda_sat")) an.lambda_sat = a.at("lambda_sat").get<double>();
        if (a.contains("u_sq_cap")) an.u_sq_cap = a.at("u_sq_cap").get<double>();
        if (a.contains("lyapunov")) {
            const json& ly = a.at("lyapunov");
            check_keys(ly, "lyapunov", {"P", "X_families", "combos"});
            if (ly.contains("P")) an.lyapunov.P = parse_matrix(ly.at("P"), "P");
            if (ly.contains("X_families"))
                for (const auto& fam : ly.at("X_families")) {
                    std::vector<Matrix> xs;
                    for (const auto& x : fam) xs.push_back(parse_matrix(x, "X"));
                    an.lyapunov.x_families.push_back(std::move(xs));
                }
            if (ly.contains("combos"))
                for (const auto& c : ly.at("combos")) {
                    check_keys(c, "combo", {"alpha", "beta"});
                    an.lyapunov.combos.emplace_back(c.at("alpha").get<std::vector<double>>(),
                                                    c.at("beta").get<std::vector<double>>());
                }
        }
    }

    sc.digest = scenario_digest(doc);
    sc.validate();
    return out;
}

LoadedScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario parse error: ") + e.what());
    }
    return parse_scenario(doc);
}

std::map<int, ModeAnalysis> analyze_all_modes(const LoadedScenario& loaded) {
    std::map<int, ModeAnalysis> out;
    for (const auto& m : loaded.scenario.modes)
        out[m.mode_id] = analyze_mode(m, loaded.analysis.eps_margin, loaded.analysis.grid);
    return out;
}

nlohmann::json build_analysis_report(const LoadedScenario& loaded,
                                     const std::map<int, ModeAnalysis>& analyses,
                                     const CommonLyapunovReport& lyap,
                                     const AnalysisVerdict& verdict) {
    json report;
    report["spec_version"] = 1;
    report["scenario_digest"] = loaded.scenario.digest;
    report["timestamp"] = static_cast<long long>(std::time(nullptr));

    json modes = json::array();
    for (const auto& [id, ma] : analyses) {
        json m;
        m["id"] = id;
        m["class"] = to_string(ma.pr.cls);
        m["min_re"] = ma.pr.min_re;
        if (ma.pr.argmin_at_infinity)
            m["argmin_omega"] = "infinity";
        else
            m["argmin_omega"] = ma.pr.argmin_omega;
        m["min_re_finite"] = ma.pr.min_re_finite;
        m["max_abs_re"] = ma.pr.max_abs_re;
        m["strictly_positive_real"] = ma.pr.is_strictly_positive_real;
        m["positive_real"] = ma.pr.is_positive_real;
        m["relative_degree"] = ma.pr.relative_degree;
        if (!ma.pr.reason.empty()) m["reason"] = ma.pr.reason;
        if (ma.spr_relative_degree_one)
            m["note"] = "relative-degree-one SPR mode counted in STI_p with finite-grid minimum";
        m["envelope"] = {{"K", ma.envelope.K}, {"rho", ma.envelope.rho}};
        modes.push_back(m);
    }
    report["modes"] = modes;

    const InstantClassification cls = classify_schedule(loaded.scenario.schedule, analyses);
    json instants = json::array();
    for (size_t i = 0; i < loaded.scenario.schedule.sti.size(); ++i)
        instants.push_back({{"t", loaded.scenario.schedule.sti[i].t},
                            {"mode", loaded.scenario.schedule.sti[i].id},
                            {"class", to_string(cls.classes[i])}});
    report["instants"] = instants;

    json bounds = json::array();
    for (const auto& row : verdict.bounds) {
        json r;
        r["t"] = row.t;
        r["dwell"] = row.dwell;
        r["kind"] = row.is_minimum ? "minimum" : "maximum";
        if (std::isfinite(row.bound))
            r["bound"] = row.bound;
        else
            r["bound"] = "infinity";
        r["ok"] = row.ok;
        if (!row.is_minimum) {
            r["g_at_entry"] = row.g_at_entry;
            r["max_abs_re"] = row.max_abs_re;
            r["max_u_sq"] = row.max_u_sq;
        }
        bounds.push_back(r);
    }
    report["bounds"] = bounds;

    json ly;
    ly["exists_certificate"] = lyap.exists_certificate;
    if (lyap.certificate) {
        json p = json::array();
        const Matrix& P = lyap.certificate->P;
        for (long i = 0; i < P.rows(); ++i) {
            json row = json::array();
            for (long j = 0; j < P.cols(); ++j) row.push_back(P(i, j));
            p.push_back(row);
        }
        ly["P"] = p;
        json qmin;
        for (const auto& [id, v] : lyap.certificate->min_eig_Q) qmin[std::to_string(id)] = v;
        ly["min_eig_Q"] = qmin;
    }
    json failures = json::array();
    for (const auto& [name, witness] : lyap.necessary_test_failures)
        failures.push_back({{"test", name}, {"witness", witness}});
    ly["necessary_test_failures"] = failures;
    json samples = json::array();
    for (const auto& [name, outcome] : lyap.sum_condition_samples)
        samples.push_back({{"family", name}, {"outcome", to_string(outcome)},
                           {"evidence", "sampled"}});
    ly["sum_condition_samples"] = samples;
    if (!lyap.note.empty()) ly["note"] = lyap.note;
    report["lyapunov"] = ly;

    json v;
    v["verdict"] = to_string(verdict.verdict);
    json conds = json::array();
    for (const auto& c : verdict.conditions)
        conds.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    v["conditions"] = conds;
    if (!verdict.failed_condition.empty()) v["failed_condition"] = verdict.failed_condition;
    report["verdict"] = v;
    return report;
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ValidationError("cannot open trace file " + path + " for writing");
    const int n = trace.steps.empty() ? 0 : static_cast<int>(trace.steps.front().x.size());
    std::fprintf(f, "t,mode,device");
    for (int i = 0; i < n; ++i) std::fprintf(f, ",x%d", i);
    std::fprintf(f, ",u,y,E,g_floor,popov\n");
    for (const auto& s : trace.steps) {
        std::fprintf(f, "%.12g,%d,%d", s.t, s.mode_id, s.device_id);
        for (int i = 0; i < n; ++i) std::fprintf(f, ",%.12g", s.x(i));
        std::fprintf(f, ",%.12g,%.12g,%.12g,%.12g,%.12g\n", s.u, s.y, s.E, s.g_floor, s.popov);
    }
    std::fclose(f);

    json meta;
    meta["scenario_digest"] = trace.scenario_digest;
    meta["dt"] = trace.dt;
    meta["solver"] = trace.solver;
    meta["gamma"] = trace.gamma;
    meta["diverged"] = trace.diverged;
    if (trace.divergence_time) meta["divergence_time"] = *trace.divergence_time;
    std::ofstream mf(path + ".meta.json");
    if (!mf) throw ValidationError("cannot write trace metadata");
    mf << meta.dump(2) << "\n";
}

SimulationTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trace file " + path);
    SimulationTrace trace;

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty trace file");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    if (cols.size() < 8 || cols[0] != "t" || cols[1] != "mode" || cols[2] != "device")
        throw ValidationError("unexpected trace header");
    const int n = static_cast<int>(cols.size()) - 8;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (static_cast<int>(vals.size()) != n + 8)
            throw ValidationError("trace row width mismatch");
        TraceStep s;
        s.t = vals[0];
        s.mode_id = static_cast<int>(vals[1]);
        s.device_id = static_cast<int>(vals[2]);
        s.x = Vector(n);
        for (int i = 0; i < n; ++i) s.x(i) = vals[static_cast<size_t>(3 + i)];
        s.u = vals[static_cast<size_t>(n + 3)];
        s.y = vals[static_cast<size_t>(n + 4)];
        s.E = vals[static_cast<size_t>(n + 5)];
        s.g_floor = vals[static_cast<size_t>(n + 6)];
        s.popov = vals[static_cast<size_t>(n + 7)];
        trace.steps.push_back(std::move(s));
    }

    std::ifstream mf(path + ".meta.json");
    if (mf) {
        const json meta = json::parse(mf);
        trace.scenario_digest = meta.value("scenario_digest", "");
        trace.dt = meta.value("dt", 0.0);
        trace.solver = meta.value("solver", "rk4");
        trace.gamma = meta.value("gamma", 1.0);
        trace.diverged = meta.value("diverged", false);
        if (meta.contains("divergence_time"))
            trace.divergence_time = meta.at("divergence_time").get<double>();
    }
    return trace;
}

}  // namespace hyperstab
