#include "riskflow/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "riskflow/core/errors.hpp"

namespace riskflow::cli {

using nlohmann::json;

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw ConfigurationError(kModule, "config key '" + path + "': " + what);
}

/// One JSON object of the config; records which keys were read so leftovers can be rejected.
class Section {
public:
    Section(const json& j, std::string path) : path_(std::move(path)) {
        if (!j.is_null() && !j.is_object()) schema_error(path_, "expected an object");
        if (j.is_object()) obj_ = &j;
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!obj_) return nullptr;
        auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_number()) schema_error(key_path(key), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) schema_error(key_path(key), "must be finite");
        return d;
    }

    double positive(const std::string& key, double def) {
        const double d = number(key, def);
        if (!(d > 0.0)) schema_error(key_path(key), "must be positive, got " + std::to_string(d));
        return d;
    }

    std::uint64_t count(const std::string& key, std::uint64_t def, std::uint64_t min = 0) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
            schema_error(key_path(key), "expected a non-negative integer");
        }
        const auto n = v->get<std::uint64_t>();
        if (n < min) schema_error(key_path(key), "must be at least " + std::to_string(min));
        return n;
    }

    bool flag(const std::string& key, bool def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_boolean()) schema_error(key_path(key), "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& def, const std::set<std::string>& allowed = {}) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_string()) schema_error(key_path(key), "expected a string");
        auto s = v->get<std::string>();
        if (!allowed.empty() && !allowed.count(s)) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            schema_error(key_path(key), "'" + s + "' is not one of: " + opts);
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_array()) schema_error(key_path(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                schema_error(key_path(key), "expected an array of finite numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section child(const std::string& key) {
        const json* v = find(key);
        static const json empty;
        return Section(v ? *v : empty, key_path(key));
    }

    /// Rejects keys that were never read.
    void finish() const {
        if (!obj_) return;
        for (const auto& [k, _] : obj_->items()) {
            if (!seen_.count(k)) schema_error(key_path(k), "unknown key '" + k + "'");
        }
    }

private:
    const json* obj_ = nullptr;
    std::string path_;
    std::set<std::string> seen_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void parse_cashflow_model(Section& m, ExperimentConfig& c) {
    auto& p = c.cashflow;
    p.rho = m.number("rho", p.rho);
    p.c = m.number("c", p.c);
    p.sigma = m.positive("sigma", p.sigma);
    p.disc_rate = m.number("disc_rate", p.disc_rate);
    p.a = m.number("a", p.a);
    p.m0 = m.number("m0", p.m0);
    p.y_terminal = m.number("y_terminal", p.y_terminal);
    p.marks = m.numbers("marks", {});
    p.weights = m.numbers("weights", {});
    if (p.marks.size() != p.weights.size()) schema_error(m.key_path("weights"), "must have one entry per mark");
    for (double w : p.weights) {
        if (!(w > 0.0)) schema_error(m.key_path("weights"), "mark intensities must be positive");
    }
    const double l = m.number("l", 0.0);
    const auto L = m.numbers("L", {});
    const auto r = m.numbers("r", {});
    const double K = m.number("K", 0.0);
    if (!L.empty() && L.size() != p.marks.size()) schema_error(m.key_path("L"), "must have one entry per mark");
    if (!r.empty() && r.size() != p.marks.size()) schema_error(m.key_path("r"), "must have one entry per mark");
    if (l != 0.0) p.l = [l](double) { return l; };
    if (!L.empty()) p.L = [L](double, std::size_t i) { return L[i]; };
    if (!r.empty()) p.r = [r](double, std::size_t i) { return r[i]; };
    if (K != 0.0) p.K = [K](double) { return K; };
    const auto orientation = m.text("riccati_orientation", "explicit_form", {"explicit_form", "printed_ode"});
    p.orientation = orientation == "explicit_form" ? cashflow::RiccatiOrientation::explicit_form
                                                   : cashflow::RiccatiOrientation::printed_ode;
    const auto boundary = m.text("psi_boundary", "initial", {"initial", "terminal"});
    p.psi_boundary = boundary == "initial" ? cashflow::PsiBoundary::initial : cashflow::PsiBoundary::terminal;
    const auto method = m.text("riccati_method", "closed_form", {"closed_form", "rk4"});
    c.riccati_method = method == "closed_form" ? cashflow::RiccatiMethod::closed_form : cashflow::RiccatiMethod::rk4;
    m.finish();
}

void parse_generic_model(Section& m, ExperimentConfig& c) {
    auto& g = c.generic;
    g.kappa = m.number("kappa", g.kappa);
    g.level = m.number("level", g.level);
    g.s = m.positive("s", g.s);
    g.beta = m.number("beta", g.beta);
    g.x0 = m.number("x0", g.x0);
    m.finish();
}

json describe(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["theta"] = c.theta;
    j["grid"] = {{"T", c.grid.horizon}, {"N", c.grid.steps}};
    j["mc"] = {{"n_paths", c.mc.n_paths}, {"seed", c.mc.seed}};
    j["output"] = {{"dir", c.output.dir},
                   {"dump_paths", c.output.dump_paths},
                   {"max_dump_paths", c.output.max_dump_paths},
                   {"plot_csv", c.output.plot_csv}};
    if (c.experiment == "cashflow") {
        const auto& p = c.cashflow;
        json model = {{"rho", p.rho},     {"c", p.c},   {"sigma", p.sigma}, {"disc_rate", p.disc_rate},
                      {"a", p.a},         {"m0", p.m0}, {"y_terminal", p.y_terminal},
                      {"marks", p.marks}, {"weights", p.weights}};
        model["l"] = p.l_at(0.0);
        model["K"] = p.K_at(0.0);
        std::vector<double> L, r;
        for (std::size_t i = 0; i < p.marks.size(); ++i) {
            L.push_back(p.L_at(0.0, i));
            r.push_back(p.r_at(0.0, i));
        }
        model["L"] = L;
        model["r"] = r;
        model["riccati_orientation"] =
            p.orientation == cashflow::RiccatiOrientation::explicit_form ? "explicit_form" : "printed_ode";
        model["psi_boundary"] = p.psi_boundary == cashflow::PsiBoundary::initial ? "initial" : "terminal";
        model["riccati_method"] = c.riccati_method == cashflow::RiccatiMethod::closed_form ? "closed_form" : "rk4";
        j["model"] = model;
        const auto& o = c.cashflow_options;
        j["pilot"] = {{"n_paths", o.pilot.n_paths},
                      {"max_outer", o.pilot.max_outer},
                      {"tol", o.pilot.tol},
                      {"relaxation", o.pilot.relaxation}};
        j["picard"] = {{"max_iter", o.pilot.picard.max_iter},
                       {"tol", o.pilot.picard.tol},
                       {"damping", o.pilot.picard.damping}};
        j["probe"] = {{"enabled", o.run_probe},
                      {"n_paths", o.probe_paths},
                      {"epsilons", o.epsilons},
                      {"policy_shift", o.policy_shift}};
        j["diagnostics"] = {{"foc_paths", o.foc_paths},
                            {"gap_points", o.gap_points},
                            {"gap_halfwidth", o.gap_halfwidth},
                            {"scan_paths", o.scan_paths},
                            {"convexity_probes", o.convexity_probes}};
    } else if (c.experiment == "generic_fbsde") {
        const auto& g = c.generic;
        j["model"] = {{"kappa", g.kappa}, {"level", g.level}, {"s", g.s}, {"beta", g.beta}, {"x0", g.x0}};
    }
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << col << ": parse error: " << e.what();
        throw ConfigurationError(kModule, msg.str());
    }
    if (!root.is_object()) throw ConfigurationError(kModule, origin + ": top level must be an object");

    ExperimentConfig c;
    Section top(root, "");
    c.experiment = top.text("experiment", c.experiment, {"cashflow", "generic_fbsde", "property_suite"});
    c.theta = top.positive("theta", c.theta);
    {
        auto g = top.child("grid");
        c.grid.horizon = g.positive("T", c.grid.horizon);
        c.grid.steps = g.count("N", c.grid.steps, 1);
        g.finish();
    }
    {
        auto m = top.child("mc");
        c.mc.n_paths = m.count("n_paths", c.mc.n_paths, 2);
        c.mc.seed = m.count("seed", c.mc.seed);
        m.finish();
    }
    {
        auto o = top.child("output");
        c.output.dir = o.text("dir", c.output.dir);
        c.output.dump_paths = o.flag("dump_paths", c.output.dump_paths);
        c.output.max_dump_paths = o.count("max_dump_paths", c.output.max_dump_paths);
        c.output.plot_csv = o.flag("plot_csv", c.output.plot_csv);
        o.finish();
    }
    auto model = top.child("model");
    if (c.experiment == "cashflow") {
        parse_cashflow_model(model, c);
        auto& o = c.cashflow_options;
        auto pilot = top.child("pilot");
        o.pilot.n_paths = pilot.count("n_paths", o.pilot.n_paths, 2);
        o.pilot.max_outer = pilot.count("max_outer", o.pilot.max_outer, 1);
        o.pilot.tol = pilot.positive("tol", o.pilot.tol);
        o.pilot.relaxation = pilot.positive("relaxation", o.pilot.relaxation);
        if (o.pilot.relaxation > 1.0) schema_error("pilot.relaxation", "must not exceed 1");
        pilot.finish();
        auto picard = top.child("picard");
        o.pilot.picard.max_iter = picard.count("max_iter", o.pilot.picard.max_iter, 1);
        o.pilot.picard.tol = picard.positive("tol", o.pilot.picard.tol);
        o.pilot.picard.damping = picard.positive("damping", o.pilot.picard.damping);
        if (o.pilot.picard.damping > 1.0) schema_error("picard.damping", "must not exceed 1");
        picard.finish();
        auto probe = top.child("probe");
        o.run_probe = probe.flag("enabled", o.run_probe);
        o.probe_paths = probe.count("n_paths", o.probe_paths);
        o.epsilons = probe.numbers("epsilons", o.epsilons);
        o.policy_shift = probe.number("policy_shift", o.policy_shift);
        probe.finish();
        auto diag = top.child("diagnostics");
        o.foc_paths = diag.count("foc_paths", o.foc_paths);
        o.gap_points = diag.count("gap_points", o.gap_points, 3);
        o.gap_halfwidth = diag.positive("gap_halfwidth", o.gap_halfwidth);
        o.scan_paths = diag.count("scan_paths", o.scan_paths);
        o.convexity_probes = diag.count("convexity_probes", o.convexity_probes);
        diag.finish();
        o.pilot.method = c.riccati_method;
    } else if (c.experiment == "generic_fbsde") {
        parse_generic_model(model, c);
    } else {
        model.finish();
    }
    top.finish();
    c.cashflow.theta = c.theta;
    c.resolved = describe(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError(kModule, "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
    if (o.experiment) {
        if (*o.experiment != "cashflow" && *o.experiment != "generic_fbsde" && *o.experiment != "property_suite") {
            throw ConfigurationError(kModule, "unknown experiment '" + *o.experiment + "'");
        }
        c.experiment = *o.experiment;
    }
    if (o.seed) c.mc.seed = *o.seed;
    if (o.paths) {
        if (*o.paths < 2) throw ConfigurationError(kModule, "--paths must be at least 2");
        c.mc.n_paths = *o.paths;
    }
    if (o.steps) {
        if (*o.steps < 1) throw ConfigurationError(kModule, "--steps must be at least 1");
        c.grid.steps = *o.steps;
    }
    if (o.theta) {
        if (!(*o.theta > 0.0) || !std::isfinite(*o.theta)) throw ConfigurationError(kModule, "--theta must be positive");
        c.theta = *o.theta;
        c.cashflow.theta = *o.theta;
    }
    if (o.out) c.output.dir = *o.out;
    if (o.dump_paths) c.output.dump_paths = true;
    if (o.quiet) c.quiet = true;
    c.resolved = describe(c);
}

}  // namespace riskflow::cli
