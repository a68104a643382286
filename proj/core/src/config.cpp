#include "lbctl/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lbctl/errors.hpp"
#include "lbctl/hash.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Object reader that records which keys were consumed; done() rejects the rest.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json* raw(const char* key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    std::optional<Node> child(const char* key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        return Node(*v, join(path_, key));
    }

    void read(const char* key, double& dst) {
        if (const json* v = raw(key)) dst = number(*v, key);
    }
    void read(const char* key, std::size_t& dst) {
        if (const json* v = raw(key)) dst = count(*v, key);
    }
    void read(const char* key, bool& dst) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected a boolean");
            dst = v->get<bool>();
        }
    }
    void read(const char* key, std::string& dst) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string");
            dst = v->get<std::string>();
        }
    }
    void read(const char* key, std::optional<double>& dst) {
        if (const json* v = raw(key)) {
            if (v->is_null())
                dst.reset();
            else
                dst = number(*v, key);
        }
    }
    void read(const char* key, std::vector<double>& dst) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) throw ConfigError(join(path_, key), "expected an array");
            dst.clear();
            for (const json& x : *v) dst.push_back(number(x, key));
        }
    }
    void read(const char* key, std::vector<std::size_t>& dst) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) throw ConfigError(join(path_, key), "expected an array");
            dst.clear();
            for (const json& x : *v) dst.push_back(count(x, key));
        }
    }
    void read(const char* key, std::array<double, 2>& dst) {
        if (const json* v = raw(key)) {
            if (!v->is_array() || v->size() != 2) throw ConfigError(join(path_, key), "expected two numbers");
            dst = {number((*v)[0], key), number((*v)[1], key)};
        }
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }

    const std::string& path() const { return path_; }

private:
    double number(const json& v, const char* key) const {
        if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
        return v.get<double>();
    }
    std::size_t count(const json& v, const char* key) const {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError(join(path_, key), "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class F>
void checked(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

ViscosityLaw read_law(Node n) {
    ViscosityLaw law;
    std::string kind = "L2";
    n.read("kind", kind);
    if (kind == "L2")
        law.kind = ViscosityLaw::Kind::L2;
    else if (kind == "Lp")
        law.kind = ViscosityLaw::Kind::Lp;
    else
        throw ConfigError(join(n.path(), "kind"), "expected \"L2\" or \"Lp\"");
    n.read("nu0", law.nu0);
    n.read("nu1", law.nu1);
    n.read("p", law.p);
    n.done();
    return law;
}

json law_json(const ViscosityLaw& law) {
    return {{"kind", law.kind == ViscosityLaw::Kind::L2 ? "L2" : "Lp"}, {"nu0", law.nu0}, {"nu1", law.nu1}, {"p", law.p}};
}

void read_system(Node n, SystemSpec& s) {
    if (auto c = n.child("law")) s.law = read_law(*c);
    if (const json* v = n.raw("law_theta")) {
        if (v->is_null())
            s.law_theta.reset();
        else
            s.law_theta = read_law(Node(*v, join(n.path(), "law_theta")));
    }
    n.read("coupling", s.nu0_coupling);
    n.read("heating", s.heating_on);
    std::string mode = s.mode == SystemMode::Nonlinear ? "nonlinear" : "linearized";
    n.read("mode", mode);
    if (mode == "nonlinear")
        s.mode = SystemMode::Nonlinear;
    else if (mode == "linearized")
        s.mode = SystemMode::Linearized;
    else
        throw ConfigError(join(n.path(), "mode"), "expected \"nonlinear\" or \"linearized\"");
    n.read("cfl", s.cfl);
    n.read("blowup_factor", s.blowup_factor);
    if (auto c = n.child("solver")) {
        std::string backend = s.solver.backend == SolverBackend::Spectral ? "spectral" : "pcg";
        c->read("backend", backend);
        if (backend == "spectral")
            s.solver.backend = SolverBackend::Spectral;
        else if (backend == "pcg")
            s.solver.backend = SolverBackend::Pcg;
        else
            throw ConfigError(join(c->path(), "backend"), "expected \"spectral\" or \"pcg\"");
        c->read("tol", s.solver.tol);
        c->read("max_iters", s.solver.max_iters);
        c->read("stokes_tol", s.solver.stokes_tol);
        c->done();
    }
    n.done();
}

ProfileSpec read_profile(Node n, const std::set<std::string>& names) {
    ProfileSpec p;
    n.read("profile", p.name);
    if (!names.count(p.name)) throw ConfigError(join(n.path(), "profile"), "unknown profile '" + p.name + "'");
    n.read("amplitude", p.amplitude);
    n.done();
    return p;
}

const std::set<std::string> kVelocityProfiles{"zero", "curl_sin2", "random"};
const std::set<std::string> kThetaProfiles{"zero", "sin_sin", "random"};

void validate(const ExperimentConfig& c) {
    std::optional<GridSpec> g;
    checked("grid", [&] { g.emplace(c.grid()); });
    std::optional<TimeGrid> tg;
    checked("time", [&] { tg.emplace(c.time()); });
    checked("system", [&] { c.system.validate(); });
    if (!(c.system.solver.tol > 0.0) || !(c.system.solver.stokes_tol > 0.0))
        throw ConfigError("system.solver", "tolerances must be positive");
    checked("patch", [&] { c.patch.validate(*g); });
    checked("weights", [&] { c.resolved_weights().validate(); });
    // the large-time tail is controlled on its own time grid
    checked("penalty", [&] {
        if (c.kind == ExperimentKind::LargeTime)
            c.penalty.validate(TimeGrid(c.large_time.horizon0, c.large_time.nt0));
        else
            c.penalty.validate(*tg);
    });
    for (double e : c.eps_sweep)
        if (!(e > 0.0)) throw ConfigError("penalty.eps_sweep", "entries must be positive");
    checked("outer", [&] { c.outer.validate(); });
    const LargeTimeSpec& lt = c.large_time;
    if (!(lt.delta > 0.0)) throw ConfigError("large_time.delta", "must be positive");
    if (!(lt.horizon0 > 0.0)) throw ConfigError("large_time.horizon0", "must be positive");
    if (!(lt.max_wait > 0.0)) throw ConfigError("large_time.max_wait", "must be positive");
    if (!(lt.fit_from >= 0.0 && lt.fit_from < 1.0)) throw ConfigError("large_time.fit_from", "must lie in [0, 1)");
    checked("large_time", [&] { TimeGrid(lt.horizon0, lt.nt0); });
    if (c.initial.energy && !(*c.initial.energy > 0.0)) throw ConfigError("initial.energy", "must be positive");
    if (!(c.decay.fit_from >= 0.0 && c.decay.fit_from < 1.0)) throw ConfigError("decay.fit_from", "must lie in [0, 1)");
    if (!(c.decay.r2_min <= 1.0)) throw ConfigError("decay.r2_min", "must be <= 1");
    if (c.verify.mms_grids.size() < 2) throw ConfigError("verify.mms_grids", "needs at least two grids");
    for (std::size_t n : c.verify.mms_grids)
        if (n < 8) throw ConfigError("verify.mms_grids", "grids need at least 8 cells");
    if (!(c.verify.fd_step > 0.0)) throw ConfigError("verify.fd_step", "must be positive");
    if (!(c.verify.mms_horizon > 0.0)) throw ConfigError("verify.mms_horizon", "must be positive");
    checked("verify.chain_nt", [&] { TimeGrid(1.0, c.verify.chain_nt); });
}

}  // namespace

const char* to_string(ExperimentKind k) noexcept {
    switch (k) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::LinearControl: return "linear-control";
        case ExperimentKind::NonlinearControl: return "nonlinear-control";
        case ExperimentKind::Decay: return "decay";
        case ExperimentKind::LargeTime: return "large-time";
        case ExperimentKind::Verify: return "verify";
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& name) {
    for (ExperimentKind k : {ExperimentKind::Simulate, ExperimentKind::LinearControl, ExperimentKind::NonlinearControl,
                             ExperimentKind::Decay, ExperimentKind::LargeTime, ExperimentKind::Verify})
        if (name == to_string(k)) return k;
    throw ConfigError("kind", "unknown experiment kind '" + name + "'");
}

WeightParams ExperimentConfig::resolved_weights() const {
    WeightParams w = weights;
    if (auto_m) w.m = find_min_m(w.lambda, w.eta_sup);
    return w;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    Node n(root, "");
    ExperimentConfig c;
    if (!n.has("kind")) throw ConfigError("kind", "missing required key");
    std::string kind;
    n.read("kind", kind);
    c.kind = parse_kind(kind);
    std::size_t seed = c.seed;
    n.read("seed", seed);
    c.seed = seed;
    if (auto g = n.child("grid")) {
        g->read("nx", c.nx);
        g->read("ny", c.ny);
        g->read("lx", c.lx);
        g->read("ly", c.ly);
        g->done();
    }
    if (auto t = n.child("time")) {
        t->read("horizon", c.horizon);
        t->read("nt", c.nt);
        t->done();
    }
    if (auto s = n.child("system")) read_system(*s, c.system);
    if (auto w = n.child("weights")) {
        w->read("auto_m", c.auto_m);
        w->read("s", c.weights.s);
        w->read("lambda", c.weights.lambda);
        w->read("m", c.weights.m);
        w->read("eta_sup", c.weights.eta_sup);
        w->done();
    }
    if (auto p = n.child("patch")) {
        p->read("center", c.patch.center);
        p->read("half_widths", c.patch.half_widths);
        p->read("inner_margin", c.patch.inner_margin);
        p->done();
    }
    if (auto p = n.child("penalty")) {
        p->read("epsilon", c.penalty.epsilon);
        std::string mode = "carleman";
        p->read("weight_mode", mode);
        if (mode == "carleman")
            c.penalty.weight_mode = WeightMode::Carleman;
        else if (mode == "unweighted")
            c.penalty.weight_mode = WeightMode::Unweighted;
        else
            throw ConfigError(join(p->path(), "weight_mode"), "expected \"carleman\" or \"unweighted\"");
        p->read("t_clip", c.penalty.t_clip);
        p->read("cg_tol", c.penalty.cg_tol);
        p->read("cg_max_iters", c.penalty.cg_max_iters);
        p->read("eps_sweep", c.eps_sweep);
        p->done();
    }
    if (auto o = n.child("outer")) {
        o->read("max_outer", c.outer.max_outer);
        o->read("outer_tol", c.outer.outer_tol);
        o->read("damping", c.outer.damping);
        o->done();
    }
    if (auto l = n.child("large_time")) {
        l->read("delta", c.large_time.delta);
        l->read("horizon0", c.large_time.horizon0);
        l->read("nt0", c.large_time.nt0);
        l->read("max_wait", c.large_time.max_wait);
        l->read("fit_from", c.large_time.fit_from);
        l->done();
    }
    if (auto i = n.child("initial")) {
        if (auto v = i->child("velocity")) c.initial.velocity = read_profile(*v, kVelocityProfiles);
        if (auto t = i->child("theta")) c.initial.theta = read_profile(*t, kThetaProfiles);
        i->read("energy", c.initial.energy);
        i->done();
    }
    if (auto d = n.child("decay")) {
        d->read("fit_from", c.decay.fit_from);
        d->read("r2_min", c.decay.r2_min);
        d->read("phi_smallness", c.decay.phi_smallness);
        d->done();
    }
    if (auto v = n.child("verify")) {
        VerifySpec& s = c.verify;
        v->read("duality_trials", s.duality_trials);
        v->read("duality_tol", s.duality_tol);
        v->read("gradient_directions", s.gradient_directions);
        v->read("fd_step", s.fd_step);
        v->read("gradient_tol", s.gradient_tol);
        v->read("heating_trials", s.heating_trials);
        v->read("mms_grids", s.mms_grids);
        v->read("mms_horizon", s.mms_horizon);
        v->read("order_lo", s.order_lo);
        v->read("order_hi", s.order_hi);
        v->read("chain_nt", s.chain_nt);
        v->done();
    }
    if (auto k = n.child("checks")) {
        k->read("terminal_ratio", c.checks.terminal_ratio);
        k->read("sweep_slack", c.checks.sweep_slack);
        k->read("terminal_factor", c.checks.terminal_factor);
        k->read("crossing_factor", c.checks.crossing_factor);
        k->read("final_factor", c.checks.final_factor);
        k->done();
    }
    if (auto o = n.child("output")) {
        o->read("dir", c.out_dir);
        o->read("dump_fields", c.dump_fields);
        o->done();
    }
    n.done();
    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

json to_json(const ExperimentConfig& c, bool with_output) {
    const SystemSpec& s = c.system;
    json sys = {{"law", law_json(s.law)},
                {"law_theta", s.law_theta ? law_json(*s.law_theta) : json(nullptr)},
                {"coupling", s.nu0_coupling},
                {"heating", s.heating_on},
                {"mode", s.mode == SystemMode::Nonlinear ? "nonlinear" : "linearized"},
                {"cfl", s.cfl},
                {"blowup_factor", s.blowup_factor},
                {"solver",
                 {{"backend", s.solver.backend == SolverBackend::Spectral ? "spectral" : "pcg"},
                  {"tol", s.solver.tol},
                  {"max_iters", s.solver.max_iters},
                  {"stokes_tol", s.solver.stokes_tol}}}};
    const PenaltySpec& p = c.penalty;
    const VerifySpec& v = c.verify;
    json j = {
        {"kind", to_string(c.kind)},
        {"seed", c.seed},
        {"grid", {{"nx", c.nx}, {"ny", c.ny}, {"lx", c.lx}, {"ly", c.ly}}},
        {"time", {{"horizon", c.horizon}, {"nt", c.nt}}},
        {"system", sys},
        {"weights",
         {{"auto_m", c.auto_m},
          {"s", c.weights.s},
          {"lambda", c.weights.lambda},
          {"m", c.weights.m},
          {"eta_sup", c.weights.eta_sup}}},
        {"patch",
         {{"center", c.patch.center}, {"half_widths", c.patch.half_widths}, {"inner_margin", c.patch.inner_margin}}},
        {"penalty",
         {{"epsilon", p.epsilon},
          {"weight_mode", p.weight_mode == WeightMode::Carleman ? "carleman" : "unweighted"},
          {"t_clip", p.t_clip ? json(*p.t_clip) : json(nullptr)},
          {"cg_tol", p.cg_tol},
          {"cg_max_iters", p.cg_max_iters},
          {"eps_sweep", c.eps_sweep}}},
        {"outer", {{"max_outer", c.outer.max_outer}, {"outer_tol", c.outer.outer_tol}, {"damping", c.outer.damping}}},
        {"large_time",
         {{"delta", c.large_time.delta},
          {"horizon0", c.large_time.horizon0},
          {"nt0", c.large_time.nt0},
          {"max_wait", c.large_time.max_wait},
          {"fit_from", c.large_time.fit_from}}},
        {"initial",
         {{"velocity", {{"profile", c.initial.velocity.name}, {"amplitude", c.initial.velocity.amplitude}}},
          {"theta", {{"profile", c.initial.theta.name}, {"amplitude", c.initial.theta.amplitude}}},
          {"energy", c.initial.energy ? json(*c.initial.energy) : json(nullptr)}}},
        {"decay", {{"fit_from", c.decay.fit_from}, {"r2_min", c.decay.r2_min}, {"phi_smallness", c.decay.phi_smallness}}},
        {"verify",
         {{"duality_trials", v.duality_trials},
          {"duality_tol", v.duality_tol},
          {"gradient_directions", v.gradient_directions},
          {"fd_step", v.fd_step},
          {"gradient_tol", v.gradient_tol},
          {"heating_trials", v.heating_trials},
          {"mms_grids", v.mms_grids},
          {"mms_horizon", v.mms_horizon},
          {"order_lo", v.order_lo},
          {"order_hi", v.order_hi},
          {"chain_nt", v.chain_nt}}},
        {"checks",
         {{"terminal_ratio", c.checks.terminal_ratio},
          {"sweep_slack", c.checks.sweep_slack},
          {"terminal_factor", c.checks.terminal_factor},
          {"crossing_factor", c.checks.crossing_factor},
          {"final_factor", c.checks.final_factor}}}};
    if (with_output) j["output"] = {{"dir", c.out_dir}, {"dump_fields", c.dump_fields}};
    return j;
}

}  // namespace

std::string emit_config(const ExperimentConfig& cfg) { return to_json(cfg, true).dump(2) + "\n"; }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    Fnv1a h;
    h.add(std::string_view(to_json(cfg, false).dump()));
    return h.value();
}

State make_initial_state(const ExperimentConfig& cfg, const EllipticSolver& solver) {
    const GridSpec g = cfg.grid();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    State s(g);
    const ProfileSpec& pv = cfg.initial.velocity;
    if (pv.name == "curl_sin2") {
        s.y = manufactured_velocity(g, pv.amplitude);
    } else if (pv.name == "random") {
        VelocityField w(g);
        for (double& x : w.u_values()) x = u(rng);
        for (double& x : w.v_values()) x = u(rng);
        w.clear_boundary();
        s.y = pv.amplitude * solver.project(w);
    }
    const ProfileSpec& pt = cfg.initial.theta;
    if (pt.name == "sin_sin") {
        const double kx = std::numbers::pi / g.lx(), ky = std::numbers::pi / g.ly();
        s.theta = ScalarField::sample(
            g, [&](double x, double y) { return pt.amplitude * std::sin(kx * x) * std::sin(ky * y); });
    } else if (pt.name == "random") {
        for (double& x : s.theta.values()) x = pt.amplitude * u(rng);
    }
    if (cfg.initial.energy) {
        const double e = energy_sample(s, 0.0).E;
        if (!(e > 0.0)) throw ConfigError("initial.energy", "cannot rescale zero initial data");
        const double f = std::sqrt(*cfg.initial.energy / e);
        s.y *= f;
        s.theta *= f;
    }
    return s;
}

}  // namespace lbctl
