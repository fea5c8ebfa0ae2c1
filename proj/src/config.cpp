#include "pqeig/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace pqeig {

using json = nlohmann::ordered_json;

const char* command_name(Command c) {
    switch (c) {
        case Command::solve: return "solve";
        case Command::sweep: return "sweep";
        case Command::limit: return "limit";
        case Command::oracle: return "oracle";
        case Command::residual: return "residual";
    }
    return "?";
}

Command command_from_name(const std::string& name) {
    if (name == "solve") return Command::solve;
    if (name == "sweep") return Command::sweep;
    if (name == "limit") return Command::limit;
    if (name == "oracle") return Command::oracle;
    if (name == "residual") return Command::residual;
    throw config_error("unknown command '" + name +
                       "' (expected solve|sweep|limit|oracle|residual)");
}

namespace {

const std::set<std::string> known_keys = {
    "version",   "command",   "domain",       "R",     "L",
    "nx",        "ny",        "p",            "q",     "alpha",
    "beta",      "gamma",     "Q",            "p_schedule",
    "max_iter",  "tol_grad",  "tol_constraint", "step0", "backtrack_factor",
    "seed",      "oracle_samples", "out_dir"};

double get_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw config_error("config key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key) {
    if (!j.at(key).is_number_integer())
        throw config_error("config key '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

void require_positive(double v, const std::string& key) {
    if (!(std::isfinite(v) && v > 0.0))
        throw config_error("config key '" + key + "' must be finite and positive");
}

bool close_rel(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

// derives / cross-checks the exponent block and fills every echoed field
void materialize_exponents(RunConfig& c) {
    const bool schedule_form = c.gamma.has_value() || c.Qratio.has_value();
    const bool pq_form = c.q.has_value() || c.alpha.has_value();

    if (c.command == Command::sweep || c.command == Command::limit ||
        c.command == Command::oracle || c.command == Command::residual) {
        if (!c.gamma || !c.Qratio)
            throw config_error(std::string("command '") + command_name(c.command) +
                               "' needs the schedule form: gamma and Q");
        if (pq_form)
            throw config_error(std::string("command '") + command_name(c.command) +
                               "' takes no q/alpha/beta keys");
    }

    if (c.gamma && !(*c.gamma > 0.0 && *c.gamma < 1.0))
        throw config_error("gamma must lie in (0,1)");
    if (c.Qratio) require_positive(*c.Qratio, "Q");

    if (c.command == Command::solve) {
        if (!schedule_form && !pq_form)
            throw config_error("solve needs one exponent form: (p,q,alpha) or (p,gamma,Q)");
        if (!c.p) throw config_error("solve needs p");
        Exponents e;
        if (schedule_form) {
            if (!c.gamma || !c.Qratio) throw config_error("schedule form needs gamma and Q");
            e = Exponents::schedule(*c.p, *c.gamma, *c.Qratio);
            // echo of the derived quadruple; a provided value must agree
            if (c.q && !close_rel(*c.q, e.q))
                throw config_error("q conflicts with the gamma/Q schedule");
            if (c.alpha && !close_rel(*c.alpha, e.alpha))
                throw config_error("alpha conflicts with the gamma/Q schedule");
        } else {
            if (!c.q || !c.alpha) throw config_error("exponent form (p,q,alpha) needs all three");
            e = Exponents::make(*c.p, *c.q, *c.alpha);
        }
        if (c.beta && !close_rel(*c.beta, e.beta))
            throw config_error("beta conflicts with the derived value q*(1 - alpha/p)");
        if (!(e.beta > 1.0))
            throw config_error("solve requires derived beta > 1, got beta = " +
                               std::to_string(e.beta));
        c.q = e.q;
        c.alpha = e.alpha;
        c.beta = e.beta;
    }

    if (c.command == Command::sweep) {
        if (c.p) throw config_error("sweep uses p_schedule, not a single p");
        if (c.p_schedule.empty()) c.p_schedule = {4.0, 8.0, 16.0, 32.0, 64.0};
        for (double pv : c.p_schedule) {
            const Exponents e = Exponents::schedule(pv, *c.gamma, *c.Qratio);
            if (!(e.beta > 1.0))
                throw config_error("sweep row p = " + std::to_string(pv) +
                                   " yields beta <= 1");
        }
    } else if (!c.p_schedule.empty()) {
        throw config_error("p_schedule applies to the sweep command only");
    }
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw config_error(std::string("config is not valid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (const auto& item : j.items())
        if (!known_keys.count(item.key()))
            throw config_error("unknown config key '" + item.key() + "'");

    RunConfig c;
    if (!j.contains("version")) throw config_error("config needs a version field");
    c.version = get_int(j, "version");
    if (c.version != 1) throw config_error("unsupported config version " +
                                           std::to_string(c.version));
    if (!j.contains("command")) throw config_error("config needs a command field");
    c.command = command_from_name(j.at("command").get<std::string>());

    if (j.contains("domain")) {
        const std::string d = j.at("domain").get<std::string>();
        if (d == "disk")
            c.domain = DomainKind::disk;
        else if (d == "rectangle")
            c.domain = DomainKind::rectangle;
        else
            throw config_error("domain must be 'disk' or 'rectangle', got '" + d + "'");
    } else if (c.command == Command::oracle) {
        c.domain = DomainKind::rectangle;
    }

    if (j.contains("R")) c.R = get_number(j, "R");
    require_positive(c.R, "R");
    if (j.contains("L")) {
        c.L = get_number(j, "L");
        require_positive(*c.L, "L");
    }
    if (c.domain == DomainKind::rectangle || c.command == Command::oracle) {
        if (!c.L) throw config_error("rectangle domain needs L");
        if (*c.L > c.R)
            throw config_error("L must satisfy L <= R, got L = " + std::to_string(*c.L) +
                               ", R = " + std::to_string(c.R));
    } else if (c.L) {
        throw config_error("L applies to the rectangle domain only");
    }

    if (j.contains("nx")) c.nx = get_int(j, "nx");
    if (j.contains("ny")) c.ny = get_int(j, "ny");
    if (c.domain == DomainKind::disk) {
        if (j.contains("nx") && !j.contains("ny")) c.ny = c.nx;
        if (c.nx != c.ny) throw config_error("disk grids need nx == ny");
        if (c.nx < 5 || c.nx % 2 == 0)
            throw config_error("disk grids need odd nx >= 5, got " + std::to_string(c.nx));
    } else if (c.nx < 3 || c.ny < 3) {
        throw config_error("rectangle grids need nx, ny >= 3");
    }

    auto opt_num = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        return get_number(j, key);
    };
    c.p = opt_num("p");
    c.q = opt_num("q");
    c.alpha = opt_num("alpha");
    c.beta = opt_num("beta");
    c.gamma = opt_num("gamma");
    c.Qratio = opt_num("Q");
    if (j.contains("p_schedule")) {
        if (!j.at("p_schedule").is_array())
            throw config_error("p_schedule must be an array of numbers");
        for (const auto& v : j.at("p_schedule")) {
            if (!v.is_number()) throw config_error("p_schedule must be an array of numbers");
            c.p_schedule.push_back(v.get<double>());
        }
    }

    if (j.contains("max_iter")) c.max_iter = get_int(j, "max_iter");
    if (c.max_iter < 1) throw config_error("max_iter must be >= 1");
    if (j.contains("tol_grad")) c.tol_grad = get_number(j, "tol_grad");
    require_positive(c.tol_grad, "tol_grad");
    if (j.contains("tol_constraint")) c.tol_constraint = get_number(j, "tol_constraint");
    require_positive(c.tol_constraint, "tol_constraint");
    if (j.contains("step0")) c.step0 = get_number(j, "step0");
    require_positive(c.step0, "step0");
    if (j.contains("backtrack_factor")) c.backtrack_factor = get_number(j, "backtrack_factor");
    if (!(c.backtrack_factor > 0.0 && c.backtrack_factor < 1.0))
        throw config_error("backtrack_factor must lie in (0,1)");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("oracle_samples")) c.oracle_samples = get_int(j, "oracle_samples");
    if (c.oracle_samples < 16) throw config_error("oracle_samples must be >= 16");
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();

    materialize_exponents(c);
    return c;
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["version"] = c.version;
    j["command"] = command_name(c.command);
    j["domain"] = c.domain == DomainKind::disk ? "disk" : "rectangle";
    j["R"] = c.R;
    if (c.L) j["L"] = *c.L;
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    if (c.p) j["p"] = *c.p;
    if (c.q) j["q"] = *c.q;
    if (c.alpha) j["alpha"] = *c.alpha;
    if (c.beta) j["beta"] = *c.beta;
    if (c.gamma) j["gamma"] = *c.gamma;
    if (c.Qratio) j["Q"] = *c.Qratio;
    if (!c.p_schedule.empty()) j["p_schedule"] = c.p_schedule;
    j["max_iter"] = c.max_iter;
    j["tol_grad"] = c.tol_grad;
    j["tol_constraint"] = c.tol_constraint;
    j["step0"] = c.step0;
    j["backtrack_factor"] = c.backtrack_factor;
    j["seed"] = c.seed;
    j["oracle_samples"] = c.oracle_samples;
    j["out_dir"] = c.out_dir;
    return j.dump(2) + "\n";
}

GridDomain config_domain(const RunConfig& c) {
    if (c.domain == DomainKind::disk) return build_disk_grid(c.R, c.nx);
    return build_rectangle_grid(c.R, *c.L, c.nx, c.ny);
}

Exponents config_exponents(const RunConfig& c) {
    if (!c.p || !c.q || !c.alpha)
        throw config_error("config does not define a full exponent quadruple");
    return Exponents::make(*c.p, *c.q, *c.alpha);
}

SolverOptions config_solver_options(const RunConfig& c) {
    SolverOptions o;
    o.max_iter = c.max_iter;
    o.tol_grad = c.tol_grad;
    o.tol_constraint = c.tol_constraint;
    o.step0 = c.step0;
    o.backtrack_factor = c.backtrack_factor;
    o.seed = c.seed;
    return o;
}

LimitSpec config_limit_spec(const RunConfig& c) {
    if (!c.gamma || !c.Qratio) throw config_error("config does not define gamma and Q");
    LimitSpec s;
    s.gamma = *c.gamma;
    s.Q = *c.Qratio;
    s.R = c.R;
    if (c.domain == DomainKind::rectangle) s.L = c.L;
    return s;
}

} // namespace pqeig
