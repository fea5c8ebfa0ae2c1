#include "pqeig/runner.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pqeig/calculus.hpp"
#include "pqeig/viscosity.hpp"

namespace pqeig {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw io_error("cannot create directory " + path.parent_path().string() +
                               ": " + ec.message());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw io_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                           ec.message());
}

namespace {

std::string grid_csv(const Field& f, const GridDomain& dom) {
    std::ostringstream os;
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (i) os << ',';
            os << format17(f[dom.idx(i, j)]);
        }
        os << '\n';
    }
    return os.str();
}

std::string domain_sidecar(const GridDomain& dom) {
    json j;
    j["kind"] = dom.kind == DomainKind::disk ? "disk" : "rectangle";
    j["R"] = dom.R;
    j["L"] = dom.L;
    j["nx"] = dom.nx;
    j["ny"] = dom.ny;
    j["hx"] = dom.hx;
    j["hy"] = dom.hy;
    j["interior_mask"] = std::vector<int>(dom.interior_mask.begin(), dom.interior_mask.end());
    j["boundary_mask"] = std::vector<int>(dom.boundary_mask.begin(), dom.boundary_mask.end());
    return j.dump() + "\n";
}

std::string sweep_csv(const SweepResult& sw) {
    std::ostringstream os;
    os << "p,q,alpha,beta,lambda,lambda_root_p,reference,rel_gap\n";
    for (const auto& r : sw.rows) {
        os << format17(r.p) << ',' << format17(r.q) << ',' << format17(r.alpha) << ','
           << format17(r.beta) << ',' << format17(r.lambda) << ','
           << format17(r.lambda_root_p) << ',';
        if (r.reference) os << format17(*r.reference);
        os << ',';
        if (r.rel_gap) os << format17(*r.rel_gap);
        os << '\n';
    }
    return os.str();
}

json config_echo(const RunConfig& cfg) { return json::parse(serialize_config(cfg)); }

void note(bool quiet, const std::string& msg) {
    if (!quiet) std::cerr << "[pqeig] " << msg << "\n";
}

int run_solve(const RunConfig& cfg, const fs::path& out, bool quiet) {
    const GridDomain dom = config_domain(cfg);
    const Exponents e = config_exponents(cfg);
    const SolverOptions opts = config_solver_options(cfg);
    note(quiet, "solve: " + std::string(cfg.domain == DomainKind::disk ? "disk" : "rectangle") +
                    " " + std::to_string(cfg.nx) + "x" + std::to_string(cfg.ny) +
                    ", p = " + format17(e.p) + ", q = " + format17(e.q));
    const EigenResult res = solve_first_eigenpair(dom, e, opts);

    json j;
    j["lambda"] = res.lambda;
    j["lambda_root_p"] = res.lambda_root_p;
    j["iterations"] = res.iterations;
    j["constraint_residual"] = res.constraint_residual;
    j["el_residual_u"] = res.el_residual_u;
    j["el_residual_v"] = res.el_residual_v;
    j["config_echo"] = config_echo(cfg);
    atomic_write(out / "result.json", j.dump(2) + "\n");
    atomic_write(out / "u.csv", grid_csv(res.fields.u, dom));
    atomic_write(out / "v.csv", grid_csv(res.fields.v, dom));
    atomic_write(out / "domain.json", domain_sidecar(dom));
    note(quiet, "lambda = " + format17(res.lambda) + ", lambda^(1/p) = " +
                    format17(res.lambda_root_p) + " (" + std::to_string(res.iterations) +
                    " iterations)");
    return exit_ok;
}

int run_sweep(const RunConfig& cfg, const fs::path& out, bool quiet) {
    const GridDomain dom = config_domain(cfg);
    const LimitSpec spec = config_limit_spec(cfg);
    const SolverOptions opts = config_solver_options(cfg);
    note(quiet, "sweep over " + std::to_string(cfg.p_schedule.size()) + " exponent rows");
    const SweepResult sw = continuation_sweep(dom, spec, cfg.p_schedule, opts);
    atomic_write(out / "sweep.csv", sweep_csv(sw));
    if (!sw.completed) {
        std::cerr << "[pqeig] sweep aborted: " << sw.error << " (partial rows written)\n";
        return exit_stagnation;
    }
    note(quiet, "sweep complete, " + std::to_string(sw.rows.size()) + " rows");
    return exit_ok;
}

int run_limit(const RunConfig& cfg, const fs::path& out, bool quiet) {
    const LimitSpec spec = config_limit_spec(cfg);
    json j;
    j["gamma"] = spec.gamma;
    j["Q"] = spec.Q;
    j["R"] = spec.R;
    if (spec.is_rectangle()) {
        const RectangleLimit rl = lambda_inf_rectangle(spec);
        j["kind"] = "rectangle";
        j["L"] = *spec.L;
        j["value"] = rl.value;
        j["branch"] = rl.branch;
        j["threshold"] = rl.threshold;
    } else {
        j["kind"] = "disk";
        j["value"] = lambda_inf_ball(spec);
        j["branch"] = 1;
    }
    j["config_echo"] = config_echo(cfg);
    atomic_write(out / "limit.json", j.dump(2) + "\n");
    note(quiet, "limit value = " + format17(j["value"].get<double>()));
    return exit_ok;
}

int run_oracle(const RunConfig& cfg, const fs::path& out, bool quiet) {
    LimitSpec spec = config_limit_spec(cfg);
    spec.L = cfg.L; // oracle is rectangle-only
    const RectangleLimit rl = lambda_inf_rectangle(spec);
    const AnsatzOracle oracle = ansatz_oracle_rectangle(spec, cfg.oracle_samples);
    const bool agree = std::abs(rl.value - oracle.lambda) <= 1e-4 * std::abs(rl.value);

    json j;
    j["closed_form_value"] = rl.value;
    j["oracle_value"] = oracle.lambda;
    j["branch"] = rl.branch;
    j["threshold"] = rl.threshold;
    j["agreement"] = agree;
    json a;
    a["a"] = oracle.best.a;
    a["rho"] = oracle.best.rho;
    a["k1"] = oracle.best.k1;
    a["k2"] = oracle.best.k2;
    a["M"] = oracle.best.M;
    a["touch_s"] = oracle.best.touch_s;
    j["ansatz"] = a;
    j["config_echo"] = config_echo(cfg);
    atomic_write(out / "oracle.json", j.dump(2) + "\n");
    note(quiet, "closed form = " + format17(rl.value) + ", ansatz search = " +
                    format17(oracle.lambda) + (agree ? " (agree)" : " (disagree)"));
    return exit_ok;
}

int run_residual(const RunConfig& cfg, const fs::path& out, bool quiet) {
    const GridDomain dom = config_domain(cfg);
    const LimitSpec spec = config_limit_spec(cfg);
    const double lam = spec.is_rectangle() ? lambda_inf_rectangle(spec).value
                                           : lambda_inf_ball(spec);
    const AnsatzConfig c = ansatz_for(spec, cfg.oracle_samples);
    const Field u = sample_cone(c, spec, dom);
    const Field v = sample_plane(c, dom);
    const ResidualReport h = h_infinity_residual(u, v, lam, spec, dom);
    const ResidualReport f = f_infinity_residual(v, u, lam, spec, dom);

    json j;
    j["lambda_inf"] = lam;
    auto block = [](const ResidualReport& r) {
        json b;
        b["sup_defect"] = r.sup_defect;
        b["boundary_sup_defect"] = r.boundary_sup_defect;
        b["excluded_radius"] = r.excluded_radius;
        return b;
    };
    j["h_inf"] = block(h);
    j["f_inf"] = block(f);
    j["config_echo"] = config_echo(cfg);
    atomic_write(out / "residual.json", j.dump(2) + "\n");
    atomic_write(out / "h_residual.csv", grid_csv(h.residual, dom));
    atomic_write(out / "f_residual.csv", grid_csv(f.residual, dom));
    atomic_write(out / "u.csv", grid_csv(u, dom));
    atomic_write(out / "v.csv", grid_csv(v, dom));
    atomic_write(out / "domain.json", domain_sidecar(dom));
    note(quiet, "residual sup defects: h_inf = " + format17(h.sup_defect) +
                    ", f_inf = " + format17(f.sup_defect));
    return exit_ok;
}

} // namespace

int run_command(RunConfig cfg, const std::optional<std::string>& out_override,
                const std::optional<std::uint64_t>& seed_override, bool quiet) {
    try {
        if (out_override) cfg.out_dir = *out_override;
        if (seed_override) cfg.seed = *seed_override;
        const fs::path out = cfg.out_dir;
        switch (cfg.command) {
            case Command::solve: return run_solve(cfg, out, quiet);
            case Command::sweep: return run_sweep(cfg, out, quiet);
            case Command::limit: return run_limit(cfg, out, quiet);
            case Command::oracle: return run_oracle(cfg, out, quiet);
            case Command::residual: return run_residual(cfg, out, quiet);
        }
        return exit_config;
    } catch (const config_error& ex) {
        std::cerr << "[pqeig] config error: " << ex.what() << "\n";
        return exit_config;
    } catch (const stagnation_error& ex) {
        std::cerr << "[pqeig] solver stagnation: " << ex.what() << "\n";
        return exit_stagnation;
    } catch (const io_error& ex) {
        std::cerr << "[pqeig] i/o error: " << ex.what() << "\n";
        return exit_io;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "[pqeig] invalid input: " << ex.what() << "\n";
        return exit_config;
    } catch (const std::exception& ex) {
        std::cerr << "[pqeig] error: " << ex.what() << "\n";
        return exit_io;
    }
}

int run_from_text(const std::string& config_text, Command expected,
                  const std::optional<std::string>& out_override,
                  const std::optional<std::uint64_t>& seed_override, bool quiet) {
    RunConfig cfg;
    try {
        cfg = parse_config(config_text);
        if (cfg.command != expected)
            throw config_error(std::string("config command '") + command_name(cfg.command) +
                               "' does not match the invoked subcommand '" +
                               command_name(expected) + "'");
    } catch (const config_error& ex) {
        std::cerr << "[pqeig] config error: " << ex.what() << "\n";
        return exit_config;
    }
    return run_command(cfg, out_override, seed_override, quiet);
}

} // namespace pqeig
