#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqeig/eigensolver.hpp"
#include "pqeig/exponents.hpp"
#include "pqeig/geometry.hpp"
#include "pqeig/infinity_limit.hpp"

namespace pqeig {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { solve, sweep, limit, oracle, residual };

const char* command_name(Command c);
Command command_from_name(const std::string& name);

/// Flat, strict-schema run configuration.  parse_config materializes every
/// default and derived exponent so the echoed form is self-contained.
struct RunConfig {
    int version = 1;
    Command command = Command::solve;

    DomainKind domain = DomainKind::disk;
    double R = 1.0;
    std::optional<double> L; // rectangle only
    int nx = 65;
    int ny = 65;

    // exponent spec: either (p, q, alpha) with beta derived, or (gamma, Q)
    // with p (solve) / p_schedule (sweep)
    std::optional<double> p, q, alpha, beta;
    std::optional<double> gamma, Qratio;
    std::vector<double> p_schedule;

    int max_iter = 5000;
    double tol_grad = 1e-6;
    double tol_constraint = 1e-8;
    double step0 = 0.25;
    double backtrack_factor = 0.5;
    std::uint64_t seed = 0;
    int oracle_samples = 2000;
    std::string out_dir = "out";

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& c);

GridDomain config_domain(const RunConfig& c);
Exponents config_exponents(const RunConfig& c);
SolverOptions config_solver_options(const RunConfig& c);
LimitSpec config_limit_spec(const RunConfig& c);

} // namespace pqeig
