// modeflow — command-line driver for the certified spectral toolkit.
//
// Subcommands: verify-lemmas, solve, feasibility, constants, export.
// Exit status: 0 all checks pass / solve converged, 1 hard or check failure,
// 2 usage or configuration error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "modeflow/field_ops.hpp"
#include "modeflow/picard.hpp"
#include "modeflow/serialization.hpp"
#include "modeflow/theorem_constants.hpp"
#include "modeflow/verify_suites.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace modeflow;

constexpr const char* kConfigSchema = "modeflow/config/v1";
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Configuration problems exit with status 2; anything thrown past them is a
/// hard failure and exits with status 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string slurp(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(std::string(what) + ": cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string digest_of(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// --- config reading -------------------------------------------------------

void expect_keys(const Json& object, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    for (const auto& item : object.items()) {
        bool known = false;
        for (const char* key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) fail(where + ": unknown key \"" + item.key() + "\"");
    }
}

const Json* get(const Json& object, const char* key) {
    const auto it = object.find(key);
    return it == object.end() || it->is_null() ? nullptr : &*it;
}

double as_double(const Json& v, const std::string& where) {
    if (!v.is_number()) fail(where + ": expected a number");
    return v.get<double>();
}

int as_int(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where + ": expected an integer");
    return v.get<int>();
}

bool as_bool(const Json& v, const std::string& where) {
    if (!v.is_boolean()) fail(where + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
    if (!v.is_string()) fail(where + ": expected a string");
    return v.get<std::string>();
}

/// Parsed configuration document plus the directory its relative paths
/// resolve against (the config file's own directory, or the working
/// directory when no config was given).
struct Config {
    Json doc = Json::object();
    std::filesystem::path base = ".";

    const Json* section(const char* name) const { return get(doc, name); }

    std::filesystem::path resolve(const std::string& relative) const {
        const std::filesystem::path p(relative);
        return p.is_absolute() ? p : base / p;
    }
};

/// Every section is key-checked up front, whether or not the chosen command
/// reads it: a typo in a tolerance name must never be ignored.
void validate_config_keys(const Json& doc) {
    expect_keys(doc, "config",
                {"schema", "command", "seed", "out", "format", "verify-lemmas", "solve",
                 "feasibility", "constants", "export"});
    if (const Json* v = get(doc, "verify-lemmas")) {
        expect_keys(*v, "verify-lemmas",
                    {"suites", "lemma35_instances", "closure_instances", "census_max_dim",
                     "census_max_entry", "override_neg1_double_factorial"});
    }
    if (const Json* v = get(doc, "solve")) {
        expect_keys(*v, "solve",
                    {"problem", "max_iter", "tol", "truncation_cap", "mode_box", "time_grid"});
    }
    if (const Json* v = get(doc, "feasibility")) {
        expect_keys(*v, "feasibility",
                    {"mode", "n", "nu", "kappa", "coupling", "C", "D", "constants", "expansions",
                     "sweep", "problem"});
    }
    if (const Json* v = get(doc, "constants")) {
        expect_keys(*v, "constants",
                    {"n", "nu", "kappa", "coupling", "C", "D", "constants", "expansions"});
    }
    if (const Json* v = get(doc, "export")) {
        expect_keys(*v, "export", {"report", "selector"});
    }
}

Config load_config(const std::optional<std::string>& path, const std::string& command) {
    Config config;
    if (!path) return config;

    std::error_code ec;
    if (!std::filesystem::exists(*path, ec)) fail("config file not found: " + *path);
    const std::string text = slurp(*path, "config");
    try {
        config.doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }
    if (!config.doc.is_object()) fail("config: expected a JSON object");

    validate_config_keys(config.doc);
    const Json* schema = get(config.doc, "schema");
    if (!schema || as_string(*schema, "config.schema") != kConfigSchema) {
        fail(std::string("config: expected schema \"") + kConfigSchema + "\"");
    }
    if (const Json* declared = get(config.doc, "command")) {
        if (as_string(*declared, "config.command") != command) {
            fail("config.command \"" + as_string(*declared, "config.command") +
                 "\" does not match the invoked subcommand \"" + command + "\"");
        }
    }
    config.base = std::filesystem::path(*path).parent_path();
    if (config.base.empty()) config.base = ".";
    return config;
}

// --- flag/config merge ----------------------------------------------------

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iter;
    std::optional<double> tol;
    std::optional<int> mode_box;
    std::optional<std::string> time_grid;
    std::optional<std::string> format;
};

std::optional<std::string> choose_out(const Config& config, const Overrides& flags) {
    if (flags.out) return flags.out;
    if (const Json* v = get(config.doc, "out")) return as_string(*v, "config.out");
    return std::nullopt;
}

std::string choose_format(const Config& config, const Overrides& flags,
                          const std::string& fallback) {
    std::string format = fallback;
    if (const Json* v = get(config.doc, "format")) format = as_string(*v, "config.format");
    if (flags.format) format = *flags.format;
    if (format != "json" && format != "csv") {
        fail("format must be \"json\" or \"csv\", got \"" + format + "\"");
    }
    return format;
}

void write_output(const std::string& text, const std::optional<std::string>& out) {
    if (!out) {
        std::cout << text;
        return;
    }
    std::ofstream file(*out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file " + *out);
    file << text;
    if (!file.good()) throw std::runtime_error("failed writing output file " + *out);
}

int exit_code_for(const RunReport& report) {
    for (const CheckRecord& check : report.checks) {
        if (!check.passed) return 1;
    }
    return 0;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// --- verify-lemmas ----------------------------------------------------------

int run_verify(const Config& config, const Overrides& flags) {
    const auto start = std::chrono::steady_clock::now();
    if (choose_format(config, flags, "json") != "json") {
        fail("verify-lemmas emits no iteration series; use --format json");
    }

    VerifyOptions options;
    if (const Json* section = config.section("verify-lemmas")) {
        if (const Json* v = get(*section, "suites")) {
            if (!v->is_array()) fail("verify-lemmas.suites: expected an array");
            options.suites.clear();
            for (const Json& item : *v) {
                const std::string name = as_string(item, "verify-lemmas.suites");
                if (name != "lemma32" && name != "lemma33" && name != "lemma35" &&
                    name != "class-closure") {
                    fail("verify-lemmas.suites: unknown suite \"" + name + "\"");
                }
                options.suites.push_back(name);
            }
        }
        if (const Json* v = get(*section, "lemma35_instances")) {
            options.lemma35_instances = as_int(*v, "verify-lemmas.lemma35_instances");
            if (options.lemma35_instances <= 0) fail("verify-lemmas.lemma35_instances: must be positive");
        }
        if (const Json* v = get(*section, "closure_instances")) {
            options.closure_instances = as_int(*v, "verify-lemmas.closure_instances");
            if (options.closure_instances <= 0) fail("verify-lemmas.closure_instances: must be positive");
        }
        if (const Json* v = get(*section, "census_max_dim")) {
            options.lemma33_max_dim = as_int(*v, "verify-lemmas.census_max_dim");
            if (options.lemma33_max_dim < 1) fail("verify-lemmas.census_max_dim: must be >= 1");
        }
        if (const Json* v = get(*section, "census_max_entry")) {
            options.lemma33_max_entry = as_int(*v, "verify-lemmas.census_max_entry");
            if (options.lemma33_max_entry < 0) fail("verify-lemmas.census_max_entry: must be >= 0");
        }
        if (const Json* v = get(*section, "override_neg1_double_factorial")) {
            options.override_neg1_double_factorial =
                as_bool(*v, "verify-lemmas.override_neg1_double_factorial");
        }
    }
    if (const Json* v = get(config.doc, "seed")) {
        options.seed = static_cast<std::uint64_t>(as_int(*v, "config.seed"));
    }
    if (flags.seed) options.seed = *flags.seed;

    RunReport report;
    report.command = "verify-lemmas";
    report.input_digest = digest_of(flags.config ? slurp(*flags.config, "config") : "");
    report.checks = run_verify_suites(options);
    report.wall_ms = elapsed_ms(start);
    write_output(write_report(report), choose_out(config, flags));
    return exit_code_for(report);
}

// --- solve ------------------------------------------------------------------

Trajectory resample(const Trajectory& values, const TimeGrid& from, const TimeGrid& to) {
    Trajectory out(to.size());
    for (std::size_t i = 0; i < to.size(); ++i) {
        const double t = to[i];
        std::size_t hi = 1;
        while (hi + 1 < from.size() && from[hi] < t) ++hi;
        const double t0 = from[hi - 1], t1 = from[hi];
        const double w = (t - t0) / (t1 - t0);
        out[i] = values[hi - 1] * (1.0 - w) + values[hi] * w;
    }
    return out;
}

Field resample_field(const Field& field, const TimeGrid& grid) {
    if (field.is_spatial()) return field;
    Field out(field.geometry(), grid, field.mode_box(), field.real_valued());
    for (const auto& [mode, traj] : field.coefficients()) {
        out.set(mode, resample(traj, *field.time_grid(), grid));
    }
    return out;
}

VectorField resample_vector(const VectorField& v, const TimeGrid& grid) {
    std::vector<Field> components;
    components.reserve(v.components().size());
    for (const Field& comp : v.components()) components.push_back(resample_field(comp, grid));
    return VectorField(std::move(components));
}

Field rebox_field(const Field& field, const ModeBox& box) {
    Field out = field.is_spatial() ? Field(field.geometry(), box, field.real_valued())
                                   : Field(field.geometry(), *field.time_grid(), box,
                                           field.real_valued());
    for (const auto& [mode, traj] : field.coefficients()) {
        out.set(mode, traj);
    }
    return out;
}

VectorField rebox_vector(const VectorField& v, const ModeBox& box) {
    std::vector<Field> components;
    components.reserve(v.components().size());
    for (const Field& comp : v.components()) components.push_back(rebox_field(comp, box));
    return VectorField(std::move(components));
}

TorusProblem rebuild(const TorusProblem& problem) {
    if (problem.kind == ProblemKind::NavierStokes) {
        return make_ns_problem(problem.geometry, problem.physics, problem.phi, problem.f,
                               problem.x0, problem.p0, problem.condition_C, problem.ball_tail);
    }
    return make_boussinesq_problem(problem.geometry, problem.physics, problem.phi, problem.eta,
                                   problem.f, problem.g, problem.x0, problem.p0,
                                   problem.condition_C, problem.ball_tail);
}

TorusProblem apply_time_grid_override(TorusProblem problem, const std::string& spec) {
    double t_max = 0.0;
    int intervals = 0;
    char trailing = 0;
    if (std::sscanf(spec.c_str(), "%lf,%d%c", &t_max, &intervals, &trailing) != 2) {
        fail("--time-grid expects \"T_max,M\", got \"" + spec + "\"");
    }
    if (!(t_max > 0.0) || intervals < 1) {
        fail("--time-grid: T_max must be positive and M >= 1");
    }
    if (t_max > problem.grid.t_max()) {
        fail("--time-grid: T_max " + fmt(t_max) + " exceeds the problem horizon " +
             fmt(problem.grid.t_max()) + " (interpolation only, no extrapolation)");
    }
    const TimeGrid grid = TimeGrid::uniform(t_max, intervals);

    Trajectory anchor(problem.p0.size());
    for (std::size_t i = 0; i < problem.p0.size(); ++i) anchor[i] = Complex(problem.p0[i], 0.0);
    const Trajectory new_anchor = resample(anchor, problem.grid, grid);
    problem.p0.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) problem.p0[i] = new_anchor[i].real();

    problem.f = resample_vector(problem.f, grid);
    problem.g = resample_vector(problem.g, grid);
    problem.grid = grid;
    return rebuild(problem);
}

TorusProblem apply_mode_box_override(TorusProblem problem, int radius) {
    if (radius < 0) fail("--mode-box: radius must be >= 0");
    const ModeBox box = ModeBox::cube(problem.geometry.n(), radius);
    try {
        problem.phi = rebox_vector(problem.phi, box);
        problem.eta = rebox_vector(problem.eta, box);
        problem.f = rebox_vector(problem.f, box);
        problem.g = rebox_vector(problem.g, box);
    } catch (const std::invalid_argument& e) {
        fail(std::string("--mode-box: the override drops data modes (") + e.what() + ")");
    }
    problem.box = box;
    return rebuild(problem);
}

/// The advection truncation loss of one application at the given velocity
/// (and density), i.e. the l1 mass the product pushes past the mode box.
double advection_loss(const TorusProblem& problem, const VectorField& u,
                      const std::optional<VectorField>& rho) {
    double loss = 0.0;
    const int n = problem.geometry.n();
    for (int k = 1; k <= n; ++k) {
        for (int j = 1; j <= n; ++j) {
            loss += convolve(u.component(j), partial_derivative(u.component(k), j), problem.box)
                        .truncation_loss;
            if (rho) {
                loss += convolve(u.component(j), partial_derivative(rho->component(k), j),
                                 problem.box)
                            .truncation_loss;
            }
        }
    }
    return loss;
}

int run_solve(const Config& config, const Overrides& flags) {
    const auto start = std::chrono::steady_clock::now();
    const std::string format = choose_format(config, flags, "json");
    const Json* section = config.section("solve");
    if (!section) fail("solve requires a config with a \"solve\" section");
    const Json* problem_key = get(*section, "problem");
    if (!problem_key) fail("solve: missing \"problem\" (path to the problem document)");
    const std::filesystem::path problem_path =
        config.resolve(as_string(*problem_key, "solve.problem"));
    std::error_code ec;
    if (!std::filesystem::exists(problem_path, ec)) {
        fail("solve: problem document not found: " + problem_path.string());
    }

    int max_iter = 50;
    double tol = 1e-8;
    double truncation_cap = kInf;
    if (const Json* v = get(*section, "max_iter")) max_iter = as_int(*v, "solve.max_iter");
    if (const Json* v = get(*section, "tol")) tol = as_double(*v, "solve.tol");
    if (const Json* v = get(*section, "truncation_cap")) {
        truncation_cap = as_double(*v, "solve.truncation_cap");
    }
    if (flags.max_iter) max_iter = *flags.max_iter;
    if (flags.tol) tol = *flags.tol;
    if (max_iter < 1) fail("solve: max_iter must be >= 1");
    if (!(tol > 0.0)) fail("solve: tol must be positive");

    const std::string problem_bytes = slurp(problem_path, "solve");
    TorusProblem problem = read_problem(problem_bytes);

    std::optional<std::string> time_grid = flags.time_grid;
    if (!time_grid) {
        if (const Json* v = get(*section, "time_grid")) {
            time_grid = as_string(*v, "solve.time_grid");
        }
    }
    if (time_grid) problem = apply_time_grid_override(std::move(problem), *time_grid);
    std::optional<int> mode_box = flags.mode_box;
    if (!mode_box) {
        if (const Json* v = get(*section, "mode_box")) mode_box = as_int(*v, "solve.mode_box");
    }
    if (mode_box) problem = apply_mode_box_override(std::move(problem), *mode_box);

    RunReport report;
    report.command = "solve";
    report.input_digest = digest_of(problem_bytes);

    // The smallness condition comes first: against the requested radius when
    // the problem names one, otherwise as the existence question for the
    // feasible radius interval (margin 1/(8 kappa' A), infinite for A = 0).
    const double kappa_prime = t42_kappa_prime(problem.geometry, problem.physics.nu);
    const double data_norm = t42_data_norm(problem);
    if (problem.condition_C) {
        const ConditionCheck condition = check_condition_t42(problem, *problem.condition_C);
        CheckRecord record;
        record.name = "condition/t42";
        record.passed = condition.holds;
        record.margin = condition.margin;
        record.details = "C = " + fmt(*problem.condition_C) + ", kappa' = " +
                         fmt(condition.kappa_prime) + ", A = " + fmt(condition.data_norm);
        report.checks.push_back(record);
        report.condition_margin = condition.margin;
    } else {
        const auto interval = feasible_C_interval(problem);
        const double margin = data_norm == 0.0 ? kInf : 1.0 / (8.0 * kappa_prime * data_norm);
        CheckRecord record;
        record.name = "condition/feasible-interval";
        record.passed = interval.has_value();
        record.margin = margin;
        record.details = interval ? "feasible C in (" + fmt(interval->first) + ", " +
                                        fmt(interval->second) + ")"
                                  : "EMPTY: 1 - 8 kappa' A = " +
                                        fmt(1.0 - 8.0 * kappa_prime * data_norm) + " <= 0";
        report.checks.push_back(record);
        report.condition_margin = margin;
    }

    const FixedPointReport fixed_point =
        iterate(problem, initial_state(problem), max_iter, tol, truncation_cap);
    report.iterations = fixed_point.records;
    report.final_residual = fixed_point.final_residual;
    switch (fixed_point.verdict) {
        case Verdict::Converged: report.verdict = "converged"; break;
        case Verdict::MaxIterations: report.verdict = "max_iterations"; break;
        case Verdict::Diverged: report.verdict = "diverged"; break;
    }

    // Ship the reconstruction of the final iterate (one more application
    // caches u, rho, p for exactly the state we report).
    const IterationState reconstructed = apply_T(problem, fixed_point.final_state);
    SolveSolution solution;
    solution.u = *reconstructed.u;
    solution.p = *reconstructed.p;
    if (problem.kind == ProblemKind::Boussinesq) solution.rho = reconstructed.rho;
    solution.h = fixed_point.final_state.h;
    solution.r = fixed_point.final_state.r;
    report.solution = std::move(solution);

    const double loss = advection_loss(problem, *reconstructed.u, reconstructed.rho);
    if (loss > 0.0) {
        report.warnings.push_back("advection truncation loss " + fmt(loss) +
                                  " outside the mode box at the final state");
    }
    if (fixed_point.verdict == Verdict::Converged &&
        fixed_point.final_residual > 0.5 * tol) {
        report.warnings.push_back("final residual " + fmt(fixed_point.final_residual) +
                                  " within 2x of the tolerance " + fmt(tol));
    }
    double max_divergence = 0.0;
    for (const IterationRecord& rec : report.iterations) {
        max_divergence = std::max(max_divergence, rec.max_divergence);
    }
    if (max_divergence > 1e-12) {
        report.warnings.push_back("divergence mode magnitude reached " + fmt(max_divergence));
    }

    report.wall_ms = elapsed_ms(start);
    write_output(format == "csv" ? emit_csv_series(report, "residuals") : write_report(report),
                 choose_out(config, flags));
    return fixed_point.verdict == Verdict::Converged ? 0 : 1;
}

// --- feasibility / constants ------------------------------------------------

ConstantBounds component_bounds(const Json& list, const std::string& where, int j) {
    if (!list.is_array() || list.empty()) fail(where + ": expected a nonempty array");
    ConstantBounds bounds;
    for (const Json& item : list) {
        if (!item.is_object()) fail(where + ": expected expansion objects");
        expect_keys(item, where, {"b", "n", "terms"});
        GaussianExpansion expansion;
        if (const Json* v = get(item, "b")) expansion.b = as_double(*v, where + ".b");
        const Json* dim = get(item, "n");
        if (!dim) fail(where + ": missing n");
        expansion.n = as_int(*dim, where + ".n");
        if (const Json* terms = get(item, "terms")) {
            if (!terms->is_array()) fail(where + ".terms: expected an array");
            for (const Json& term : *terms) {
                expect_keys(term, where + ".terms", {"beta", "coefficient"});
                const Json* beta = get(term, "beta");
                const Json* coefficient = get(term, "coefficient");
                if (!beta || !coefficient) fail(where + ".terms: need beta and coefficient");
                if (!beta->is_array()) fail(where + ".terms.beta: expected an array");
                std::vector<int32_t> entries;
                for (const Json& e : *beta) {
                    entries.push_back(static_cast<int32_t>(as_int(e, where + ".terms.beta")));
                }
                expansion.terms[Mode(entries)] =
                    as_double(*coefficient, where + ".terms.coefficient");
            }
        }
        const ConstantBounds piece = data_constants(expansion, j); // throws past config phase
        bounds.C = std::max(bounds.C, piece.C);
        bounds.D = std::max(bounds.D, piece.D);
    }
    return bounds;
}

DataConstants read_data_constants(const Json& section, const std::string& where) {
    const Json* direct = get(section, "constants");
    const Json* expansions = get(section, "expansions");
    if (direct && expansions) fail(where + ": give either constants or expansions, not both");

    DataConstants data;
    if (direct) {
        expect_keys(*direct, where + ".constants",
                    {"C_phi0", "C_phi1", "C_eta0", "C_eta1", "C_f0", "C_g0", "D_phi0", "D_phi1",
                     "D_eta0", "D_eta1", "D_f0", "D_g0"});
        const auto read = [&](const char* key, double& slot) {
            if (const Json* v = get(*direct, key)) {
                slot = as_double(*v, where + ".constants." + key);
            }
        };
        read("C_phi0", data.C_phi0);
        read("C_phi1", data.C_phi1);
        read("C_eta0", data.C_eta0);
        read("C_eta1", data.C_eta1);
        read("C_f0", data.C_f0);
        read("C_g0", data.C_g0);
        read("D_phi0", data.D_phi0);
        read("D_phi1", data.D_phi1);
        read("D_eta0", data.D_eta0);
        read("D_eta1", data.D_eta1);
        read("D_f0", data.D_f0);
        read("D_g0", data.D_g0);
    } else if (expansions) {
        expect_keys(*expansions, where + ".expansions", {"phi", "eta", "f", "g"});
        if (const Json* v = get(*expansions, "phi")) {
            const ConstantBounds b0 = component_bounds(*v, where + ".expansions.phi", 0);
            const ConstantBounds b1 = component_bounds(*v, where + ".expansions.phi", 1);
            data.C_phi0 = b0.C;
            data.D_phi0 = b0.D;
            data.C_phi1 = b1.C;
            data.D_phi1 = b1.D;
        }
        if (const Json* v = get(*expansions, "eta")) {
            const ConstantBounds b0 = component_bounds(*v, where + ".expansions.eta", 0);
            const ConstantBounds b1 = component_bounds(*v, where + ".expansions.eta", 1);
            data.C_eta0 = b0.C;
            data.D_eta0 = b0.D;
            data.C_eta1 = b1.C;
            data.D_eta1 = b1.D;
        }
        if (const Json* v = get(*expansions, "f")) {
            const ConstantBounds b0 = component_bounds(*v, where + ".expansions.f", 0);
            data.C_f0 = b0.C;
            data.D_f0 = b0.D;
        }
        if (const Json* v = get(*expansions, "g")) {
            const ConstantBounds b0 = component_bounds(*v, where + ".expansions.g", 0);
            data.C_g0 = b0.C;
            data.D_g0 = b0.D;
        }
    }
    return data;
}

PhysicsParams read_physics(const Json& section, const std::string& where) {
    const Json* nu = get(section, "nu");
    const Json* kappa = get(section, "kappa");
    if (!nu || !kappa) fail(where + ": nu and kappa are required");
    std::vector<std::vector<double>> coupling;
    if (const Json* v = get(section, "coupling")) {
        if (!v->is_array()) fail(where + ".coupling: expected an array of rows");
        for (const Json& row : *v) {
            if (!row.is_array()) fail(where + ".coupling: expected an array of rows");
            std::vector<double> entries;
            for (const Json& e : row) entries.push_back(as_double(e, where + ".coupling"));
            coupling.push_back(std::move(entries));
        }
    }
    return make_physics_params(as_double(*nu, where + ".nu"), as_double(*kappa, where + ".kappa"),
                               coupling);
}

double required_double(const Json& section, const char* key, const std::string& where) {
    const Json* v = get(section, key);
    if (!v) fail(where + ": missing \"" + key + "\"");
    return as_double(*v, where + "." + key);
}

int required_int(const Json& section, const char* key, const std::string& where) {
    const Json* v = get(section, key);
    if (!v) fail(where + ": missing \"" + key + "\"");
    return as_int(*v, where + "." + key);
}

int run_feasibility(const Config& config, const Overrides& flags) {
    const auto start = std::chrono::steady_clock::now();
    if (choose_format(config, flags, "json") != "json") {
        fail("feasibility emits no iteration series; use --format json");
    }
    const Json* section = config.section("feasibility");
    if (!section) fail("feasibility requires a config with a \"feasibility\" section");
    const Json* mode_key = get(*section, "mode");
    if (!mode_key) fail("feasibility: missing \"mode\"");
    const std::string mode = as_string(*mode_key, "feasibility.mode");

    RunReport report;
    report.command = "feasibility";
    report.input_digest = digest_of(flags.config ? slurp(*flags.config, "config") : "");

    if (mode == "boussinesq_rn") {
        const int n = required_int(*section, "n", "feasibility");
        const PhysicsParams physics = read_physics(*section, "feasibility");
        const DataConstants data = read_data_constants(*section, "feasibility");
        FeasibilitySweep sweep;
        if (const Json* v = get(*section, "sweep")) {
            expect_keys(*v, "feasibility.sweep", {"lo", "hi", "points_per_decade", "bisection_steps"});
            if (const Json* w = get(*v, "lo")) sweep.lo = as_double(*w, "feasibility.sweep.lo");
            if (const Json* w = get(*v, "hi")) sweep.hi = as_double(*w, "feasibility.sweep.hi");
            if (const Json* w = get(*v, "points_per_decade")) {
                sweep.points_per_decade = as_int(*w, "feasibility.sweep.points_per_decade");
            }
            if (const Json* w = get(*v, "bisection_steps")) {
                sweep.bisection_steps = as_int(*w, "feasibility.sweep.bisection_steps");
            }
        }
        const FeasibilityResult result = feasibility_search(data, physics, n, sweep);
        CheckRecord record;
        record.name = "feasibility/witness";
        record.passed = result.found;
        record.margin = result.margin;
        record.details = (result.found ? "witness C = " : "closest approach C = ") +
                         fmt(result.C) + ", D = " + fmt(result.D) + ", M = " +
                         fmt(result.constants.M) + ", N = " + fmt(result.constants.N) +
                         ", violation = " + fmt(result.violation);
        report.checks.push_back(record);
    } else if (mode == "ns_rn") {
        const int n = required_int(*section, "n", "feasibility");
        const double nu = required_double(*section, "nu", "feasibility");
        const double C = required_double(*section, "C", "feasibility");
        const double D = required_double(*section, "D", "feasibility");
        const DataConstants data = read_data_constants(*section, "feasibility");
        const NsConditionCheck check = ns_rn_condition(C, D, data, nu, n);
        CheckRecord first;
        first.name = "feasibility/ns-first";
        first.passed = check.first_holds;
        first.margin = check.first_margin;
        first.details = "D-side inequality, rhs (2pi)^n D / n";
        report.checks.push_back(first);
        CheckRecord second;
        second.name = "feasibility/ns-second";
        second.passed = check.second_holds;
        second.margin = check.second_margin;
        second.details = "C-side inequality, rhs (2pi)^n C / n";
        report.checks.push_back(second);
    } else if (mode == "torus_interval") {
        const Json* problem_key = get(*section, "problem");
        if (!problem_key) fail("feasibility: torus_interval needs \"problem\"");
        const std::filesystem::path path =
            config.resolve(as_string(*problem_key, "feasibility.problem"));
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) {
            fail("feasibility: problem document not found: " + path.string());
        }
        const std::string bytes = slurp(path, "feasibility");
        const TorusProblem problem = read_problem(bytes);
        report.input_digest = digest_of(bytes);

        const auto interval = feasible_C_interval(problem);
        const double kappa_prime = t42_kappa_prime(problem.geometry, problem.physics.nu);
        const double data_norm = t42_data_norm(problem);
        const double margin = data_norm == 0.0 ? kInf : 1.0 / (8.0 * kappa_prime * data_norm);
        CheckRecord record;
        record.name = "feasibility/c-interval";
        record.passed = interval.has_value();
        record.margin = margin;
        record.details = interval ? "feasible C in (" + fmt(interval->first) + ", " +
                                        fmt(interval->second) + "); kappa' = " + fmt(kappa_prime) +
                                        ", A = " + fmt(data_norm)
                                  : "EMPTY: kappa' = " + fmt(kappa_prime) + ", A = " +
                                        fmt(data_norm) + ", 1 - 8 kappa' A <= 0";
        report.checks.push_back(record);
        report.condition_margin = margin;
    } else {
        fail("feasibility.mode must be boussinesq_rn, ns_rn, or torus_interval, got \"" + mode +
             "\"");
    }

    report.wall_ms = elapsed_ms(start);
    write_output(write_report(report), choose_out(config, flags));
    return exit_code_for(report);
}

int run_constants(const Config& config, const Overrides& flags) {
    const auto start = std::chrono::steady_clock::now();
    if (choose_format(config, flags, "json") != "json") {
        fail("constants emits no iteration series; use --format json");
    }
    const Json* section = config.section("constants");
    if (!section) fail("constants requires a config with a \"constants\" section");

    const int n = required_int(*section, "n", "constants");
    const double C = required_double(*section, "C", "constants");
    const double D = required_double(*section, "D", "constants");
    const PhysicsParams physics = read_physics(*section, "constants");
    const DataConstants data = read_data_constants(*section, "constants");

    const Theorem41Constants constants = theorem41_constants(C, D, data, physics, n);

    RunReport report;
    report.command = "constants";
    report.input_digest = digest_of(flags.config ? slurp(*flags.config, "config") : "");
    CheckRecord m_record;
    m_record.name = "constants/M-bound";
    m_record.passed = constants.M < C;
    m_record.margin = constants.M == 0.0 ? kInf : C / constants.M;
    m_record.details = "M = " + fmt(constants.M) + " vs C = " + fmt(C) + "; M0 = " +
                       fmt(constants.M0) + ", M1 = " + fmt(constants.M1) + ", M' = " +
                       fmt(constants.Mprime);
    report.checks.push_back(m_record);
    CheckRecord n_record;
    n_record.name = "constants/N-bound";
    n_record.passed = constants.N < D;
    n_record.margin = constants.N == 0.0 ? kInf : D / constants.N;
    n_record.details = "N = " + fmt(constants.N) + " vs D = " + fmt(D) + "; N1 = " +
                       fmt(constants.N1) + ", N2 = " + fmt(constants.N2);
    report.checks.push_back(n_record);

    report.wall_ms = elapsed_ms(start);
    write_output(write_report(report), choose_out(config, flags));
    return exit_code_for(report);
}

// --- export -----------------------------------------------------------------

int run_export(const Config& config, const Overrides& flags) {
    const Json* section = config.section("export");
    if (!section) fail("export requires a config with an \"export\" section");
    const Json* report_key = get(*section, "report");
    if (!report_key) fail("export: missing \"report\" (path to a report document)");
    const Json* selector_key = get(*section, "selector");
    if (!selector_key) fail("export: missing \"selector\"");
    const std::string selector = as_string(*selector_key, "export.selector");
    if (selector != "residuals" && selector != "update-norms" && selector != "condition-margins") {
        fail("export.selector must be residuals, update-norms, or condition-margins, got \"" +
             selector + "\"");
    }
    const std::filesystem::path path = config.resolve(as_string(*report_key, "export.report"));
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        fail("export: report document not found: " + path.string());
    }
    const std::string format = choose_format(config, flags, "csv");

    const RunReport report = read_report(slurp(path, "export"));
    write_output(format == "csv" ? emit_csv_series(report, selector) : write_report(report),
                 choose_out(config, flags));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modeflow: certified Fourier-side solver and lemma verification toolkit"};
    app.require_subcommand(1);

    Overrides flags;
    const auto add_common = [&flags](CLI::App* cmd) {
        cmd->add_option("--config", flags.config, "configuration document (modeflow/config/v1)");
        cmd->add_option("--out", flags.out, "write the report here instead of stdout");
        cmd->add_option("--seed", flags.seed, "seed for randomized suites");
        cmd->add_option("--max-iter", flags.max_iter, "iteration cap for solves");
        cmd->add_option("--tol", flags.tol, "residual tolerance for solves");
        cmd->add_option("--mode-box", flags.mode_box, "override the problem mode box (cube radius)");
        cmd->add_option("--time-grid", flags.time_grid,
                        "resample the problem onto \"T_max,M\" (interpolation only)");
        cmd->add_option("--format", flags.format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* verify = app.add_subcommand("verify-lemmas", "run the named verification suites");
    CLI::App* solve = app.add_subcommand("solve", "run the fixed-point solver on a problem");
    CLI::App* feasibility =
        app.add_subcommand("feasibility", "search or check smallness conditions");
    CLI::App* constants = app.add_subcommand("constants", "evaluate the existence constants");
    CLI::App* exporter = app.add_subcommand("export", "emit an iteration series as CSV");
    for (CLI::App* cmd : {verify, solve, feasibility, constants, exporter}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems exit 2; --help exits 0
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const Config config = load_config(flags.config, command);
        if (command == "verify-lemmas") return run_verify(config, flags);
        if (command == "solve") return run_solve(config, flags);
        if (command == "feasibility") return run_feasibility(config, flags);
        if (command == "constants") return run_constants(config, flags);
        return run_export(config, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
