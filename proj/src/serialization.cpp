#include "modeflow/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace modeflow {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFieldSchema = "modeflow/field/v1";
constexpr const char* kVectorFieldSchema = "modeflow/vector_field/v1";
constexpr const char* kProblemSchema = "modeflow/problem/v1";
constexpr const char* kReportSchema = "modeflow/report/v1";

[[noreturn]] void fail(const std::string& what, const std::string& message) {
    throw std::invalid_argument(what + ": " + message);
}

Json parse_document(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(what, std::string("malformed JSON: ") + e.what());
    }
}

const Json& need(const Json& j, const std::string& what, const char* key) {
    if (!j.is_object()) {
        fail(what, "expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        fail(what, std::string("missing key \"") + key + '"');
    }
    return *it;
}

/// Unknown keys are configuration errors, never warnings: certification
/// tooling must not silently ignore a typo in a tolerance name.
void expect_keys(const Json& j, const std::string& what, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        fail(what, "expected an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : keys) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            fail(what, "unknown key \"" + it.key() + '"');
        }
    }
}

double as_double(const Json& j, const std::string& what) {
    if (!j.is_number()) {
        fail(what, "expected a number");
    }
    return j.get<double>();
}

/// Number slot where JSON null encodes +infinity ("no finite bound").
double as_margin(const Json& j, const std::string& what) {
    if (j.is_null()) {
        return std::numeric_limits<double>::infinity();
    }
    return as_double(j, what);
}

Json margin_json(double value) {
    return std::isfinite(value) ? Json(value) : Json(nullptr);
}

int as_int(const Json& j, const std::string& what) {
    if (!j.is_number_integer()) {
        fail(what, "expected an integer");
    }
    return j.get<int>();
}

bool as_bool(const Json& j, const std::string& what) {
    if (!j.is_boolean()) {
        fail(what, "expected a boolean");
    }
    return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& what) {
    if (!j.is_string()) {
        fail(what, "expected a string");
    }
    return j.get<std::string>();
}

std::vector<double> as_double_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) {
        fail(what, "expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const Json& item : j) {
        out.push_back(as_double(item, what));
    }
    return out;
}

std::vector<std::int32_t> as_int_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) {
        fail(what, "expected an array of integers");
    }
    std::vector<std::int32_t> out;
    out.reserve(j.size());
    for (const Json& item : j) {
        out.push_back(static_cast<std::int32_t>(as_int(item, what)));
    }
    return out;
}

void expect_schema(const Json& j, const std::string& what, const char* schema) {
    const std::string got = as_string(need(j, what, "schema"), what + ".schema");
    if (got != schema) {
        fail(what, "unsupported schema \"" + got + "\" (expected \"" + schema + "\")");
    }
}

// --- geometry / grids ------------------------------------------------------

Json geometry_json(const TorusGeometry& g) {
    return Json{{"n", g.n()}, {"periods", g.periods()}};
}

TorusGeometry geometry_from(const Json& j, const std::string& what) {
    expect_keys(j, what, {"n", "periods"});
    return TorusGeometry(as_int(need(j, what, "n"), what + ".n"),
                         as_double_vector(need(j, what, "periods"), what + ".periods"));
}

Json field_json(const Field& f) {
    Json records = Json::array();
    for (const auto& [mode, trajectory] : f.coefficients()) {
        Json values = Json::array();
        for (const Complex& c : trajectory) {
            values.push_back(Json::array({c.real(), c.imag()}));
        }
        records.push_back(Json{{"mode", mode.entries()}, {"values", std::move(values)}});
    }
    return Json{{"schema", kFieldSchema},
                {"geometry", geometry_json(f.geometry())},
                {"time_grid", f.is_spatial() ? Json(nullptr) : Json(f.time_grid()->samples())},
                {"mode_box", f.mode_box().radii()},
                {"real_valued", f.real_valued()},
                {"records", std::move(records)}};
}

Field field_from(const Json& j, const std::string& what) {
    expect_keys(j, what, {"schema", "geometry", "time_grid", "mode_box", "real_valued", "records"});
    expect_schema(j, what, kFieldSchema);

    const TorusGeometry geometry = geometry_from(need(j, what, "geometry"), what + ".geometry");
    const ModeBox box(as_int_vector(need(j, what, "mode_box"), what + ".mode_box"));
    const bool real_valued = as_bool(need(j, what, "real_valued"), what + ".real_valued");

    const Json& grid_json = need(j, what, "time_grid");
    Field field = grid_json.is_null()
                      ? Field(geometry, box, real_valued)
                      : Field(geometry,
                              TimeGrid(as_double_vector(grid_json, what + ".time_grid")), box,
                              real_valued);

    const Json& records = need(j, what, "records");
    if (!records.is_array()) {
        fail(what, "records: expected an array");
    }
    for (const Json& record : records) {
        const std::string rwhat = what + ".records";
        expect_keys(record, rwhat, {"mode", "values"});
        const Mode mode(as_int_vector(need(record, rwhat, "mode"), rwhat + ".mode"));
        const Json& values = need(record, rwhat, "values");
        if (!values.is_array()) {
            fail(rwhat, "values: expected an array");
        }
        Trajectory trajectory;
        trajectory.reserve(values.size());
        for (const Json& pair : values) {
            if (!pair.is_array() || pair.size() != 2) {
                fail(rwhat, "values: expected [re, im] pairs");
            }
            trajectory.emplace_back(as_double(pair[0], rwhat), as_double(pair[1], rwhat));
        }
        field.set(mode, std::move(trajectory));
    }
    return field;
}

Json vector_field_json(const VectorField& v) {
    Json components = Json::array();
    for (const Field& component : v.components()) {
        components.push_back(field_json(component));
    }
    return Json{{"schema", kVectorFieldSchema}, {"components", std::move(components)}};
}

VectorField vector_field_from(const Json& j, const std::string& what) {
    expect_keys(j, what, {"schema", "components"});
    expect_schema(j, what, kVectorFieldSchema);
    const Json& components = need(j, what, "components");
    if (!components.is_array() || components.empty()) {
        fail(what, "components: expected a nonempty array");
    }
    std::vector<Field> fields;
    fields.reserve(components.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
        fields.push_back(
            field_from(components[k], what + ".components[" + std::to_string(k) + "]"));
    }
    return VectorField(std::move(fields));
}

void expect_field_shape(const VectorField& v, const TorusGeometry& geometry, const ModeBox& box,
                        const TimeGrid* grid, const std::string& what) {
    if (v.geometry() != geometry) {
        fail(what, "geometry differs from the problem geometry");
    }
    for (const Field& component : v.components()) {
        if (component.mode_box() != box) {
            fail(what, "mode box differs from the problem mode box");
        }
        if (grid == nullptr) {
            if (!component.is_spatial()) {
                fail(what, "expected a spatial field");
            }
        } else if (!component.is_time_sampled() || *component.time_grid() != *grid) {
            fail(what, "time grid differs from the problem time grid");
        }
    }
}

// --- iteration records ------------------------------------------------------

Json record_json(const IterationRecord& r) {
    return Json{{"iteration", r.iteration},
                {"update_norm", r.update_norm},
                {"residual_norm", r.residual_norm},
                {"ball_norm", r.ball_norm},
                {"condition_margin", margin_json(r.condition_margin)},
                {"contraction", r.contraction},
                {"max_divergence", r.max_divergence}};
}

IterationRecord record_from(const Json& j, const std::string& what) {
    expect_keys(j, what,
                {"iteration", "update_norm", "residual_norm", "ball_norm", "condition_margin",
                 "contraction", "max_divergence"});
    IterationRecord r;
    r.iteration = as_int(need(j, what, "iteration"), what + ".iteration");
    r.update_norm = as_double(need(j, what, "update_norm"), what + ".update_norm");
    r.residual_norm = as_double(need(j, what, "residual_norm"), what + ".residual_norm");
    r.ball_norm = as_double(need(j, what, "ball_norm"), what + ".ball_norm");
    r.condition_margin = as_margin(need(j, what, "condition_margin"), what + ".condition_margin");
    r.contraction = as_double(need(j, what, "contraction"), what + ".contraction");
    r.max_divergence = as_double(need(j, what, "max_divergence"), what + ".max_divergence");
    return r;
}

std::string csv_quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) {
        return cell;
    }
    std::string quoted = "\"";
    for (char c : cell) {
        quoted += c;
        if (c == '"') {
            quoted += '"';
        }
    }
    quoted += '"';
    return quoted;
}

} // namespace

// --- fields -----------------------------------------------------------------

std::string write_field(const Field& field) { return field_json(field).dump(1) + "\n"; }

Field read_field(const std::string& text) {
    return field_from(parse_document(text, "field document"), "field document");
}

std::string write_vector_field(const VectorField& field) {
    return vector_field_json(field).dump(1) + "\n";
}

VectorField read_vector_field(const std::string& text) {
    return vector_field_from(parse_document(text, "vector field document"),
                             "vector field document");
}

// --- problems ----------------------------------------------------------------

std::string write_problem(const TorusProblem& problem) {
    const bool coupled = problem.kind == ProblemKind::Boussinesq;
    Json j{{"schema", kProblemSchema},
           {"kind", coupled ? "boussinesq" : "navier_stokes"},
           {"geometry", geometry_json(problem.geometry)},
           {"time_grid", problem.grid.samples()},
           {"mode_box", problem.box.radii()},
           {"physics",
            Json{{"nu", problem.physics.nu},
                 {"kappa", problem.physics.kappa},
                 {"coupling", problem.physics.A}}},
           {"phi", vector_field_json(problem.phi)},
           {"eta", coupled ? vector_field_json(problem.eta) : Json(nullptr)},
           {"f", vector_field_json(problem.f)},
           {"g", coupled ? vector_field_json(problem.g) : Json(nullptr)},
           {"x0", problem.x0},
           {"p0", problem.p0},
           {"condition_C",
            problem.condition_C ? Json(*problem.condition_C) : Json(nullptr)},
           {"ball_tail", problem.ball_tail
                             ? Json{{"b", problem.ball_tail->b},
                                    {"r", problem.ball_tail->r},
                                    {"d", problem.ball_tail->d}}
                             : Json(nullptr)}};
    return j.dump(1) + "\n";
}

TorusProblem read_problem(const std::string& text) {
    const std::string what = "problem document";
    const Json j = parse_document(text, what.c_str());
    expect_keys(j, what,
                {"schema", "kind", "geometry", "time_grid", "mode_box", "physics", "phi", "eta",
                 "f", "g", "x0", "p0", "condition_C", "ball_tail"});
    expect_schema(j, what, kProblemSchema);

    const std::string kind = as_string(need(j, what, "kind"), what + ".kind");
    if (kind != "navier_stokes" && kind != "boussinesq") {
        fail(what, "kind must be \"navier_stokes\" or \"boussinesq\"");
    }
    const bool coupled = kind == "boussinesq";

    const TorusGeometry geometry = geometry_from(need(j, what, "geometry"), what + ".geometry");
    const TimeGrid grid(as_double_vector(need(j, what, "time_grid"), what + ".time_grid"));
    const ModeBox box(as_int_vector(need(j, what, "mode_box"), what + ".mode_box"));

    const Json& physics_json = need(j, what, "physics");
    expect_keys(physics_json, what + ".physics", {"nu", "kappa", "coupling"});
    const Json& coupling_json = need(physics_json, what + ".physics", "coupling");
    if (!coupling_json.is_array()) {
        fail(what, "physics.coupling: expected an array of rows");
    }
    std::vector<std::vector<double>> coupling;
    for (const Json& row : coupling_json) {
        coupling.push_back(as_double_vector(row, what + ".physics.coupling"));
    }
    const PhysicsParams physics =
        make_physics_params(as_double(need(physics_json, what, "nu"), what + ".physics.nu"),
                            as_double(need(physics_json, what, "kappa"), what + ".physics.kappa"),
                            std::move(coupling));

    VectorField phi = vector_field_from(need(j, what, "phi"), what + ".phi");
    VectorField f = vector_field_from(need(j, what, "f"), what + ".f");
    expect_field_shape(phi, geometry, box, nullptr, what + ".phi");
    expect_field_shape(f, geometry, box, &grid, what + ".f");

    std::vector<double> x0 = as_double_vector(need(j, what, "x0"), what + ".x0");
    std::vector<double> p0 = as_double_vector(need(j, what, "p0"), what + ".p0");

    const Json& c_json = need(j, what, "condition_C");
    std::optional<double> condition_C;
    if (!c_json.is_null()) {
        condition_C = as_double(c_json, what + ".condition_C");
    }

    const Json& tail_json = need(j, what, "ball_tail");
    std::optional<KParams> ball_tail;
    if (!tail_json.is_null()) {
        expect_keys(tail_json, what + ".ball_tail", {"b", "r", "d"});
        ball_tail = KParams{as_double(need(tail_json, what, "b"), what + ".ball_tail.b"),
                            as_double(need(tail_json, what, "r"), what + ".ball_tail.r"),
                            as_double(need(tail_json, what, "d"), what + ".ball_tail.d")};
    }

    const Json& eta_json = need(j, what, "eta");
    const Json& g_json = need(j, what, "g");
    if (!coupled) {
        if (!eta_json.is_null() || !g_json.is_null()) {
            fail(what, "navier_stokes problems must carry null eta and g");
        }
        return make_ns_problem(geometry, physics, std::move(phi), std::move(f), std::move(x0),
                               std::move(p0), condition_C, ball_tail);
    }
    VectorField eta = vector_field_from(eta_json, what + ".eta");
    VectorField g = vector_field_from(g_json, what + ".g");
    expect_field_shape(eta, geometry, box, nullptr, what + ".eta");
    expect_field_shape(g, geometry, box, &grid, what + ".g");
    return make_boussinesq_problem(geometry, physics, std::move(phi), std::move(eta), std::move(f),
                                   std::move(g), std::move(x0), std::move(p0), condition_C,
                                   ball_tail);
}

// --- reports ------------------------------------------------------------------

std::string write_report(const RunReport& report) {
    Json checks = Json::array();
    for (const CheckRecord& check : report.checks) {
        checks.push_back(Json{{"name", check.name},
                              {"passed", check.passed},
                              {"margin", margin_json(check.margin)},
                              {"details", check.details}});
    }
    Json iterations = Json::array();
    for (const IterationRecord& record : report.iterations) {
        iterations.push_back(record_json(record));
    }

    Json j{{"schema", kReportSchema},
           {"command", report.command},
           {"input_digest", report.input_digest},
           {"wall_ms", report.wall_ms},
           {"checks", std::move(checks)},
           {"iterations", std::move(iterations)},
           {"warnings", report.warnings},
           {"verdict", report.verdict},
           {"final_residual",
            report.final_residual ? Json(*report.final_residual) : Json(nullptr)}};
    if (report.condition_margin) {
        j["condition_margin"] = margin_json(*report.condition_margin);
    }
    j["solution"] = Json(nullptr);
    if (report.solution) {
        const SolveSolution& s = *report.solution;
        j["solution"] = Json{
            {"u", vector_field_json(s.u)},
            {"p", Json{{"field", field_json(s.p.field)}, {"x0", s.p.x0}, {"p0", s.p.p0}}},
            {"rho", s.rho ? vector_field_json(*s.rho) : Json(nullptr)},
            {"h", s.h ? vector_field_json(*s.h) : Json(nullptr)},
            {"r", vector_field_json(s.r)}};
    }
    return j.dump(1) + "\n";
}

RunReport read_report(const std::string& text) {
    const std::string what = "report document";
    const Json j = parse_document(text, what.c_str());
    expect_keys(j, what,
                {"schema", "command", "input_digest", "wall_ms", "checks", "iterations",
                 "warnings", "verdict", "final_residual", "condition_margin", "solution"});
    expect_schema(j, what, kReportSchema);

    RunReport report;
    report.command = as_string(need(j, what, "command"), what + ".command");
    report.input_digest = as_string(need(j, what, "input_digest"), what + ".input_digest");
    report.wall_ms = as_double(need(j, what, "wall_ms"), what + ".wall_ms");

    const Json& checks = need(j, what, "checks");
    if (!checks.is_array()) {
        fail(what, "checks: expected an array");
    }
    for (const Json& item : checks) {
        const std::string cwhat = what + ".checks";
        expect_keys(item, cwhat, {"name", "passed", "margin", "details"});
        CheckRecord check;
        check.name = as_string(need(item, cwhat, "name"), cwhat + ".name");
        check.passed = as_bool(need(item, cwhat, "passed"), cwhat + ".passed");
        check.margin = as_margin(need(item, cwhat, "margin"), cwhat + ".margin");
        check.details = as_string(need(item, cwhat, "details"), cwhat + ".details");
        report.checks.push_back(std::move(check));
    }

    const Json& iterations = need(j, what, "iterations");
    if (!iterations.is_array()) {
        fail(what, "iterations: expected an array");
    }
    for (const Json& item : iterations) {
        report.iterations.push_back(record_from(item, what + ".iterations"));
    }

    const Json& warnings = need(j, what, "warnings");
    if (!warnings.is_array()) {
        fail(what, "warnings: expected an array");
    }
    for (const Json& item : warnings) {
        report.warnings.push_back(as_string(item, what + ".warnings"));
    }

    report.verdict = as_string(need(j, what, "verdict"), what + ".verdict");
    const Json& residual = need(j, what, "final_residual");
    if (!residual.is_null()) {
        report.final_residual = as_double(residual, what + ".final_residual");
    }
    if (const auto it = j.find("condition_margin"); it != j.end()) {
        report.condition_margin = as_margin(*it, what + ".condition_margin");
    }

    const Json& solution = need(j, what, "solution");
    if (!solution.is_null()) {
        const std::string swhat = what + ".solution";
        expect_keys(solution, swhat, {"u", "p", "rho", "h", "r"});
        SolveSolution payload;
        payload.u = vector_field_from(need(solution, swhat, "u"), swhat + ".u");
        const Json& p_json = need(solution, swhat, "p");
        expect_keys(p_json, swhat + ".p", {"field", "x0", "p0"});
        payload.p.field = field_from(need(p_json, swhat, "field"), swhat + ".p.field");
        payload.p.x0 = as_double_vector(need(p_json, swhat, "x0"), swhat + ".p.x0");
        payload.p.p0 = as_double_vector(need(p_json, swhat, "p0"), swhat + ".p.p0");
        const Json& rho = need(solution, swhat, "rho");
        if (!rho.is_null()) {
            payload.rho = vector_field_from(rho, swhat + ".rho");
        }
        const Json& h = need(solution, swhat, "h");
        if (!h.is_null()) {
            payload.h = vector_field_from(h, swhat + ".h");
        }
        payload.r = vector_field_from(need(solution, swhat, "r"), swhat + ".r");
        report.solution = std::move(payload);
    }
    return report;
}

std::string emit_csv_series(const RunReport& report, const std::string& selector) {
    double IterationRecord::*member = nullptr;
    std::string header;
    if (selector == "residuals") {
        member = &IterationRecord::residual_norm;
        header = "residual_norm";
    } else if (selector == "update-norms") {
        member = &IterationRecord::update_norm;
        header = "update_norm";
    } else if (selector == "condition-margins") {
        member = &IterationRecord::condition_margin;
        header = "condition_margin";
    } else {
        throw std::invalid_argument("emit_csv_series: unknown selector \"" + selector + '"');
    }

    std::string out = csv_quote("iteration") + "," + csv_quote(header) + "\n";
    char row[64];
    for (const IterationRecord& record : report.iterations) {
        std::snprintf(row, sizeof row, "%d,%.17g\n", record.iteration, record.*member);
        out += row;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace modeflow
