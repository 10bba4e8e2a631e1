#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "modeflow/sampling.hpp"
#include "modeflow/serialization.hpp"

using namespace modeflow;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Field sample_spatial_field() {
    const TorusGeometry geometry(2, {1.0, 0.75});
    Field f(geometry, ModeBox::cube(2, 2), false);
    f.set(Mode({1, -2}), Complex(0.125, -3.5e-17));
    f.set(Mode({0, 0}), Complex(-1.0 / 3.0, 0.0));
    f.set(Mode({-2, 1}), Complex(0.0, 1e300));
    return f;
}

Field sample_time_field() {
    const TorusGeometry geometry(1, {2.0});
    Field f(geometry, TimeGrid::uniform(1.5, 3), ModeBox::cube(1, 2), true);
    f.set(Mode({1}), Trajectory{Complex(0.5, 0.25), Complex(0.1, -0.2), Complex(0.0, 1e-9),
                                Complex(-4.0, 0.0)});
    f.set(Mode({0}), Trajectory{Complex(1.0, 0.0), Complex(0.5, 0.0), Complex(0.25, 0.0),
                                Complex(0.125, 0.0)});
    return f;
}

TorusProblem sample_boussinesq_problem() {
    const TorusGeometry geometry(2, {1.0, 2.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 4);
    const ModeBox box = ModeBox::cube(2, 2);
    SampleStream stream(5);
    const VectorField phi = random_divergence_free(stream, geometry, box, 0.01, 4);
    VectorField eta = VectorField::zeros(geometry, box, true);
    eta.component(1).set(Mode({1, 0}), Complex(0.005, 0.001));
    const VectorField f = VectorField::zeros(geometry, grid, box, true);
    VectorField g = VectorField::zeros(geometry, grid, box, true);
    g.component(2).set(Mode({0, 1}), Trajectory(grid.size(), Complex(0.0, 2e-3)));
    const PhysicsParams physics = make_physics_params(0.7, 1.1, {{0.0, 0.25}, {-0.5, 0.0}});
    return make_boussinesq_problem(geometry, physics, phi, eta, f, g, {0.25, 0.5},
                                   std::vector<double>(grid.size(), 0.125), 0.05,
                                   KParams{1.0, 0.5, 0.01});
}

RunReport sample_report() {
    RunReport report;
    report.command = "solve";
    report.input_digest = "fnv1a:00cbf29ce484222325";
    report.wall_ms = 12.75;
    CheckRecord check;
    check.name = "condition/t42";
    check.passed = true;
    check.margin = 4.25;
    check.details = "margin with \"quotes\", commas,\nand a newline";
    report.checks.push_back(check);
    for (int i = 0; i < 3; ++i) {
        IterationRecord rec;
        rec.iteration = i;
        rec.update_norm = i == 0 ? 0.0 : 0.5 / i;
        rec.residual_norm = std::pow(0.1, i + 1) / 3.0;
        rec.ball_norm = 0.01 * i;
        rec.condition_margin = 4.25;
        rec.contraction = i >= 2 ? 0.5 : 0.0;
        rec.max_divergence = 1e-16 * i;
        report.iterations.push_back(rec);
    }
    report.warnings = {"truncation loss 1.25e-19 at iteration 2"};
    report.verdict = "converged";
    report.final_residual = 3.333333333333333e-4;
    report.condition_margin = kInf;
    return report;
}

} // namespace

TEST_CASE("fields round-trip bit-exactly") {
    const Field spatial = sample_spatial_field();
    CHECK(read_field(write_field(spatial)) == spatial);

    const Field sampled = sample_time_field();
    CHECK(read_field(write_field(sampled)) == sampled);

    // Empty field: geometry, grid, and box survive with no records.
    const Field empty(TorusGeometry(3, {1.0, 1.0, 1.0}), ModeBox::cube(3, 1), true);
    CHECK(read_field(write_field(empty)) == empty);
}

TEST_CASE("vector fields round-trip") {
    SampleStream stream(17);
    const TorusGeometry geometry(2, {2.0 * M_PI, 2.0 * M_PI});
    const VectorField v = random_divergence_free(stream, geometry, ModeBox::cube(2, 2), 0.5, 6);
    CHECK(read_vector_field(write_vector_field(v)) == v);
}

TEST_CASE("problems round-trip through the factory validation") {
    const TorusProblem problem = sample_boussinesq_problem();
    const TorusProblem back = read_problem(write_problem(problem));

    CHECK(back.kind == ProblemKind::Boussinesq);
    CHECK(back.geometry == problem.geometry);
    CHECK(back.grid == problem.grid);
    CHECK(back.box.radii() == problem.box.radii());
    CHECK(back.physics.nu == problem.physics.nu);
    CHECK(back.physics.kappa == problem.physics.kappa);
    CHECK(back.physics.B == problem.physics.B);
    CHECK(back.physics.A == problem.physics.A);
    CHECK(back.phi == problem.phi);
    CHECK(back.eta == problem.eta);
    CHECK(back.f == problem.f);
    CHECK(back.g == problem.g);
    CHECK(back.x0 == problem.x0);
    CHECK(back.p0 == problem.p0);
    REQUIRE(back.condition_C.has_value());
    CHECK(*back.condition_C == 0.05);
    REQUIRE(back.ball_tail.has_value());
    CHECK(back.ball_tail->b == 1.0);
    CHECK(back.ball_tail->r == 0.5);
    CHECK(back.ball_tail->d == 0.01);

    // Navier-Stokes: density slots are written as nulls and read back empty.
    const TorusGeometry geometry(2, {1.0, 1.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 4);
    const ModeBox box = ModeBox::cube(2, 1);
    const TorusProblem ns = make_ns_problem(
        geometry, make_physics_params(1.0, 1.0), VectorField::zeros(geometry, box, true),
        VectorField::zeros(geometry, grid, box, true), {0.0, 0.0},
        std::vector<double>(grid.size(), 0.0));
    const TorusProblem ns_back = read_problem(write_problem(ns));
    CHECK(ns_back.kind == ProblemKind::NavierStokes);
    CHECK(!ns_back.condition_C.has_value());
    CHECK(!ns_back.ball_tail.has_value());
    CHECK(ns_back.eta == ns.eta);
    CHECK(ns_back.g == ns.g);
}

TEST_CASE("readers reject unknown keys at every level") {
    const std::string text = write_field(sample_spatial_field());

    Json doc = Json::parse(text);
    doc["surprise"] = 1;
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);

    doc = Json::parse(text);
    doc["geometry"]["handedness"] = "left";
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);

    doc = Json::parse(text);
    doc["records"][0]["phase"] = 0.5;
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);

    const std::string ptext = write_problem(sample_boussinesq_problem());
    doc = Json::parse(ptext);
    doc["physics"]["gravity"] = 9.81;
    CHECK_THROWS_AS(read_problem(doc.dump()), std::invalid_argument);

    const std::string rtext = write_report(sample_report());
    doc = Json::parse(rtext);
    doc["iterations"][1]["step_size"] = 0.1;
    CHECK_THROWS_AS(read_report(doc.dump()), std::invalid_argument);
}

TEST_CASE("readers reject wrong schemas, malformed text, and missing keys") {
    const std::string text = write_field(sample_spatial_field());

    Json doc = Json::parse(text);
    doc["schema"] = "modeflow/field/v2";
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);

    // A field document is not a vector-field document.
    CHECK_THROWS_AS(read_vector_field(text), std::invalid_argument);

    CHECK_THROWS_AS(read_field("{\"schema\": "), std::invalid_argument);
    CHECK_THROWS_AS(read_field("[1, 2, 3]"), std::invalid_argument);

    doc = Json::parse(text);
    doc.erase("mode_box");
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);

    // Trajectory length must match the time grid.
    const std::string ttext = write_field(sample_time_field());
    doc = Json::parse(ttext);
    doc["records"][0]["values"].erase(0);
    CHECK_THROWS_AS(read_field(doc.dump()), std::invalid_argument);
}

TEST_CASE("problem documents enforce kind-specific structure") {
    const std::string text = write_problem(sample_boussinesq_problem());

    Json doc = Json::parse(text);
    doc["kind"] = "navier_stokes"; // NS forbids density data
    CHECK_THROWS_AS(read_problem(doc.dump()), std::invalid_argument);

    doc = Json::parse(text);
    doc["kind"] = "magnetohydrodynamics";
    CHECK_THROWS_AS(read_problem(doc.dump()), std::invalid_argument);

    doc = Json::parse(text);
    doc["physics"]["nu"] = -1.0; // factory validation runs on read
    CHECK_THROWS_AS(read_problem(doc.dump()), std::invalid_argument);

    doc = Json::parse(text);
    doc["x0"] = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(read_problem(doc.dump()), std::invalid_argument);
}

TEST_CASE("reports round-trip including infinities and the solution payload") {
    RunReport report = sample_report();

    const TorusGeometry geometry(2, {1.0, 1.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 4);
    const ModeBox box = ModeBox::cube(2, 1);
    SolveSolution solution;
    solution.u = VectorField::zeros(geometry, grid, box, true);
    solution.u.component(1).set(Mode({0, 1}), Trajectory(grid.size(), Complex(0.0, 0.25)));
    solution.p = AnchoredScalar{Field(geometry, grid, box, true), {0.0, 0.0},
                                std::vector<double>(grid.size(), 0.0)};
    solution.r = VectorField::zeros(geometry, grid, box, true);
    report.solution = solution;

    const RunReport back = read_report(write_report(report));
    CHECK(back.command == report.command);
    CHECK(back.input_digest == report.input_digest);
    CHECK(back.wall_ms == report.wall_ms);
    REQUIRE(back.checks.size() == 1);
    CHECK(back.checks[0].name == report.checks[0].name);
    CHECK(back.checks[0].passed == report.checks[0].passed);
    CHECK(back.checks[0].margin == report.checks[0].margin);
    CHECK(back.checks[0].details == report.checks[0].details);
    CHECK(back.iterations == report.iterations);
    CHECK(back.warnings == report.warnings);
    CHECK(back.verdict == report.verdict);
    REQUIRE(back.final_residual.has_value());
    CHECK(*back.final_residual == *report.final_residual);
    REQUIRE(back.condition_margin.has_value());
    CHECK(std::isinf(*back.condition_margin));
    REQUIRE(back.solution.has_value());
    CHECK(back.solution->u == solution.u);
    CHECK(back.solution->p.field == solution.p.field);
    CHECK(back.solution->p.x0 == solution.p.x0);
    CHECK(back.solution->p.p0 == solution.p.p0);
    CHECK(!back.solution->rho.has_value());
    CHECK(!back.solution->h.has_value());
    CHECK(back.solution->r == solution.r);

    // Absent optionals stay absent; non-solve reports carry no verdict.
    RunReport bare;
    bare.command = "verify-lemmas";
    bare.input_digest = "fnv1a:0000000000000000";
    const RunReport bare_back = read_report(write_report(bare));
    CHECK(bare_back.verdict.empty());
    CHECK(!bare_back.final_residual.has_value());
    CHECK(!bare_back.condition_margin.has_value());
    CHECK(!bare_back.solution.has_value());
}

TEST_CASE("csv series reproduce the recorded doubles exactly") {
    const RunReport report = sample_report();
    const std::string csv = emit_csv_series(report, "residuals");

    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "iteration,residual_norm");
    int row = 0;
    while (std::getline(lines, line)) {
        const std::size_t comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        CHECK(std::stoi(line.substr(0, comma)) == row);
        const double parsed = std::strtod(line.c_str() + comma + 1, nullptr);
        CHECK(parsed == report.iterations[static_cast<std::size_t>(row)].residual_norm);
        ++row;
    }
    CHECK(row == 3);
    CHECK(csv.find('\r') == std::string::npos); // LF only

    CHECK(emit_csv_series(report, "update-norms").substr(0, 22) == "iteration,update_norm\n");
    const std::string margins = emit_csv_series(report, "condition-margins");
    CHECK(margins.find("condition_margin") != std::string::npos);

    RunReport empty;
    CHECK(emit_csv_series(empty, "residuals") == "iteration,residual_norm\n");
    CHECK_THROWS_AS(emit_csv_series(empty, "ball-norms"), std::invalid_argument);

    // Infinite margins print as "inf", which strtod reads back.
    RunReport infinite = sample_report();
    infinite.iterations[0].condition_margin = kInf;
    const std::string inf_csv = emit_csv_series(infinite, "condition-margins");
    CHECK(inf_csv.find("0,inf\n") != std::string::npos);
}

TEST_CASE("the digest matches a reference fnv-1a implementation") {
    CHECK(fnv1a64("") == 14695981039346656037ULL);

    const std::string probe = "modeflow digest probe\n";
    std::uint64_t expected = 14695981039346656037ULL;
    for (unsigned char c : probe) {
        expected ^= c;
        expected *= 1099511628211ULL;
    }
    CHECK(fnv1a64(probe) == expected);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}
