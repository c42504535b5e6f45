#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thermolab/errors.hpp"
#include "thermolab/mesh.hpp"
#include "thermolab/scenario.hpp"

namespace fs = std::filesystem;
using namespace thermolab;

namespace {

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            used = std::string::npos;
        }
        if (used != item.size()) throw SchemaError("--values", "not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw SchemaError("--values", "no values given");
    return out;
}

int cmd_run(const std::string& file, const std::string& out) {
    Scenario s = load_scenario(file);
    RunResult r = run_scenario(s, out.empty() ? fs::path() : fs::path(out));
    if (out.empty()) std::cout << r.manifest.dump(2) << "\n";
    if (!r.message.empty()) std::cerr << "thermolab: " << r.message << "\n";
    return r.exit_code;
}

int cmd_sweep(const std::string& file, const std::string& axis, const std::string& values, const std::string& out) {
    json templ = read_json_file(file);
    parse_scenario(templ);
    SweepResult sr = sweep_scenarios(templ, axis, parse_values(values), out.empty() ? fs::path() : fs::path(out));
    if (out.empty()) std::cout << sr.csv;
    int failed = 0;
    for (const auto& r : sr.rows) failed += r.exit_code != kExitOk;
    if (failed) std::cerr << "thermolab: " << failed << " sweep row(s) did not exit cleanly\n";
    return kExitOk;
}

int cmd_verify(const std::string& file) {
    VerifyResult v = verify_golden(read_json_file(file));
    if (v.pass) {
        std::cout << "verify: PASS\n";
    } else {
        std::cout << "verify: FAIL\n";
        for (const auto& f : v.mismatches) std::cout << "  mismatch: " << f << "\n";
    }
    return v.exit_code;
}

int cmd_mesh(int n, const std::string& out) {
    auto g = FuchsianGroup::genus2();
    OctagonMesh m = OctagonMesh::build(g, n);
    if (out.empty()) {
        m.write(std::cout);
    } else {
        std::ofstream f(out);
        m.write(f);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermolab: thermostat flows on a genus-2 hyperbolic surface"};
    app.require_subcommand(1);

    std::string run_file, run_out;
    auto* run = app.add_subcommand("run", "Run a scenario and write its manifest");
    run->add_option("scenario", run_file, "Scenario JSON")->required();
    run->add_option("--out", run_out, "Output directory for manifest.json and CSV artifacts");

    std::string sweep_file, axis, values, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Run a scenario over values of one scalar field");
    sweep->add_option("scenario", sweep_file, "Template scenario JSON")->required();
    sweep->add_option("--axis", axis, "Dotted path of the swept field, e.g. params.epsilon")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--out", sweep_out, "Output directory (one subdirectory per row plus sweep.csv)");

    std::string golden;
    auto* verify = app.add_subcommand("verify", "Re-run a golden manifest and compare");
    verify->add_option("golden", golden, "Golden manifest JSON")->required();

    int mesh_n = 4;
    std::string mesh_out;
    auto* mesh = app.add_subcommand("mesh", "Write the octagon triangulation in the text mesh format");
    mesh->add_option("n", mesh_n, "Subdivision level")->check(CLI::PositiveNumber);
    mesh->add_option("--out", mesh_out, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitSchema;
    }
    try {
        if (*run) return cmd_run(run_file, run_out);
        if (*sweep) return cmd_sweep(sweep_file, axis, values, sweep_out);
        if (*verify) return cmd_verify(golden);
        if (*mesh) return cmd_mesh(mesh_n, mesh_out);
    } catch (const SchemaError& e) {
        std::cerr << "thermolab: schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const CertificationError& e) {
        std::cerr << "thermolab: " << e.what() << "\n";
        return kExitUncertified;
    } catch (const std::exception& e) {
        std::cerr << "thermolab: " << e.what() << "\n";
        return kExitFault;
    }
    return kExitOk;
}
