#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monofield/builtin_fields.hpp"
#include "monofield/field_io.hpp"
#include "monofield/levelset.hpp"
#include "monofield/monotonicity.hpp"
#include "monofield/pipeline.hpp"

namespace fs = std::filesystem;
using namespace monofield;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string input_path;
    std::string builtin;
    int resolution = 128;
    std::string out_dir = "monofield-out";
    std::string format = "json";
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--input", opt.input_path, "field JSON file");
    cmd->add_option("--builtin", opt.builtin,
                    "builtin field: linear, saddle, radial-annulus, bowl-disk, log-annulus, "
                    "sine-grid");
    cmd->add_option("--res", opt.resolution, "builtin resolution (nodes per side)")
        ->default_val(128);
    cmd->add_option("--out", opt.out_dir, "output directory")->default_val("monofield-out");
    cmd->add_option("--format", opt.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->default_val("json");
    cmd->add_flag("--strict", opt.strict, "nonzero exit on diagnostics");
}

ScalarField load_field(const CommonOptions& opt) {
    const bool has_file = !opt.input_path.empty();
    const bool has_builtin = !opt.builtin.empty();
    if (has_file == has_builtin)
        throw Error("exactly one of --input and --builtin is required");
    if (has_file) return read_field_json_file(opt.input_path);
    return make_builtin(opt.builtin, opt.resolution);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

// flat key,value rendering of a JSON document for --format csv
void json_to_csv(const json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            json_to_csv(value, prefix.empty() ? key : prefix + "." + key, out);
    } else if (j.is_array()) {
        int idx = 0;
        for (const auto& value : j)
            json_to_csv(value, prefix + "[" + std::to_string(idx++) + "]", out);
    } else {
        out << prefix << "," << j.dump() << "\n";
    }
}

void write_report(const CommonOptions& opt, const std::string& name, const std::string& body) {
    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    if (opt.format == "json") {
        write_text(dir / (name + ".json"), body);
    } else {
        std::ostringstream csv;
        csv << "key,value\n";
        json_to_csv(json::parse(body), "", csv);
        write_text(dir / (name + ".csv"), csv.str());
    }
}

int cmd_check_monotone(const CommonOptions& opt, const std::string& method, double tol) {
    const ScalarField field = load_field(opt);
    const MonotonicityMethod m = method == "exhaustive"
                                     ? MonotonicityMethod::ExhaustiveWindow
                                     : MonotonicityMethod::LevelComponent;
    const MonotonicityReport report = is_monotone(field, m, tol);
    write_report(opt, "monotonicity", report.to_json(field.grid()));
    std::cout << (report.monotone ? "monotone" : "not monotone") << " ("
              << to_string(report.method) << ", " << report.witnesses.size()
              << " witness(es))\n";
    return report.monotone ? 0 : 1;
}

int cmd_levelsets(const CommonOptions& opt, const std::vector<double>& levels) {
    if (levels.empty()) throw Error("levelsets: provide at least one level via --levels");
    const ScalarField field = load_field(opt);
    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);

    json summary = json::array();
    bool clean = true;
    for (size_t k = 0; k < levels.size(); ++k) {
        const LevelSetAnalysis analysis = extract_level_set(field, levels[k]);
        std::ostringstream stem;
        stem << "level_" << k;
        {
            std::ofstream csv(dir / (stem.str() + ".csv"));
            write_contours_csv(analysis, csv);
        }
        write_text(dir / (stem.str() + ".json"), analysis.to_json());
        json classes = json::array();
        for (const LevelCurve& c : analysis.components)
            classes.push_back({{"class", to_string(c.classification)},
                               {"length", c.length},
                               {"closed", c.closed}});
        summary.push_back({{"t", levels[k]},
                           {"components", std::move(classes)},
                           {"junctions", analysis.junctions.size()},
                           {"total_length", analysis.total_length},
                           {"regular", analysis.all_regular()}});
        if (!analysis.all_regular()) clean = false;
        std::cout << "t=" << levels[k] << ": " << analysis.components.size()
                  << " component(s), " << analysis.junctions.size() << " junction cell(s)\n";
    }
    write_report(opt, "levelsets", summary.dump(2));
    return (opt.strict && !clean) ? 1 : 0;
}

int cmd_coarea(const CommonOptions& opt, int n_levels, double tol) {
    const ScalarField field = load_field(opt);
    const CoareaReport report = coarea_check(field, n_levels);
    write_report(opt, "coarea", report.to_json());
    std::cout << "lhs=" << report.lhs << " rhs=" << report.rhs
              << " rel_error=" << report.rel_error << "\n";
    return (opt.strict && report.rel_error > tol) ? 1 : 0;
}

// solver section of a JSON config file:
//   { "p": 2.0, "tol": 1e-8, "max_iter": 200, "eps_reg_initial": -1,
//     "eps_reg_stages": 4 }
void apply_config_file(const std::string& path, PipelineConfig& cfg, double& p) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(std::string("config parse error: ") + e.what());
    }
    const json& solver = doc.contains("solver") ? doc.at("solver") : doc;
    if (solver.contains("p")) p = solver.at("p").get<double>();
    if (solver.contains("tol")) cfg.solver_tol = solver.at("tol").get<double>();
    if (solver.contains("max_iter")) cfg.solver_max_iter = solver.at("max_iter").get<int>();
    if (solver.contains("eps_reg_initial"))
        cfg.eps_reg_initial = solver.at("eps_reg_initial").get<double>();
    if (solver.contains("eps_reg_stages"))
        cfg.eps_reg_stages = solver.at("eps_reg_stages").get<int>();
}

int cmd_approximate(const CommonOptions& opt, double eps, double p, double delta, double eta,
                    double tol, const std::string& config_path) {
    const ScalarField field = load_field(opt);
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config_file(config_path, cfg, p);
    if (tol > 0) cfg.solver_tol = tol;

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);

    ApproxReport report;
    ScalarField result = field;
    if (delta > 0) {
        // run the stages explicitly when delta (and optionally eta) is given
        Step1Result s1 = step1_band_replace(field, delta, p, cfg);
        write_field_json(s1.field, (dir / "stage1_field.json").string());
        result = s1.field;
        report = std::move(s1.report);
        if (eta > 0) {
            Step2Result s2 = step2_lens_replace(s1.field, eta, s1.partition.levels, p, cfg);
            write_field_json(s2.field, (dir / "stage2_field.json").string());
            Step3Result s3 = step3_smooth_all(s2.field, s1.field, s2.lens, p, -1.0, cfg);
            for (auto& st : s2.report.stages) report.stages.push_back(std::move(st));
            for (auto& st : s3.report.stages) report.stages.push_back(std::move(st));
            report.curves = std::move(s3.report.curves);
            result = s3.field;
        }
    } else {
        ApproximateResult res = approximate(field, eps, p, cfg);
        write_field_json(res.stage1, (dir / "stage1_field.json").string());
        write_field_json(res.stage2, (dir / "stage2_field.json").string());
        report = std::move(res.report);
        result = std::move(res.field);
    }
    write_field_json(result, (dir / "final_field.json").string());
    if (opt.format == "csv") write_field_csv(result, (dir / "final_field.csv").string());
    write_report(opt, "approx_report", report.to_json());
    std::cout << (report.all_pass() ? "all assertions pass" : "ASSERTION FAILURE") << "\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monotone scalar fields on planar grids: certification, level-set topology, "
                 "p-harmonic replacement, level-curve smoothing"};
    app.require_subcommand(1);

    CommonOptions opt_mono, opt_levels, opt_coarea, opt_approx;
    std::string method = "level";
    double mono_tol = -1.0;
    CLI::App* c_mono = app.add_subcommand("check-monotone", "certify Lebesgue monotonicity");
    add_common(c_mono, opt_mono);
    c_mono->add_option("--method", method, "level or exhaustive")
        ->check(CLI::IsMember({"level", "exhaustive"}))
        ->default_val("level");
    c_mono->add_option("--tol", mono_tol, "witness tolerance (default 1e-9 * range)");

    std::vector<double> level_values;
    CLI::App* c_levels = app.add_subcommand("levelsets", "extract and classify level sets");
    add_common(c_levels, opt_levels);
    c_levels->add_option("--levels", level_values, "level values t")->delimiter(',');

    int n_levels = 64;
    double coarea_tol = 0.02;
    CLI::App* c_coarea = app.add_subcommand("coarea", "check the co-area identity");
    add_common(c_coarea, opt_coarea);
    c_coarea->add_option("--levels", n_levels, "number of integration levels")->default_val(64);
    c_coarea->add_option("--tol", coarea_tol, "rel_error threshold for --strict")
        ->default_val(0.02);

    double eps = 0.2, p = 2.0, delta = -1.0, eta = -1.0, solver_tol = -1.0;
    std::string config_path;
    CLI::App* c_approx =
        app.add_subcommand("approximate", "p-harmonic replacement and smoothing pipeline");
    add_common(c_approx, opt_approx);
    c_approx->add_option("--eps", eps, "uniform approximation budget")->default_val(0.2);
    c_approx->add_option("--p", p, "energy exponent")->default_val(2.0);
    c_approx->add_option("--delta", delta, "run stage 1 directly with this band gap");
    c_approx->add_option("--eta", eta, "stage 2 lens width (with --delta)");
    c_approx->add_option("--tol", solver_tol, "solver tolerance");
    c_approx->add_option("--config", config_path, "JSON file with a solver section");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_mono->parsed()) return cmd_check_monotone(opt_mono, method, mono_tol);
        if (c_levels->parsed()) return cmd_levelsets(opt_levels, level_values);
        if (c_coarea->parsed()) return cmd_coarea(opt_coarea, n_levels, coarea_tol);
        if (c_approx->parsed())
            return cmd_approximate(opt_approx, eps, p, delta, eta, solver_tol, config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
