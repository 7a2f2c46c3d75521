// hmg: build, analyze and stabilize small-signal models of a hybrid AC/DC
// microgrid from a declarative grid description.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmg/config.hpp"
#include "hmg/model_io.hpp"
#include "hmg/stability.hpp"
#include "hmg/textio.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using namespace hmg;

std::string sanitize_csv(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n') c = ' ';
    }
    return s;
}

void write_manifest(const std::string& command, const std::string& config_path,
                    const std::vector<std::string>& outputs, double wall_s) {
    if (outputs.empty()) return;
    JsonWriter w;
    w.begin_object();
    w.key_string("command", command);
    w.key_string("config", config_path);
    w.begin_array("outputs");
    for (const auto& o : outputs) w.array_string(o);
    w.end_array();
    w.key_string("tool_version", kVersion);
    w.key_number("wall_time_s", wall_s);
    w.end_object();
    write_text_file(outputs.front() + ".manifest.json", w.str() + "\n");
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::vector<Complex> parse_targets_file(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(path, std::string("targets parse failure: ") + e.what());
    }
    if (!j.contains("targets") || !j["targets"].is_array())
        throw ConfigError(path, "expected a 'targets' array of {re, im}");
    std::vector<Complex> out;
    for (const auto& t : j["targets"]) out.emplace_back(t.value("re", 0.0), t.value("im", 0.0));
    return out;
}

std::string eig_csv(const EigenReport& rep) {
    std::string csv = "index,re,im,damping,freq_hz\n";
    std::size_t idx = 0;
    for (const auto& e : rep.entries) {
        csv += std::to_string(idx++) + "," + fmt_g17(e.lambda.real()) + "," +
               fmt_g17(e.lambda.imag()) + "," + fmt_g17(e.damping) + "," + fmt_g17(e.freq_hz) +
               "\n";
    }
    return csv;
}

int run_model(const std::string& config_path, const std::string& scope, const std::string& out) {
    Timer timer;
    const GridConfig cfg = load_grid_config(config_path);
    const Lti model = build_scope(cfg, scope);
    write_text_file(out, to_model_json(model));
    const EigenReport rep = eigen_report(model);
    std::printf("model: n=%zu m=%zu p=%zu  %s (spectral abscissa %s)\n", model.n(), model.m(),
                model.p(), rep.stable ? "stable" : "UNSTABLE", fmt_g17(rep.spectral_abscissa).c_str());
    write_manifest("model", config_path, {out}, timer.seconds());
    return 0;
}

int run_eig(const std::string& model_path, const std::string& out) {
    Timer timer;
    const Lti model = from_model_json(read_text_file(model_path));
    const EigenReport rep = eigen_report(model);
    write_text_file(out, eig_csv(rep));
    write_manifest("eig", model_path, {out}, timer.seconds());
    return 0;
}

int run_pz(const std::string& model_path, const std::string& input, const std::string& output,
           const std::string& out) {
    Timer timer;
    const Lti model = from_model_json(read_text_file(model_path));
    const std::vector<Complex> ps = poles(model);
    std::vector<Complex> zs;
    try {
        zs = zeros_siso(model, input, output);
    } catch (const ZeroNumerator&) {
        throw; // mapped to a numeric failure by main
    }
    std::string csv = "kind,re,im\n";
    for (const Complex& p : ps)
        csv += "pole," + fmt_g17(p.real()) + "," + fmt_g17(p.imag()) + "\n";
    for (const Complex& z : zs)
        csv += "zero," + fmt_g17(z.real()) + "," + fmt_g17(z.imag()) + "\n";
    write_text_file(out, csv);
    write_manifest("pz", model_path, {out}, timer.seconds());
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& scope, double from, double to,
              double step, const std::string& out, const std::string& full_dir) {
    Timer timer;
    const GridConfig cfg = load_grid_config(config_path);
    const SweepResult sw = droop_sweep(cfg, scope, from, to, step);

    std::string csv = "m_dc,spectral_abscissa,unstable_count,rightmost_re,rightmost_im,errors\n";
    std::vector<std::string> outputs = {out};
    std::size_t ok_points = 0, idx = 0;
    for (const auto& pt : sw.points) {
        if (pt.ok) {
            ++ok_points;
            std::size_t unstable = 0;
            Complex rightmost = 0.0;
            double best = -1e300;
            for (const Complex& l : pt.eigenvalues) {
                if (l.real() > 0.0) ++unstable;
                if (l.real() > best) { best = l.real(); rightmost = l; }
            }
            csv += fmt_g17(pt.m_dc) + "," + fmt_g17(pt.spectral_abscissa) + "," +
                   std::to_string(unstable) + "," + fmt_g17(rightmost.real()) + "," +
                   fmt_g17(rightmost.imag()) + ",\n";
            if (!full_dir.empty()) {
                std::filesystem::create_directories(full_dir);
                char name[64];
                std::snprintf(name, sizeof(name), "eig_%03zu.csv", idx);
                const std::string path = full_dir + "/" + name;
                write_text_file(path, eig_csv(report_from_eigenvalues(pt.eigenvalues)));
                outputs.push_back(path);
            }
        } else {
            csv += fmt_g17(pt.m_dc) + ",,,,," + sanitize_csv(pt.error) + "\n";
        }
        ++idx;
    }
    write_text_file(out, csv);

    for (const Crossing& c : detect_crossing(sw)) {
        std::printf("crossing: m_dc in (%s, %s) kind=%s\n",
                    fmt_g17(sw.points[c.index_before].m_dc).c_str(),
                    fmt_g17(sw.points[c.index_after].m_dc).c_str(),
                    c.kind == CrossingKind::hopf ? "hopf" : "real");
    }
    std::printf("sweep: %zu points, %zu ok\n", sw.points.size(), ok_points);
    write_manifest("sweep", config_path, outputs, timer.seconds());
    return ok_points >= 1 ? 0 : 3;
}

int run_place(const std::string& model_path, const std::string& targets_path, bool auto_targets,
              double zeta, const std::string& actuation, const std::string& out) {
    Timer timer;
    const Lti model = from_model_json(read_text_file(model_path));
    std::vector<Complex> targets;
    if (auto_targets) {
        targets = propose_targets(eigen_report(model), zeta);
    } else {
        targets = parse_targets_file(targets_path);
    }
    Mat b = model.b;
    if (actuation == "full") b = Mat::identity(model.n());
    else if (actuation != "model")
        throw ConfigError("--actuation", "expected model|full");

    const PlacementResult res = place_poles(model.a, b, targets);
    const PlacementCheck check = verify_placement(model.a, b, res.f, targets);

    GainsDoc doc;
    doc.f = res.f;
    doc.targets = res.targets;
    doc.achieved = res.achieved;
    doc.max_rel_error = res.max_rel_error;
    write_text_file(out, to_gains_json(doc));
    std::printf("place: max_rel_error=%s verdict(10%%)=%s tight(1e-6)=%s cond(X)=%s\n",
                fmt_g17(check.max_rel_error).c_str(), check.pass_10pct ? "pass" : "FAIL",
                check.pass_tight ? "pass" : "fail", fmt_g17(res.conditioning).c_str());
    write_manifest("place", model_path, {out}, timer.seconds());
    return 0;
}

int run_step(const std::string& model_path, const std::string& gains_path,
             const std::string& input, double tfinal, double dt, const std::string& out) {
    Timer timer;
    Lti model = from_model_json(read_text_file(model_path));
    if (!gains_path.empty()) {
        const GainsDoc g = from_gains_json(read_text_file(gains_path));
        if (g.f.rows() != model.m() || g.f.cols() != model.n())
            throw ConfigError(gains_path, "gain shape " + std::to_string(g.f.rows()) + "x" +
                                              std::to_string(g.f.cols()) + " does not match model " +
                                              std::to_string(model.m()) + "x" +
                                              std::to_string(model.n()));
        model.a = model.a + model.b * g.f; // u = F x + v
    }
    const StepTrace tr = step_response(model, input, tfinal, dt);
    std::string csv = "t";
    for (const auto& s : model.state_names) csv += "," + s;
    csv += "\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        csv += fmt_g17(tr.times[k]);
        for (double v : tr.states[k]) csv += "," + fmt_g17(v);
        csv += "\n";
    }
    write_text_file(out, csv);
    write_manifest("step", model_path, {out}, timer.seconds());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid AC/DC microgrid small-signal modeling and pole placement"};
    app.require_subcommand(1);

    std::string config_path, model_path, out_path, scope = "hybrid";
    std::string input_label, output_label, gains_path, targets_path, full_dir;
    std::string actuation = "model";
    double from = 0, to = 0, step = 0, zeta = 0.7, tfinal = 1.0, dt = 0.0;
    bool auto_targets = false;

    auto* model_cmd = app.add_subcommand("model", "assemble a model and write it out");
    model_cmd->add_option("--config", config_path)->required();
    model_cmd->add_option("--scope", scope, "dc|ac|hybrid|converter:<name>");
    model_cmd->add_option("--out", out_path)->required();

    auto* eig_cmd = app.add_subcommand("eig", "eigenvalues with damping and frequency");
    eig_cmd->add_option("--model", model_path)->required();
    eig_cmd->add_option("--out", out_path)->required();

    auto* pz_cmd = app.add_subcommand("pz", "pole-zero map of one channel");
    pz_cmd->add_option("--model", model_path)->required();
    pz_cmd->add_option("--input", input_label)->required();
    pz_cmd->add_option("--output", output_label)->required();
    pz_cmd->add_option("--out", out_path)->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "droop-gain sweep with crossing detection");
    sweep_cmd->add_option("--config", config_path)->required();
    sweep_cmd->add_option("--scope", scope);
    sweep_cmd->add_option("--from", from)->required();
    sweep_cmd->add_option("--to", to)->required();
    sweep_cmd->add_option("--step", step)->required();
    sweep_cmd->add_option("--out", out_path)->required();
    sweep_cmd->add_option("--full-dir", full_dir, "write per-point eigenvalue tables here");

    auto* place_cmd = app.add_subcommand("place", "state-feedback pole placement");
    place_cmd->add_option("--model", model_path)->required();
    place_cmd->add_option("--targets", targets_path, "JSON file with a targets array");
    place_cmd->add_flag("--auto", auto_targets, "propose targets from the open-loop spectrum");
    place_cmd->add_option("--zeta", zeta, "damping floor for --auto");
    place_cmd->add_option("--actuation", actuation, "model|full (full: every state driven)");
    place_cmd->add_option("--out", out_path)->required();

    auto* step_cmd = app.add_subcommand("step", "step response (closed loop when gains given)");
    step_cmd->add_option("--model", model_path)->required();
    step_cmd->add_option("--gains", gains_path);
    step_cmd->add_option("--input", input_label)->required();
    step_cmd->add_option("--tfinal", tfinal)->required();
    step_cmd->add_option("--dt", dt);
    step_cmd->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" ? 0 : 2;
    }

    try {
        if (model_cmd->parsed()) return run_model(config_path, scope, out_path);
        if (eig_cmd->parsed()) return run_eig(model_path, out_path);
        if (pz_cmd->parsed()) return run_pz(model_path, input_label, output_label, out_path);
        if (sweep_cmd->parsed())
            return run_sweep(config_path, scope, from, to, step, out_path, full_dir);
        if (place_cmd->parsed()) {
            if (!auto_targets && targets_path.empty()) {
                std::fprintf(stderr, "place: one of --targets or --auto is required\n");
                return 2;
            }
            return run_place(model_path, targets_path, auto_targets, zeta, actuation, out_path);
        }
        if (step_cmd->parsed())
            return run_step(model_path, gains_path, input_label, tfinal, dt, out_path);
    } catch (const Uncontrollable& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UnknownLabel& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DimensionMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UnknownBus& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InvalidSpec& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
