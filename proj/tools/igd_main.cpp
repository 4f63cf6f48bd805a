#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "igd/errors.hpp"
#include "igd/serialize.hpp"

namespace fs = std::filesystem;

namespace {

igd::LossWeights parse_weights_csv(const std::string& csv) {
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string item =
            csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw igd::ParseError("weights", "'" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (vals.size() != 5) {
        throw igd::ParseError("weights", "expected five comma-separated numbers: det,abs,inner,ic,ik");
    }
    igd::LossWeights w;
    w.w_det = vals[0];
    w.w_abs_depth = vals[1];
    w.w_inner_depth = vals[2];
    w.w_ic = vals[3];
    w.w_ik = vals[4];
    return w;
}

std::string out_path(const std::string& dir, const char* name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

void save_and_report(const std::string& path, const igd::Json& doc) {
    igd::save_file(path, doc);
    std::cout << "wrote " << path << "\n";
}

struct GenArgs {
    std::string config, out = ".", emit_student;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void run_gen(const GenArgs& a) {
    igd::SceneSpec spec;
    if (!a.config.empty()) spec = igd::scene_spec_from_json(igd::load_file(a.config));
    if (a.seed_given) spec.seed = a.seed;
    const igd::Scene scene = igd::gen_scene(spec);
    save_and_report(out_path(a.out, "scene.json"), igd::to_json(igd::SceneDoc{spec, scene}));
    if (!a.emit_student.empty()) {
        const igd::StudentState state =
            igd::init_student_state(scene, spec, igd::parse_init_mode(a.emit_student), 0.1);
        save_and_report(out_path(a.out, "student.json"), igd::to_json(state));
    }
}

struct LossesArgs {
    std::string scene, student, init = "uniform", config, weights, out = ".";
};

void run_losses(const LossesArgs& a) {
    const igd::SceneDoc doc = igd::scene_doc_from_json(igd::load_file(a.scene));
    igd::FitConfig cfg;
    if (!a.config.empty()) cfg = igd::fit_config_from_json(igd::load_file(a.config));
    if (!a.weights.empty()) cfg.weights = parse_weights_csv(a.weights);
    const igd::StudentState state =
        a.student.empty()
            ? igd::init_student_state(doc.scene, doc.spec, igd::parse_init_mode(a.init),
                                      cfg.init_noise_amplitude)
            : igd::student_state_from_json(igd::load_file(a.student));
    const igd::SceneBindings bindings =
        igd::bind_scene(doc.scene, doc.spec, cfg.normalize_keypoints);
    const igd::LossReport report =
        igd::eval_losses(doc.scene, doc.spec, bindings, state, cfg.weights);
    save_and_report(out_path(a.out, "losses.json"), igd::to_json(report));
}

struct FitArgs {
    std::string scene, student, config, weights, out = ".";
    int steps = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
    bool steps_given = false, lr_given = false, seed_given = false;
};

void run_fit(const FitArgs& a) {
    const igd::SceneDoc doc = igd::scene_doc_from_json(igd::load_file(a.scene));
    igd::FitConfig cfg;
    if (!a.config.empty()) cfg = igd::fit_config_from_json(igd::load_file(a.config));
    if (!a.weights.empty()) cfg.weights = parse_weights_csv(a.weights);
    if (a.steps_given) cfg.steps = a.steps;
    if (a.lr_given) cfg.learning_rate = a.lr;
    if (a.seed_given) cfg.seed = a.seed;

    igd::FitTrace trace;
    if (a.student.empty()) {
        trace = igd::distill_fit(doc.scene, doc.spec, cfg);
    } else {
        const igd::StudentState start =
            igd::student_state_from_json(igd::load_file(a.student));
        trace = igd::distill_fit(doc.scene, doc.spec, cfg, start);
    }
    save_and_report(out_path(a.out, "trace.json"), igd::to_json(trace));
    save_and_report(out_path(a.out, "report.json"), igd::to_json(trace.records.back().report));
    save_and_report(out_path(a.out, "final_student.json"), igd::to_json(trace.final_state));
    if (trace.diverged) std::cout << "fit diverged; trace is marked accordingly\n";
}

struct GradcheckArgs {
    std::string out = ".";
    std::uint64_t seed = 7;
    int instances = 5;
    int coords = 30;
    double epsilon = 1e-5;
};

void run_gradcheck(const GradcheckArgs& a) {
    const std::vector<igd::GradCheckRow> rows =
        igd::gradcheck_suite(a.seed, a.instances, a.coords, a.epsilon);
    std::printf("%-16s %9s %7s %14s\n", "loss", "instances", "coords", "max-rel-error");
    for (const igd::GradCheckRow& r : rows) {
        std::printf("%-16s %9d %7d %14.3e\n", igd::to_string(r.kind).c_str(), r.instances,
                    r.coords_per_instance, r.max_rel_error);
    }
    save_and_report(out_path(a.out, "gradcheck.json"), igd::to_json(rows));
}

struct MetricsArgs {
    std::string pred, gt, out = ".";
};

void run_metrics(const MetricsArgs& a) {
    const std::vector<double> pred = igd::depth_list_from_json(igd::load_file(a.pred));
    const std::vector<double> gt = igd::depth_list_from_json(igd::load_file(a.gt));
    save_and_report(out_path(a.out, "metrics.json"), igd::to_json(igd::depth_metrics(pred, gt)));
}

void print_error(const std::string& field, const std::string& message) {
    igd::Json err = igd::Json::object();
    err["error"] = igd::Json{{"field", field}, {"message", message}};
    std::cerr << igd::to_text(err);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inner-geometry distillation pipeline: synthetic scenes, losses, fitting"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic scene file");
    gen->add_option("--config", gen_args.config, "Scene-spec file (defaults apply otherwise)");
    CLI::Option* gen_seed = gen->add_option("--seed", gen_args.seed, "Override the spec seed");
    gen->add_option("--out", gen_args.out, "Output directory");
    gen->add_option("--emit-student", gen_args.emit_student,
                    "Also write an initial student state (uniform|noisy-teacher|random)");

    LossesArgs losses_args;
    CLI::App* losses = app.add_subcommand("losses", "Evaluate all loss terms on a student state");
    losses->add_option("--scene", losses_args.scene, "Scene file")->required();
    losses->add_option("--student", losses_args.student, "Student-state file");
    losses->add_option("--init", losses_args.init,
                       "Built-in init mode when no student file is given");
    losses->add_option("--config", losses_args.config, "Fit-config file (weights etc.)");
    losses->add_option("--weights", losses_args.weights, "det,abs,inner,ic,ik");
    losses->add_option("--out", losses_args.out, "Output directory");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Gradient-descent the student against the losses");
    fit->add_option("--scene", fit_args.scene, "Scene file")->required();
    fit->add_option("--student", fit_args.student, "Start from this student state");
    fit->add_option("--config", fit_args.config, "Fit-config file");
    fit->add_option("--weights", fit_args.weights, "det,abs,inner,ic,ik");
    CLI::Option* fit_steps = fit->add_option("--steps", fit_args.steps, "Override step count");
    CLI::Option* fit_lr = fit->add_option("--lr", fit_args.lr, "Override learning rate");
    CLI::Option* fit_seed = fit->add_option("--seed", fit_args.seed, "Override config seed");
    fit->add_option("--out", fit_args.out, "Output directory");

    GradcheckArgs gc_args;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
    gradcheck->add_option("--seed", gc_args.seed, "Instance seed");
    gradcheck->add_option("--instances", gc_args.instances, "Random instances per loss");
    gradcheck->add_option("--coords", gc_args.coords, "Coordinates per instance");
    gradcheck->add_option("--epsilon", gc_args.epsilon, "Central difference step");
    gradcheck->add_option("--out", gc_args.out, "Output directory");

    MetricsArgs metrics_args;
    CLI::App* metrics = app.add_subcommand("metrics", "Depth metric suite over paired depth lists");
    metrics->add_option("--pred", metrics_args.pred, "Predicted depth-list file")->required();
    metrics->add_option("--gt", metrics_args.gt, "Ground-truth depth-list file")->required();
    metrics->add_option("--out", metrics_args.out, "Output directory");

    try {
        app.parse(argc, argv);
        gen_args.seed_given = gen_seed->count() > 0;
        fit_args.steps_given = fit_steps->count() > 0;
        fit_args.lr_given = fit_lr->count() > 0;
        fit_args.seed_given = fit_seed->count() > 0;

        if (gen->parsed()) run_gen(gen_args);
        if (losses->parsed()) run_losses(losses_args);
        if (fit->parsed()) run_fit(fit_args);
        if (gradcheck->parsed()) run_gradcheck(gc_args);
        if (metrics->parsed()) run_metrics(metrics_args);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const igd::ParseError& e) {
        print_error(e.field(), e.what());
        return 2;
    } catch (const std::domain_error& e) {
        print_error("", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        print_error("", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("", e.what());
        return 1;
    }
}
