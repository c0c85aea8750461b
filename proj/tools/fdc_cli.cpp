// Command-line front end: simulate / fit / eval / reproduce-table / rate-curve
// / diagnose. Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fdc/errors.hpp"
#include "fdc/harness.hpp"

using namespace fdc;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(trim(item)));
    return out;
}

// key=value config file mirroring the experiment spec fields
void apply_config_file(ExperimentSpec& spec, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        try {
            if (key == "model") spec.model_id = std::stoi(val);
            else if (key == "dataset") spec.dataset_path = val;
            else if (key == "n") spec.n_per_class = std::stoi(val);
            else if (key == "grid_m") spec.grid_m = val == "full" ? std::optional<int>{} : std::stoi(val);
            else if (key == "reps") spec.repetitions = std::stoi(val);
            else if (key == "test_size") spec.test_size = std::stoi(val);
            else if (key == "seed") spec.seed = std::stoull(val);
            else if (key == "threads") spec.threads = std::stoi(val);
            else if (key == "oracle_draws") spec.oracle_draws = std::stoll(val);
            else if (key == "score_scale") spec.score_scale = score_scale_from_name(val);
            else if (key == "grid_kind") spec.grid_kind = grid_from_name(val);
            else if (key == "projection") spec.projection = projection_from_name(val);
            else if (key == "classifiers") {
                spec.classifiers.clear();
                std::stringstream cs(val);
                std::string c;
                while (std::getline(cs, c, ',')) spec.classifiers.push_back(classifier_from_name(trim(c)));
            } else if (key == "j_method") {
                if (val == "cv") spec.j_selection.method = JMethod::cross_validation;
                else if (val == "theory-full") spec.j_selection.method = JMethod::theory_full;
                else if (val == "theory-sampled") spec.j_selection.method = JMethod::theory_sampled;
                else throw DataError("config: unknown j_method " + val);
            } else if (key == "k_folds") spec.j_selection.k_folds = std::stoi(val);
            else if (key == "nu1") { spec.j_selection.nu1 = std::stod(val); spec.fdnn.nu1 = std::stod(val); }
            else if (key == "nu2") { spec.j_selection.nu2 = std::stod(val); spec.fdnn.nu2 = std::stod(val); }
            else if (key == "fdnn_mode") {
                if (val == "practical6") spec.fdnn.mode = ArchMode::practical6;
                else if (val == "theory51") spec.fdnn.mode = ArchMode::theory51;
                else if (val == "theory52") spec.fdnn.mode = ArchMode::theory52;
                else throw DataError("config: unknown fdnn_mode " + val);
            } else if (key == "fdnn_c") spec.fdnn.c = std::stoi(val);
            else if (key == "fdnn_epochs") spec.fdnn.train.epochs = std::stoi(val);
            else if (key == "fdnn_batch") spec.fdnn.train.batch = std::stoi(val);
            else if (key == "fdnn_lr") spec.fdnn.train.lr = std::stod(val);
            else if (key == "fdnn_sparsity") spec.fdnn.enforce_sparsity = val == "true" || val == "1";
            else throw DataError("config: unknown key " + key);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("config line " + std::to_string(line_no) + ": bad value for " + key);
        }
    }
}

void emit_report(const ExperimentReport& report, const fs::path& out_dir,
                 const std::string& stem) {
    write_file(out_dir / (stem + "_summary.csv"), report.summary_csv());
    write_file(out_dir / (stem + "_reps.csv"), report.reps_csv());
    write_file(out_dir / (stem + "_meta.json"), report.metadata_json());
    std::cout << report.summary_csv();
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Minimax-optimal functional-data classification: simulation and benchmarks"};
    app.require_subcommand(1);

    std::string out_dir = "results";
    std::string config_path;
    ExperimentSpec spec;
    app.add_option("--seed", spec.seed, "master RNG seed");
    app.add_option("--threads", spec.threads, "worker threads (0 = all, 1 = serial)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--config", config_path, "key=value config file (spec fields)");

    std::string score_scale_s, grid_kind_s, projection_s;
    app.add_option("--score-scale", score_scale_s, "variance|stddev (default stddev)");
    app.add_option("--grid-kind", grid_kind_s, "offset|inclusive (default inclusive)");
    app.add_option("--projection", projection_s, "paper_faithful|least_squares");

    // simulate
    auto* sim = app.add_subcommand("simulate", "emit a dataset CSV from a model preset");
    int sim_n1 = 100, sim_n2 = 100, sim_m = 50;
    std::string sim_out = "dataset.csv";
    sim->add_option("--model", spec.model_id, "preset id 1..5")->required();
    sim->add_option("--n1", sim_n1, "class-1 curves");
    sim->add_option("--n2", sim_n2, "class-2 curves");
    sim->add_option("--grid-m", sim_m, "sampling points per curve");
    sim->add_option("--output", sim_out, "output CSV file name (under --out)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "train a classifier on a dataset CSV and save it");
    std::string fit_data, fit_classifier = "sfqda", fit_out = "model.txt", fit_jsel = "cv";
    int fit_j = 0;
    fit_cmd->add_option("--data", fit_data, "training CSV")->required();
    fit_cmd->add_option("--classifier", fit_classifier, "sfqda|sfdnn");
    fit_cmd->add_option("--j", fit_j, "fixed truncation level (overrides --j-select)");
    fit_cmd->add_option("--j-select", fit_jsel, "cv|theory-full|theory-sampled");
    fit_cmd->add_option("--nu1", spec.j_selection.nu1, "smoothness order for theory selection");
    fit_cmd->add_option("--nu2", spec.j_selection.nu2, "separation order for theory selection");
    fit_cmd->add_option("--model-out", fit_out, "model file name (under --out)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "risk of a saved classifier on a dataset CSV");
    std::string eval_model, eval_data;
    eval_cmd->add_option("--model-file", eval_model, "saved model")->required();
    eval_cmd->add_option("--data", eval_data, "evaluation CSV")->required();

    // reproduce-table
    auto* table_cmd = app.add_subcommand("reproduce-table", "rerun a published table and compare");
    int table_id = 1;
    std::string table_scale = "desk";
    table_cmd->add_option("--table", table_id, "table id 1..5")->required();
    table_cmd->add_option("--scale", table_scale, "desk|full");

    // rate-curve
    auto* rate_cmd = app.add_subcommand("rate-curve", "excess-risk decay slope across n");
    std::string rate_classifier = "fqda", rate_grid = "50,100,200,400,800";
    int rate_reps = 100, rate_test = 2000;
    double rate_nu2 = 1.0;
    bool rate_full_obs = true;
    rate_cmd->add_option("--model", spec.model_id, "preset id 1..5");
    rate_cmd->add_option("--classifier", rate_classifier, "oracle|fqda|sfqda|fdnn|sfdnn");
    rate_cmd->add_option("--n-grid", rate_grid, "comma-separated n values");
    rate_cmd->add_option("--reps", rate_reps, "repetitions per n");
    rate_cmd->add_option("--test-size", rate_test, "test draws per repetition");
    rate_cmd->add_option("--nu2", rate_nu2, "separation order");
    rate_cmd->add_option("--m", sim_m, "grid size for sampled classifiers");
    rate_cmd->add_flag("--sampled", [&rate_full_obs](std::int64_t) { rate_full_obs = false; },
                       "evaluate on grid observations instead of exact scores");

    // diagnose
    auto* diag_cmd = app.add_subcommand("diagnose", "membership and separation diagnostics");
    std::string diag_space = "hyper";
    double diag_radius = 10.0, diag_c0 = 0.05, diag_nu1 = 1.0, diag_nu2 = 1.0;
    diag_cmd->add_option("--model", spec.model_id, "preset id 1..5")->required();
    diag_cmd->add_option("--space", diag_space, "hyper|sobolev");
    diag_cmd->add_option("--radius", diag_radius, "radius A");
    diag_cmd->add_option("--nu1", diag_nu1, "order for mean/eigenvalue sequences");
    diag_cmd->add_option("--nu2", diag_nu2, "order for separation sequences");
    diag_cmd->add_option("--c0", diag_c0, "prior bound constant in (0, 1/2)");

    // run (generic experiment straight from flags/config)
    auto* run_cmd = app.add_subcommand("run", "run one experiment from the spec fields");
    std::string run_classifiers = "oracle,sfqda";
    run_cmd->add_option("--model", spec.model_id, "preset id 1..5");
    run_cmd->add_option("--dataset", spec.dataset_path, "dataset CSV instead of a preset");
    run_cmd->add_option("--classifiers", run_classifiers, "comma list");
    run_cmd->add_option("--n", spec.n_per_class, "training curves per class");
    int run_m = 50;
    bool run_full = false;
    run_cmd->add_option("--grid-m", run_m, "sampling points per curve");
    run_cmd->add_flag("--full-observation", run_full, "use exact scores (no grid)");
    run_cmd->add_option("--reps", spec.repetitions, "repetitions");
    run_cmd->add_option("--test-size", spec.test_size, "test draws per repetition");

    CLI11_PARSE(app, argc, argv);

    if (!config_path.empty()) apply_config_file(spec, config_path);
    if (!score_scale_s.empty()) spec.score_scale = score_scale_from_name(score_scale_s);
    if (!grid_kind_s.empty()) spec.grid_kind = grid_from_name(grid_kind_s);
    if (!projection_s.empty()) spec.projection = projection_from_name(projection_s);

    const fs::path out(out_dir);

    if (sim->parsed()) {
        const PopulationPair pop =
            effective_population(model_preset(spec.model_id), spec.score_scale);
        Dataset data;
        data.grid = make_grid(sim_m, spec.grid_kind);
        data.uniform = true;
        data.samples = sample_dataset(pop, sim_n1, sim_n2, sim_m, spec.seed, spec.grid_kind);
        write_file(out / sim_out, dataset_to_csv(data));
        std::cout << "wrote " << (out / sim_out).string() << " (" << data.samples.size()
                  << " curves, M=" << sim_m << ")\n";
        return 0;
    }

    if (fit_cmd->parsed()) {
        const Dataset data = load_csv(fit_data);
        if (!data.uniform && spec.projection == ProjectionMode::paper_faithful)
            throw DataError("fit: non-uniform grid; pass --projection least_squares");
        const int m = static_cast<int>(data.grid.size());
        std::vector<const CurveSample*> c1, c2;
        for (const auto& s : data.samples) (*s.label == 1 ? c1 : c2).push_back(&s);
        if (c1.size() < 2 || c2.size() < 2) throw DataError("fit: need two samples per class");
        const int n_min = static_cast<int>(std::min(c1.size(), c2.size()));

        std::ostringstream payload;
        if (fit_classifier == "sfqda") {
            const int j_cap = default_j_grid(static_cast<int>(data.samples.size()), m, m).back();
            const DesignMatrix design = build_design_on_grid(data.grid, j_cap, BasisKind::fourier);
            auto scores = [&](const std::vector<const CurveSample*>& cls) {
                Eigen::MatrixXd out_m(cls.size(), j_cap);
                for (std::size_t i = 0; i < cls.size(); ++i)
                    out_m.row(static_cast<Eigen::Index>(i)) =
                        project_scores(cls[i]->values, design, spec.projection).transpose();
                return out_m;
            };
            const Eigen::MatrixXd s1 = scores(c1), s2 = scores(c2);
            int j = fit_j;
            if (j == 0) {
                JSelection sel = spec.j_selection;
                sel.method = fit_jsel == "cv" ? JMethod::cross_validation
                             : fit_jsel == "theory-full" ? JMethod::theory_full
                                                         : JMethod::theory_sampled;
                RngStream cv = RngStream(spec.seed).child("fit-cv");
                j = select_j(sel, n_min, m, j_cap, &s1, &s2, &cv);
            }
            const QdaModel mdl = fit_qda_scores(s1, s2, j, QdaMode::sfqda);
            save_qda(mdl, payload);
            std::cout << "fitted sfqda with J=" << j << "\n";
        } else if (fit_classifier == "sfdnn") {
            NetArch arch = size_arch(spec.fdnn.mode, n_min, m, spec.fdnn.nu2, spec.fdnn.nu1,
                                     spec.fdnn.c);
            const int jd = std::min(arch.input_dim, m);
            arch = NetArch::uniform(arch.depth, jd, arch.widths[1], arch.sparsity,
                                    arch.weight_bound);
            if (!spec.fdnn.enforce_sparsity) arch.sparsity = arch.parameter_count();
            const DesignMatrix design = build_design_on_grid(data.grid, jd, BasisKind::fourier);
            Eigen::MatrixXd x(data.samples.size(), jd);
            Eigen::VectorXi y(data.samples.size());
            for (std::size_t i = 0; i < data.samples.size(); ++i) {
                x.row(static_cast<Eigen::Index>(i)) =
                    project_scores(data.samples[i].values, design, spec.projection).transpose();
                y[static_cast<Eigen::Index>(i)] = *data.samples[i].label == 1 ? 1 : -1;
            }
            TrainConfig cfg = spec.fdnn.train;
            cfg.seed = spec.seed;
            const TrainResult tr = train(x, y, arch, cfg);
            save_dnn(tr.model, payload);
            std::cout << "fitted sfdnn, training hinge loss " << tr.final_loss << "\n";
        } else {
            throw std::invalid_argument("fit: classifier must be sfqda or sfdnn");
        }
        std::ostringstream file;
        file << "fdc-fit-v1\n" << fit_classifier << " " << projection_name(spec.projection) << "\n"
             << payload.str();
        write_file(out / fit_out, file.str());
        std::cout << "wrote " << (out / fit_out).string() << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        std::ifstream in(eval_model);
        if (!in) throw DataError("eval: cannot open " + eval_model);
        std::string magic, kind, proj;
        in >> magic >> kind >> proj;
        if (magic != "fdc-fit-v1") throw DataError("eval: unrecognized model file");
        const ProjectionMode projection = projection_from_name(proj);
        const Dataset data = load_csv(eval_data);
        if (!data.uniform && projection == ProjectionMode::paper_faithful)
            throw DataError("eval: non-uniform grid vs paper_faithful model");

        int j = 0;
        QdaModel qda;
        DnnModel dnn;
        if (kind == "sfqda") {
            qda = load_qda(in);
            j = qda.j_used;
        } else if (kind == "sfdnn") {
            dnn = load_dnn(in);
            j = dnn.arch.input_dim;
        } else {
            throw DataError("eval: unknown model kind " + kind);
        }
        if (j > data.grid.size()) throw DataError("eval: model J exceeds dataset grid size");
        const DesignMatrix design = build_design_on_grid(data.grid, j, BasisKind::fourier);
        Eigen::MatrixXd scores(data.samples.size(), j);
        Eigen::VectorXi labels(data.samples.size());
        for (std::size_t i = 0; i < data.samples.size(); ++i) {
            if (!data.samples[i].label) throw DataError("eval: unlabeled sample in dataset");
            scores.row(static_cast<Eigen::Index>(i)) =
                project_scores(data.samples[i].values, design, projection).transpose();
            labels[static_cast<Eigen::Index>(i)] = *data.samples[i].label;
        }
        const RiskEstimate est = kind == "sfqda" ? risk(qda, scores, labels, spec.threads)
                                                 : dnn_risk(dnn, scores, labels, spec.threads);
        std::cout << "risk " << 100.0 * est.risk << "% (se " << 100.0 * est.se << " pp, n="
                  << data.samples.size() << ")\n";
        return 0;
    }

    if (table_cmd->parsed()) {
        const TableScale ts = table_scale == "full" ? TableScale::full : TableScale::desk;
        const TableComparison cmp = reproduce_table(table_id, ts, spec);
        const std::string stem = "table" + std::to_string(table_id) + "_" + table_scale;
        write_file(out / (stem + "_comparison.csv"), cmp.comparison_csv());
        for (std::size_t i = 0; i < cmp.reports.size(); ++i) {
            const auto& rep = cmp.reports[i];
            const std::string cell_stem = stem + "_n" + std::to_string(rep.spec.n_per_class) +
                                          "_m" + std::to_string(*rep.spec.grid_m);
            write_file(out / (cell_stem + "_summary.csv"), rep.summary_csv());
            write_file(out / (cell_stem + "_reps.csv"), rep.reps_csv());
            write_file(out / (cell_stem + "_meta.json"), rep.metadata_json());
        }
        std::cout << cmp.comparison_csv();
        return 0;
    }

    if (rate_cmd->parsed()) {
        if (rate_full_obs)
            spec.grid_m = std::nullopt;
        else
            spec.grid_m = sim_m;
        const RateCurveResult r = rate_curve(spec, classifier_from_name(rate_classifier),
                                             parse_int_list(rate_grid), rate_nu2, rate_reps,
                                             rate_test);
        write_file(out / "rate_curve.csv", r.to_csv());
        std::cout << r.to_csv();
        if (r.status == "hard_fail") return 3;
        return 0;
    }

    if (diag_cmd->parsed()) {
        const PopulationPair pop =
            effective_population(model_preset(spec.model_id), spec.score_scale);
        ParamSpaceSpec pss;
        pss.kind = diag_space == "sobolev" ? SpaceKind::sobolev_ball : SpaceKind::hyperrectangle;
        pss.radius = diag_radius;
        pss.nu1 = diag_nu1;
        pss.nu2 = diag_nu2;
        pss.c0 = diag_c0;
        const MembershipReport rep = check_membership(pop, pss);
        const SeparationDiagnostics sep = separation_diagnostics(pop);
        std::cout << "model " << spec.model_id << " (score scale "
                  << score_scale_name(spec.score_scale) << ")\n";
        std::cout << "separation: mean_sep=" << sep.mean_sep << " cov_sep=" << sep.cov_sep << "\n";
        std::cout << "space " << (pss.kind == SpaceKind::hyperrectangle ? "H" : "S") << "^("
                  << diag_nu1 << "," << diag_nu2 << ") radius " << diag_radius << ":\n";
        for (const auto& c : rep.conditions)
            std::cout << "  " << c.name << ": min_radius=" << c.min_radius << " "
                      << (c.pass ? "pass" : "fail") << "\n";
        std::cout << "  prior bound: " << (rep.prior_ok ? "pass" : "fail") << "\n";
        std::cout << "member: " << (rep.member ? "yes" : "no") << "\n";
        return 0;
    }

    if (run_cmd->parsed()) {
        spec.classifiers.clear();
        std::stringstream cs(run_classifiers);
        std::string c;
        while (std::getline(cs, c, ',')) spec.classifiers.push_back(classifier_from_name(trim(c)));
        spec.grid_m = run_full ? std::optional<int>{} : std::optional<int>{run_m};
        const ExperimentReport rep = run_experiment(spec);
        emit_report(rep, out, "experiment");
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
