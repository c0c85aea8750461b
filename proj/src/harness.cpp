#include "fdc/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "fdc/errors.hpp"

namespace fdc {

namespace {

constexpr const char* kVersion = "fdc 0.1.0";

std::string fmt(double v, int digits = 6) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

double vec_mean(const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double vec_se(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = vec_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

const char* classifier_name(ClassifierKind c) {
    switch (c) {
        case ClassifierKind::oracle: return "oracle";
        case ClassifierKind::fqda: return "fqda";
        case ClassifierKind::sfqda: return "sfqda";
        case ClassifierKind::fdnn: return "fdnn";
        case ClassifierKind::sfdnn: return "sfdnn";
    }
    return "?";
}

ClassifierKind classifier_from_name(const std::string& name) {
    if (name == "oracle") return ClassifierKind::oracle;
    if (name == "fqda") return ClassifierKind::fqda;
    if (name == "sfqda") return ClassifierKind::sfqda;
    if (name == "fdnn") return ClassifierKind::fdnn;
    if (name == "sfdnn") return ClassifierKind::sfdnn;
    throw std::invalid_argument("unknown classifier: " + name);
}

const char* score_scale_name(ScoreScale s) {
    return s == ScoreScale::variance ? "variance" : "stddev";
}

ScoreScale score_scale_from_name(const std::string& name) {
    if (name == "variance") return ScoreScale::variance;
    if (name == "stddev") return ScoreScale::stddev;
    throw std::invalid_argument("unknown score scale: " + name);
}

PopulationPair effective_population(const PopulationPair& preset, ScoreScale scale) {
    PopulationPair pop = preset;
    if (scale == ScoreScale::stddev) {
        pop.lambda1 = preset.lambda1.array().square();
        if (pop.score_law2 != ScoreLaw::student_t)
            pop.lambda2 = preset.lambda2.array().square();
    }
    return pop;
}

void ExperimentSpec::validate() const {
    if (repetitions < 1) throw std::invalid_argument("ExperimentSpec: repetitions must be >= 1");
    if (test_size < 1) throw std::invalid_argument("ExperimentSpec: test size must be >= 1");
    if (n_per_class < 2) throw std::invalid_argument("ExperimentSpec: n per class must be >= 2");
    if (grid_m && *grid_m < 1) throw std::invalid_argument("ExperimentSpec: grid_m must be >= 1");
    if (classifiers.empty()) throw std::invalid_argument("ExperimentSpec: no classifiers");
    if (dataset_path.empty() && (model_id < 1 || model_id > 5))
        throw std::invalid_argument("ExperimentSpec: model id must be in 1..5");
    for (ClassifierKind c : classifiers) {
        const bool sampled = c == ClassifierKind::sfqda || c == ClassifierKind::sfdnn;
        if (sampled && dataset_path.empty() && !grid_m)
            throw std::invalid_argument("ExperimentSpec: sampled classifiers need grid_m");
        if (!dataset_path.empty() && !sampled)
            throw std::invalid_argument(
                "ExperimentSpec: datasets support the sampled classifiers only");
    }
}

namespace {

struct RepOutcome {
    std::vector<double> risk_pct;   // per classifier slot, NaN when failed
    std::vector<double> seconds;
    std::vector<bool> failed;
    double oracle_paired_pct = std::numeric_limits<double>::quiet_NaN();
};

struct PresetContext {
    PopulationPair pop;
    int j_zeta = 0;                    // zeta width shared by sampled classifiers
    std::optional<DesignMatrix> design;
    std::optional<Eigen::VectorXd> grid;
};

int fdnn_input_dim(const ExperimentSpec& spec, int available) {
    const NetArch sized = size_arch(spec.fdnn.mode, spec.n_per_class, spec.grid_m, spec.fdnn.nu2,
                                    spec.fdnn.nu1, spec.fdnn.c);
    return std::min(sized.input_dim, available);
}

NetArch resolve_arch(const ExperimentSpec& spec, int input_dim) {
    NetArch arch = size_arch(spec.fdnn.mode, spec.n_per_class, spec.grid_m, spec.fdnn.nu2,
                             spec.fdnn.nu1, spec.fdnn.c);
    if (arch.input_dim != input_dim)
        arch = NetArch::uniform(arch.depth, input_dim, arch.widths[1], arch.sparsity,
                                arch.weight_bound);
    if (!spec.fdnn.enforce_sparsity) arch.sparsity = arch.parameter_count();
    return arch;
}

PresetContext make_preset_context(const ExperimentSpec& spec) {
    PresetContext ctx;
    ctx.pop = effective_population(model_preset(spec.model_id), spec.score_scale);
    const bool any_sampled =
        std::any_of(spec.classifiers.begin(), spec.classifiers.end(), [](ClassifierKind c) {
            return c == ClassifierKind::sfqda || c == ClassifierKind::sfdnn;
        });
    if (spec.grid_m && any_sampled) {
        const int m = *spec.grid_m;
        int need = 1;
        for (ClassifierKind c : spec.classifiers) {
            if (c == ClassifierKind::sfqda) {
                int cap = 0;
                if (!spec.j_selection.j_grid.empty())
                    cap = *std::max_element(spec.j_selection.j_grid.begin(),
                                            spec.j_selection.j_grid.end());
                else
                    cap = default_j_grid(2 * spec.n_per_class, m, m).back();
                need = std::max(need, cap);
            }
            if (c == ClassifierKind::sfdnn) need = std::max(need, fdnn_input_dim(spec, m));
        }
        ctx.j_zeta = std::min(need, m);
        ctx.grid = make_grid(m, spec.grid_kind);
        ctx.design = build_design_on_grid(*ctx.grid, ctx.j_zeta, BasisKind::fourier);
    }
    return ctx;
}

Eigen::VectorXi label_vector(int n1, int n2) {
    Eigen::VectorXi y(n1 + n2);
    y.head(n1).setConstant(1);
    y.tail(n2).setConstant(2);
    return y;
}

RepOutcome run_rep_preset(const ExperimentSpec& spec, const PresetContext& ctx, int rep) {
    const RngStream rep_stream = RngStream(spec.seed).child("rep").child(static_cast<std::uint64_t>(rep));
    RngStream data = rep_stream.child("data");

    const int n = spec.n_per_class;
    const Eigen::MatrixXd train1 = draw_score_matrix(ctx.pop, 1, n, data);
    const Eigen::MatrixXd train2 = draw_score_matrix(ctx.pop, 2, n, data);
    const int t1 = static_cast<int>(std::lround(ctx.pop.pi1 * spec.test_size));
    const int t2 = spec.test_size - t1;
    const Eigen::MatrixXd test1 = draw_score_matrix(ctx.pop, 1, t1, data);
    const Eigen::MatrixXd test2 = draw_score_matrix(ctx.pop, 2, t2, data);
    Eigen::MatrixXd test_scores(spec.test_size, ctx.pop.j_model());
    test_scores << test1, test2;
    const Eigen::VectorXi test_labels = label_vector(t1, t2);

    // paired oracle risk on the same test draw
    RepOutcome out;
    {
        int errors = 0;
        for (int i = 0; i < spec.test_size; ++i)
            if (classify_bayes(ctx.pop, test_scores.row(i).transpose()) != test_labels[i]) ++errors;
        out.oracle_paired_pct = 100.0 * errors / spec.test_size;
    }

    // sampled-data features
    Eigen::MatrixXd zeta1, zeta2, zeta_test;
    if (ctx.design) {
        zeta1 = project_scores_rows(synthesize_curves(ctx.pop, train1, *ctx.grid), *ctx.design,
                                    spec.projection);
        zeta2 = project_scores_rows(synthesize_curves(ctx.pop, train2, *ctx.grid), *ctx.design,
                                    spec.projection);
        zeta_test = project_scores_rows(synthesize_curves(ctx.pop, test_scores, *ctx.grid),
                                        *ctx.design, spec.projection);
    }

    out.risk_pct.assign(spec.classifiers.size(), std::numeric_limits<double>::quiet_NaN());
    out.seconds.assign(spec.classifiers.size(), 0.0);
    out.failed.assign(spec.classifiers.size(), false);

    for (std::size_t ci = 0; ci < spec.classifiers.size(); ++ci) {
        const ClassifierKind kind = spec.classifiers[ci];
        const auto t_start = std::chrono::steady_clock::now();
        try {
            switch (kind) {
                case ClassifierKind::oracle:
                    out.risk_pct[ci] = out.oracle_paired_pct;
                    break;
                case ClassifierKind::fqda: {
                    RngStream cv = rep_stream.child("cv-fqda");
                    const int j = select_j(spec.j_selection, n, std::nullopt, ctx.pop.j_model(),
                                           &train1, &train2, &cv);
                    const QdaModel m = fit_qda_scores(train1, train2, j, QdaMode::fqda);
                    out.risk_pct[ci] = 100.0 * risk(m, test_scores, test_labels, 1).risk;
                    break;
                }
                case ClassifierKind::sfqda: {
                    RngStream cv = rep_stream.child("cv-sfqda");
                    const int j = select_j(spec.j_selection, n, spec.grid_m, ctx.j_zeta, &zeta1,
                                           &zeta2, &cv);
                    const QdaModel m = fit_qda_scores(zeta1, zeta2, j, QdaMode::sfqda);
                    out.risk_pct[ci] = 100.0 * risk(m, zeta_test, test_labels, 1).risk;
                    break;
                }
                case ClassifierKind::fdnn:
                case ClassifierKind::sfdnn: {
                    const bool sampled = kind == ClassifierKind::sfdnn;
                    const Eigen::MatrixXd& s1 = sampled ? zeta1 : train1;
                    const Eigen::MatrixXd& s2 = sampled ? zeta2 : train2;
                    const Eigen::MatrixXd& st = sampled ? zeta_test : test_scores;
                    const int avail = static_cast<int>(s1.cols());
                    const int jd = fdnn_input_dim(spec, avail);
                    const NetArch arch = resolve_arch(spec, jd);
                    Eigen::MatrixXd x(s1.rows() + s2.rows(), jd);
                    x << s1.leftCols(jd), s2.leftCols(jd);
                    Eigen::VectorXi y(x.rows());
                    y.head(s1.rows()).setConstant(1);
                    y.tail(s2.rows()).setConstant(-1);
                    TrainConfig cfg = spec.fdnn.train;
                    cfg.seed = rep_stream.child(sampled ? "sfdnn" : "fdnn").seed();
                    const TrainResult tr = train(x, y, arch, cfg);
                    out.risk_pct[ci] = 100.0 * dnn_risk(tr.model, st, test_labels, 1).risk;
                    break;
                }
            }
        } catch (const std::exception&) {
            out.failed[ci] = true;
        }
        out.seconds[ci] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    }
    return out;
}

RepOutcome run_rep_dataset(const ExperimentSpec& spec, const Dataset& data, int rep) {
    const RngStream rep_stream = RngStream(spec.seed).child("rep").child(static_cast<std::uint64_t>(rep));

    std::vector<int> idx1, idx2;
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        (*data.samples[i].label == 1 ? idx1 : idx2).push_back(static_cast<int>(i));
    const int n = spec.n_per_class;
    if (static_cast<int>(idx1.size()) <= n || static_cast<int>(idx2.size()) <= n)
        throw DataError("run_experiment: dataset too small for n per class");
    RngStream split_rng = rep_stream.child("split");
    split_rng.shuffle(idx1);
    split_rng.shuffle(idx2);

    const int m = static_cast<int>(data.grid.size());
    const ProjectionMode projection = spec.projection;
    int need = 1;
    for (ClassifierKind c : spec.classifiers) {
        if (c == ClassifierKind::sfqda) {
            int cap = spec.j_selection.j_grid.empty()
                          ? default_j_grid(2 * n, m, m).back()
                          : *std::max_element(spec.j_selection.j_grid.begin(),
                                              spec.j_selection.j_grid.end());
            need = std::max(need, cap);
        }
        if (c == ClassifierKind::sfdnn) need = std::max(need, fdnn_input_dim(spec, m));
    }
    const int j_zeta = std::min(need, m);
    const DesignMatrix design = build_design_on_grid(data.grid, j_zeta, BasisKind::fourier);

    auto rows_of = [&](const std::vector<int>& ids, int lo, int hi) {
        Eigen::MatrixXd out(hi - lo, m);
        for (int i = lo; i < hi; ++i)
            out.row(i - lo) = data.samples[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])].values.transpose();
        return out;
    };
    const Eigen::MatrixXd zeta1 =
        project_scores_rows(rows_of(idx1, 0, n), design, projection);
    const Eigen::MatrixXd zeta2 =
        project_scores_rows(rows_of(idx2, 0, n), design, projection);
    const Eigen::MatrixXd test1 =
        project_scores_rows(rows_of(idx1, n, static_cast<int>(idx1.size())), design, projection);
    const Eigen::MatrixXd test2 =
        project_scores_rows(rows_of(idx2, n, static_cast<int>(idx2.size())), design, projection);
    Eigen::MatrixXd zeta_test(test1.rows() + test2.rows(), j_zeta);
    zeta_test << test1, test2;
    const Eigen::VectorXi test_labels =
        label_vector(static_cast<int>(test1.rows()), static_cast<int>(test2.rows()));

    RepOutcome out;
    out.risk_pct.assign(spec.classifiers.size(), std::numeric_limits<double>::quiet_NaN());
    out.seconds.assign(spec.classifiers.size(), 0.0);
    out.failed.assign(spec.classifiers.size(), false);

    for (std::size_t ci = 0; ci < spec.classifiers.size(); ++ci) {
        const ClassifierKind kind = spec.classifiers[ci];
        const auto t_start = std::chrono::steady_clock::now();
        try {
            if (kind == ClassifierKind::sfqda) {
                RngStream cv = rep_stream.child("cv-sfqda");
                const int j = select_j(spec.j_selection, n, m, j_zeta, &zeta1, &zeta2, &cv);
                const QdaModel mdl = fit_qda_scores(zeta1, zeta2, j, QdaMode::sfqda);
                out.risk_pct[ci] = 100.0 * risk(mdl, zeta_test, test_labels, 1).risk;
            } else if (kind == ClassifierKind::sfdnn) {
                const int jd = fdnn_input_dim(spec, j_zeta);
                const NetArch arch = resolve_arch(spec, jd);
                Eigen::MatrixXd x(zeta1.rows() + zeta2.rows(), jd);
                x << zeta1.leftCols(jd), zeta2.leftCols(jd);
                Eigen::VectorXi y(x.rows());
                y.head(zeta1.rows()).setConstant(1);
                y.tail(zeta2.rows()).setConstant(-1);
                TrainConfig cfg = spec.fdnn.train;
                cfg.seed = rep_stream.child("sfdnn").seed();
                const TrainResult tr = train(x, y, arch, cfg);
                out.risk_pct[ci] = 100.0 * dnn_risk(tr.model, zeta_test, test_labels, 1).risk;
            }
        } catch (const std::exception&) {
            out.failed[ci] = true;
        }
        out.seconds[ci] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    }
    return out;
}

ExperimentReport aggregate(const ExperimentSpec& spec, const std::vector<RepOutcome>& reps,
                           double oracle_pct, double oracle_se) {
    ExperimentReport report;
    report.spec = spec;
    report.oracle_risk_pct = oracle_pct;
    report.oracle_se_pct = oracle_se;
    for (std::size_t ci = 0; ci < spec.classifiers.size(); ++ci) {
        CellResult cell;
        cell.classifier = spec.classifiers[ci];
        for (const auto& r : reps) {
            cell.rep_risk_pct.push_back(r.risk_pct[ci]);
            cell.wall_seconds += r.seconds[ci];
            if (r.failed[ci]) ++cell.failed_reps;
        }
        std::vector<double> ok;
        for (double v : cell.rep_risk_pct)
            if (!std::isnan(v)) ok.push_back(v);
        cell.reps_used = static_cast<int>(ok.size());
        if (cell.classifier == ClassifierKind::oracle && !std::isnan(oracle_pct)) {
            cell.mean_risk_pct = oracle_pct;
            cell.se_pct = oracle_se;
            cell.mean_excess_pct = 0.0;
        } else {
            cell.mean_risk_pct = vec_mean(ok);
            cell.se_pct = vec_se(ok);
            cell.mean_excess_pct = std::isnan(oracle_pct)
                                       ? std::numeric_limits<double>::quiet_NaN()
                                       : cell.mean_risk_pct - oracle_pct;
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

ExperimentReport run_impl(const ExperimentSpec& spec, bool parallel) {
    spec.validate();

    std::optional<Dataset> dataset;
    std::optional<PresetContext> ctx;
    double oracle_pct = std::numeric_limits<double>::quiet_NaN();
    double oracle_se = std::numeric_limits<double>::quiet_NaN();
    if (!spec.dataset_path.empty()) {
        dataset = load_csv(spec.dataset_path);
        // zeta = M^-1 B^T x assumes an even grid; irregular designs need least squares
        if (!dataset->uniform && spec.projection == ProjectionMode::paper_faithful)
            throw DataError(
                "run_experiment: non-uniform grid; use the least_squares projection mode");
    } else {
        ctx = make_preset_context(spec);
        const RiskEstimate est = mc_bayes_risk(BayesRule::full(ctx->pop), spec.oracle_draws,
                                               RngStream(spec.seed).child("oracle"), spec.threads);
        oracle_pct = 100.0 * est.risk;
        oracle_se = 100.0 * est.se;
    }

    std::vector<RepOutcome> reps(static_cast<std::size_t>(spec.repetitions));
    auto work = [&](int r) {
        reps[static_cast<std::size_t>(r)] =
            dataset ? run_rep_dataset(spec, *dataset, r) : run_rep_preset(spec, *ctx, r);
    };

    if (parallel) {
#ifdef _OPENMP
        const int nt = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#else
        const int nt = 1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nt)
        for (int r = 0; r < spec.repetitions; ++r) work(r);
    } else {
        for (int r = 0; r < spec.repetitions; ++r) work(r);
    }
    return aggregate(spec, reps, oracle_pct, oracle_se);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) { return run_impl(spec, true); }

ExperimentReport run_experiment_serial(const ExperimentSpec& spec) { return run_impl(spec, false); }

std::string ExperimentReport::summary_csv() const {
    std::ostringstream os;
    os << "model,n_per_class,grid_m,classifier,reps_used,failed_reps,mean_risk_pct,se_pct,excess_pct\n";
    const std::string model =
        spec.dataset_path.empty() ? std::to_string(spec.model_id) : spec.dataset_path;
    for (const auto& c : cells) {
        os << model << "," << spec.n_per_class << ","
           << (spec.grid_m ? std::to_string(*spec.grid_m) : "full") << ","
           << classifier_name(c.classifier) << "," << c.reps_used << "," << c.failed_reps << ","
           << fmt(c.mean_risk_pct, 4) << "," << fmt(c.se_pct, 4) << ","
           << fmt(c.mean_excess_pct, 4) << "\n";
    }
    return os.str();
}

std::string ExperimentReport::reps_csv() const {
    std::ostringstream os;
    os << "rep,classifier,risk_pct\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        for (std::size_t r = 0; r < cells[ci].rep_risk_pct.size(); ++r)
            os << r << "," << classifier_name(cells[ci].classifier) << ","
               << fmt(cells[ci].rep_risk_pct[r], 6) << "\n";
    return os.str();
}

std::string ExperimentReport::metadata_json() const {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = spec.seed;
    j["model"] = spec.dataset_path.empty() ? std::to_string(spec.model_id) : spec.dataset_path;
    j["n_per_class"] = spec.n_per_class;
    j["grid_m"] = spec.grid_m ? nlohmann::json(*spec.grid_m) : nlohmann::json();
    j["repetitions"] = spec.repetitions;
    j["test_size"] = spec.test_size;
    j["score_scale"] = score_scale_name(spec.score_scale);
    j["grid_kind"] = grid_name(spec.grid_kind);
    j["projection"] = projection_name(spec.projection);
    j["threads"] = spec.threads;
    j["oracle_draws"] = spec.oracle_draws;
    j["oracle_risk_pct"] = oracle_risk_pct;
    std::vector<std::string> names;
    for (const auto& c : cells) names.push_back(classifier_name(c.classifier));
    j["classifiers"] = names;
    nlohmann::json walls;
    for (const auto& c : cells) walls[classifier_name(c.classifier)] = c.wall_seconds;
    j["wall_seconds"] = walls;
    return j.dump(2) + "\n";
}

// --- table reproduction ------------------------------------------------------

namespace {

struct PaperCell {
    int n, m;
    double qda, dnn;  // NaN when the paper has no value
};

// Published misclassification percentages (method columns only).
const std::map<int, std::vector<PaperCell>>& paper_tables() {
    static const std::map<int, std::vector<PaperCell>> tables = {
        {1,
         {{50, 50, 18.75, 19.46}, {100, 50, 18.54, 16.86}, {50, 40, 19.97, 19.91},
          {100, 40, 19.85, 18.58}, {50, 30, 22.17, 24.82}, {100, 30, 22.00, 18.70},
          {50, 20, 25.99, 26.04}, {100, 20, 26.04, 24.27}, {50, 10, 32.10, 28.59},
          {100, 10, 31.91, 25.24}}},
        {2,
         {{50, 50, 14.77, 18.82}, {100, 50, 14.58, 13.19}, {50, 40, 15.99, 18.52},
          {100, 40, 15.92, 12.92}, {50, 30, 18.29, 21.71}, {100, 30, 18.37, 12.95},
          {50, 20, 22.27, 24.01}, {100, 20, 22.39, 21.70}, {50, 10, 29.12, 27.74},
          {100, 10, 29.16, 27.33}}},
        {3,
         {{50, 50, 18.63, 20.02}, {100, 50, 18.06, 19.96}, {50, 40, 19.85, 22.46},
          {100, 40, 19.31, 19.34}, {50, 30, 21.79, 24.35}, {100, 30, 21.33, 20.05},
          {50, 20, 25.36, 26.07}, {100, 20, 24.16, 21.22}, {50, 10, 30.25, 26.03},
          {100, 10, 30.00, 24.13}}},
        {4,
         {{50, 50, 14.56, 21.16}, {100, 50, 14.26, 16.85}, {50, 40, 15.89, 20.42},
          {100, 40, 19.31, 20.18}, {50, 30, 18.26, 22.75}, {100, 30, 17.81, 16.29},
          {50, 20, 21.93, 22.76}, {100, 20, 21.54, 21.29}, {50, 10, 27.46, 27.73},
          {100, 10, 27.08, 24.85}}},
        {5,
         {{50, 50, 18.11, 13.20}, {100, 50, 17.11, 12.29}, {50, 40, 19.47, 13.40},
          {100, 40, 18.62, 12.35}, {50, 30, 22.14, 12.89}, {100, 30, 24.19, 12.21},
          {50, 20, 27.00, 13.00}, {100, 20, 22.75, 12.21}, {50, 10, 36.75, 23.01},
          {100, 10, 32.14, 19.52}}},
    };
    return tables;
}

double cell_tolerance(ClassifierKind c, int m) {
    if (c == ClassifierKind::sfdnn || c == ClassifierKind::fdnn) return 4.0;
    return m <= 20 ? 2.5 : 2.0;
}

}  // namespace

TableComparison reproduce_table(int table_id, TableScale scale, const ExperimentSpec& base) {
    if (table_id < 1 || table_id > 5)
        throw std::invalid_argument("reproduce_table: table id must be in 1..5");
    TableComparison cmp;
    cmp.table_id = table_id;
    cmp.scale = scale == TableScale::desk ? "desk" : "full";

    const std::vector<int> ms =
        scale == TableScale::desk ? std::vector<int>{10, 50} : std::vector<int>{10, 20, 30, 40, 50};
    const std::vector<int> ns =
        scale == TableScale::desk ? std::vector<int>{100} : std::vector<int>{50, 100};
    const bool with_dnn = table_id == 5;
    const int reps = scale == TableScale::desk ? (with_dnn ? 25 : 50) : 100;

    for (int n : ns) {
        for (int m : ms) {
            ExperimentSpec spec = base;
            spec.model_id = table_id;
            spec.dataset_path.clear();
            spec.n_per_class = n;
            spec.grid_m = m;
            spec.repetitions = reps;
            spec.classifiers = {ClassifierKind::oracle, ClassifierKind::sfqda};
            if (with_dnn) spec.classifiers.push_back(ClassifierKind::sfdnn);
            const ExperimentReport report = run_experiment(spec);

            const auto& rows = paper_tables().at(table_id);
            const auto row = std::find_if(rows.begin(), rows.end(),
                                          [&](const PaperCell& c) { return c.n == n && c.m == m; });
            for (const auto& cell : report.cells) {
                if (cell.classifier == ClassifierKind::oracle) continue;
                TableCell tc;
                tc.n = n;
                tc.m = m;
                tc.classifier = cell.classifier;
                tc.paper_pct = cell.classifier == ClassifierKind::sfqda ? row->qda : row->dnn;
                tc.measured_pct = cell.mean_risk_pct;
                tc.se_pct = cell.se_pct;
                tc.tolerance_pct = cell_tolerance(cell.classifier, m);
                tc.pass = std::abs(tc.measured_pct - tc.paper_pct) <= tc.tolerance_pct;
                cmp.cells.push_back(tc);
            }
            cmp.reports.push_back(report);
        }
    }
    return cmp;
}

std::string TableComparison::comparison_csv() const {
    std::ostringstream os;
    os << "table,scale,n,m,classifier,paper_pct,measured_pct,se_pct,tolerance_pct,pass\n";
    for (const auto& c : cells)
        os << table_id << "," << scale << "," << c.n << "," << c.m << ","
           << classifier_name(c.classifier) << "," << fmt(c.paper_pct, 2) << ","
           << fmt(c.measured_pct, 4) << "," << fmt(c.se_pct, 4) << "," << fmt(c.tolerance_pct, 2)
           << "," << (c.pass ? "yes" : "no") << "\n";
    return os.str();
}

// --- rate curves --------------------------------------------------------------

RateCurveResult rate_curve(const ExperimentSpec& base, ClassifierKind classifier,
                           const std::vector<int>& n_grid, double nu2, int reps, int test_size) {
    if (n_grid.size() < 4)
        throw std::invalid_argument("rate_curve: need at least 4 sample sizes");
    if (*std::max_element(n_grid.begin(), n_grid.end()) <
        10 * *std::min_element(n_grid.begin(), n_grid.end()))
        throw std::invalid_argument("rate_curve: n grid must span at least one decade");

    RateCurveResult result;
    result.theoretical = nu2 / (1.0 + nu2);
    if (classifier == ClassifierKind::oracle) {
        for (int n : n_grid) result.points.push_back({n, 0.0, 0.0, false});
        result.status = "oracle_baseline";
        return result;
    }

    for (int n : n_grid) {
        ExperimentSpec spec = base;
        spec.dataset_path.clear();
        spec.n_per_class = n;
        spec.repetitions = reps;
        spec.test_size = test_size;
        spec.classifiers = {ClassifierKind::oracle, classifier};
        spec.j_selection.method = JMethod::theory_full;
        spec.j_selection.nu2 = nu2;
        const ExperimentReport rep = run_experiment(spec);
        const CellResult& oracle_cell = rep.cells[0];
        const CellResult& cell = rep.cells[1];

        // paired excess per repetition: both risks come from the same test draw
        std::vector<double> excess;
        for (std::size_t r = 0; r < cell.rep_risk_pct.size(); ++r) {
            if (std::isnan(cell.rep_risk_pct[r]) || std::isnan(oracle_cell.rep_risk_pct[r]))
                continue;
            excess.push_back(cell.rep_risk_pct[r] - oracle_cell.rep_risk_pct[r]);
        }
        RateCurvePoint pt;
        pt.n = n;
        pt.mean_excess = vec_mean(excess) / 100.0;
        pt.se = vec_se(excess) / 100.0;
        result.points.push_back(pt);
    }

    // least-squares fit of log(excess) on log(log n / n)
    std::vector<double> xs, ys;
    for (auto& pt : result.points) {
        if (pt.mean_excess > 0.0) {
            pt.used_in_fit = true;
            xs.push_back(std::log(std::log(static_cast<double>(pt.n)) / pt.n));
            ys.push_back(std::log(pt.mean_excess));
        } else {
            ++result.excluded;
        }
    }
    if (xs.size() < 2) {
        result.status = "hard_fail";
        result.slope = std::numeric_limits<double>::quiet_NaN();
        return result;
    }
    const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    result.slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fit = ybar + result.slope * (xs[i] - xbar);
        rss += (ys[i] - fit) * (ys[i] - fit);
    }
    result.slope_se =
        xs.size() > 2 ? std::sqrt(rss / static_cast<double>(xs.size() - 2) / sxx) : 0.0;

    if (result.slope <= 0.0)
        result.status = "hard_fail";
    else if (result.slope < result.theoretical - 0.25 || result.slope > result.theoretical + 0.35)
        result.status = "soft_warn";
    else
        result.status = "ok";
    return result;
}

std::string RateCurveResult::to_csv() const {
    std::ostringstream os;
    os << "n,mean_excess,se,used_in_fit\n";
    for (const auto& p : points)
        os << p.n << "," << fmt(p.mean_excess, 8) << "," << fmt(p.se, 8) << ","
           << (p.used_in_fit ? "yes" : "no") << "\n";
    os << "# slope," << fmt(slope, 6) << ",se," << fmt(slope_se, 6) << ",theoretical,"
       << fmt(theoretical, 3) << ",status," << status << ",excluded," << excluded << "\n";
    return os.str();
}

// --- dataset ingestion ---------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError("load_csv: non-numeric cell '" + s + "' at line " + std::to_string(line_no));
    }
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("load_csv: empty file " + path);
    auto header = split_line(line);
    if (header.size() < 2 || header[0] != "label")
        throw DataError("load_csv: header must be 'label,t_1,...,t_M'");

    Dataset data;
    const int m = static_cast<int>(header.size()) - 1;
    data.grid.resize(m);
    for (int i = 0; i < m; ++i) data.grid[i] = parse_double(header[static_cast<std::size_t>(i) + 1], 1);
    for (int i = 0; i < m; ++i)
        if (data.grid[i] < 0.0 || data.grid[i] > 1.0 || (i > 0 && data.grid[i] <= data.grid[i - 1]))
            throw DataError("load_csv: grid must be strictly increasing within [0,1]");
    data.uniform = true;
    if (m > 2) {
        const double h = data.grid[1] - data.grid[0];
        for (int i = 2; i < m; ++i)
            if (std::abs(data.grid[i] - data.grid[i - 1] - h) > 1e-9) data.uniform = false;
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (static_cast<int>(cells.size()) != m + 1)
            throw DataError("load_csv: row with " + std::to_string(cells.size() - 1) +
                            " values (expected " + std::to_string(m) + ") at line " +
                            std::to_string(line_no));
        CurveSample s;
        s.kind = CurveSample::Kind::grid_values;
        const double lab = parse_double(cells[0], line_no);
        if (lab != 1.0 && lab != 2.0)
            throw DataError("load_csv: unknown label '" + cells[0] + "' at line " +
                            std::to_string(line_no));
        s.label = static_cast<int>(lab);
        s.values.resize(m);
        for (int i = 0; i < m; ++i) s.values[i] = parse_double(cells[static_cast<std::size_t>(i) + 1], line_no);
        data.samples.push_back(std::move(s));
    }
    return data;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_frac,
                                          std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw std::invalid_argument("split_dataset: train_frac must be in (0,1)");
    Dataset train, test;
    train.grid = test.grid = data.grid;
    train.uniform = test.uniform = data.uniform;
    RngStream rng = RngStream(seed).child("split");
    for (int label = 1; label <= 2; ++label) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < data.samples.size(); ++i)
            if (data.samples[i].label && *data.samples[i].label == label)
                idx.push_back(static_cast<int>(i));
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(
            std::lround(train_frac * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train : test).samples.push_back(data.samples[static_cast<std::size_t>(idx[i])]);
    }
    return {train, test};
}

std::string dataset_to_csv(const Dataset& data) {
    std::ostringstream os;
    os << "label";
    for (int i = 0; i < data.grid.size(); ++i) os << "," << fmt(data.grid[i], 10);
    os << "\n";
    for (const auto& s : data.samples) {
        os << (s.label ? *s.label : 0);
        for (int i = 0; i < s.values.size(); ++i) os << "," << fmt(s.values[i], 10);
        os << "\n";
    }
    return os.str();
}

}  // namespace fdc
