#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fdc/errors.hpp"
#include "fdc/harness.hpp"

using namespace fdc;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.model_id = 1;
    spec.classifiers = {ClassifierKind::oracle, ClassifierKind::sfqda};
    spec.n_per_class = 50;
    spec.grid_m = 20;
    spec.repetitions = 8;
    spec.test_size = 200;
    spec.seed = 4711;
    spec.oracle_draws = 20000;
    return spec;
}

std::string write_temp_csv(const std::string& body) {
    const std::string path = "harness_test_dataset.csv";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("experiment report is bitwise deterministic") {
    const ExperimentSpec spec = small_spec();
    const ExperimentReport a = run_experiment(spec);
    const ExperimentReport b = run_experiment(spec);
    CHECK(a.summary_csv() == b.summary_csv());
    CHECK(a.reps_csv() == b.reps_csv());
}

TEST_CASE("parallel and serial drivers produce identical reports") {
    ExperimentSpec spec = small_spec();
    spec.threads = 2;
    const ExperimentReport par = run_experiment(spec);
    const ExperimentReport ser = run_experiment_serial(spec);
    CHECK(par.summary_csv() == ser.summary_csv());
    CHECK(par.reps_csv() == ser.reps_csv());
}

TEST_CASE("adding a classifier never perturbs the others' results") {
    ExperimentSpec spec = small_spec();
    const ExperimentReport base = run_experiment(spec);
    spec.classifiers.push_back(ClassifierKind::fqda);
    const ExperimentReport more = run_experiment(spec);
    for (std::size_t i = 0; i < base.cells.size(); ++i) {
        REQUIRE(base.cells[i].classifier == more.cells[i].classifier);
        CHECK(base.cells[i].rep_risk_pct == more.cells[i].rep_risk_pct);
    }
}

TEST_CASE("oracle dominates every classifier row within noise") {
    ExperimentSpec spec = small_spec();
    spec.classifiers = {ClassifierKind::oracle, ClassifierKind::fqda, ClassifierKind::sfqda};
    spec.repetitions = 12;
    const ExperimentReport rep = run_experiment(spec);
    for (const auto& cell : rep.cells) {
        if (cell.classifier == ClassifierKind::oracle) continue;
        const double combined = std::sqrt(cell.se_pct * cell.se_pct +
                                          rep.oracle_se_pct * rep.oracle_se_pct);
        CHECK(rep.oracle_risk_pct <= cell.mean_risk_pct + 3.0 * std::max(combined, 0.2));
    }
}

TEST_CASE("sfqda risk does not degrade when sampling densifies (M=10 vs 50)") {
    ExperimentSpec spec = small_spec();
    spec.classifiers = {ClassifierKind::sfqda};
    spec.repetitions = 20;
    spec.grid_m = 10;
    const auto sparse = run_experiment(spec);
    spec.grid_m = 50;
    const auto dense = run_experiment(spec);
    const double slack = std::sqrt(sparse.cells[0].se_pct * sparse.cells[0].se_pct +
                                   dense.cells[0].se_pct * dense.cells[0].se_pct);
    CHECK(dense.cells[0].mean_risk_pct <= sparse.cells[0].mean_risk_pct + slack);
}

TEST_CASE("degenerate spec: one rep, one test sample") {
    ExperimentSpec spec = small_spec();
    spec.repetitions = 1;
    spec.test_size = 1;
    spec.classifiers = {ClassifierKind::sfqda};
    const ExperimentReport rep = run_experiment(spec);
    CHECK(rep.cells[0].se_pct == 0.0);
    const double r = rep.cells[0].mean_risk_pct;
    CHECK((r == 0.0 || r == 100.0));
}

TEST_CASE("score scale: stddev squares the preset eigenvalues") {
    const PopulationPair lit = effective_population(model_preset(1), ScoreScale::variance);
    const PopulationPair sd = effective_population(model_preset(1), ScoreScale::stddev);
    CHECK(lit.lambda1[0] == doctest::Approx(0.6));
    CHECK(sd.lambda1[0] == doctest::Approx(0.36));
    // Student-t class is untouched
    const PopulationPair m5 = effective_population(model_preset(5), ScoreScale::stddev);
    CHECK(m5.lambda2[2] == doctest::Approx(1.0));
    CHECK(m5.lambda1[0] == doctest::Approx(9.0));
}

TEST_CASE("csv loader round trip and validation") {
    const std::string good =
        "label,0.0,0.25,0.5,0.75\n"
        "1,0.1,0.2,0.3,0.4\n"
        "2,-1.0,-2.0,-3.0,-4.0\n";
    const std::string path = write_temp_csv(good);
    const Dataset d = load_csv(path);
    CHECK(d.samples.size() == 2);
    CHECK(d.uniform);
    CHECK(*d.samples[0].label == 1);
    CHECK(d.samples[1].values[3] == doctest::Approx(-4.0));

    // round trip through the writer
    const std::string again = write_temp_csv(dataset_to_csv(d));
    const Dataset d2 = load_csv(again);
    CHECK(d2.samples.size() == 2);
    CHECK(d2.samples[1].values.isApprox(d.samples[1].values));

    CHECK_THROWS_AS(load_csv("does_not_exist.csv"), DataError);
    CHECK_THROWS_AS(load_csv(write_temp_csv("label,0.0,0.5\n1,0.1\n")), DataError);   // ragged
    CHECK_THROWS_AS(load_csv(write_temp_csv("label,0.0,0.5\n3,0.1,0.2\n")), DataError);  // label
    CHECK_THROWS_AS(load_csv(write_temp_csv("label,0.5,0.0\n1,0.1,0.2\n")), DataError);  // order
    CHECK_THROWS_AS(load_csv(write_temp_csv("label,0.0,0.5\n1,abc,0.2\n")), DataError);  // numeric
    std::remove(path.c_str());
}

TEST_CASE("stratified split keeps class proportions") {
    const PopulationPair pop = model_preset(1);
    const auto samples = sample_dataset(pop, 40, 60, 15, 5);
    Dataset data;
    data.grid = make_grid(15, GridKind::offset);
    data.uniform = true;
    data.samples = samples;
    const auto [train, test] = split_dataset(data, 0.5, 77);
    int t1 = 0, t2 = 0;
    for (const auto& s : train.samples) (*s.label == 1 ? t1 : t2)++;
    CHECK(t1 == 20);
    CHECK(t2 == 30);
    CHECK(train.samples.size() + test.samples.size() == 100);
}

TEST_CASE("phoneme-shaped synthetic csv runs end to end") {
    // M=150 grid mimicking the log-periodogram layout; binary labels
    const PopulationPair pop = model_preset(2);
    const auto samples = sample_dataset(pop, 60, 60, 150, 9, GridKind::inclusive);
    Dataset data;
    data.grid = make_grid(150, GridKind::inclusive);
    data.uniform = true;
    data.samples = samples;
    const std::string path = write_temp_csv(dataset_to_csv(data));

    ExperimentSpec spec;
    spec.dataset_path = path;
    spec.classifiers = {ClassifierKind::sfqda};
    spec.n_per_class = 40;
    spec.repetitions = 3;
    spec.seed = 31;
    const ExperimentReport rep = run_experiment(spec);
    CHECK(rep.cells[0].reps_used == 3);
    CHECK(rep.cells[0].mean_risk_pct >= 0.0);
    CHECK(rep.cells[0].mean_risk_pct < 50.0);  // far better than chance
    std::remove(path.c_str());
}

TEST_CASE("rate curve: oracle baseline short-circuits") {
    ExperimentSpec spec = small_spec();
    spec.grid_m = std::nullopt;
    const RateCurveResult r =
        rate_curve(spec, ClassifierKind::oracle, {50, 100, 200, 500}, 1.0, 5, 200);
    CHECK(r.status == "oracle_baseline");
}

TEST_CASE("rate curve input validation") {
    ExperimentSpec spec = small_spec();
    spec.grid_m = std::nullopt;
    CHECK_THROWS_AS(rate_curve(spec, ClassifierKind::fqda, {50, 100, 200}, 1.0, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(rate_curve(spec, ClassifierKind::fqda, {50, 60, 70, 80}, 1.0, 5),
                    std::invalid_argument);
}
