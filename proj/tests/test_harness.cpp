#include "improperdim/harness/config.hpp"
#include "improperdim/harness/dataset_io.hpp"
#include "improperdim/harness/montecarlo.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace improperdim;

namespace {

const char* kPlan = R"(# comment line
m = 8
seed = 3
angles_deg = 20, 70       # trailing comment
source_variances = 5, 5
source_circularities = 0.9, 0.7
sample_counts = 200, 400
trials = 3
detectors = itc-full, itc-rr, glrt-rr
pfa_list = 0.005, 0.001
)";

ExperimentPlan random_plan(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ExperimentPlan plan;
    plan.scenario.sensor_count = 5 + rng() % 20;
    const std::size_t q = rng() % 4;
    for (std::size_t i = 0; i < q; ++i) {
        plan.scenario.angles_deg.push_back(5.0 + 40.0 * static_cast<double>(i) + 10.0 * u(rng));
        plan.scenario.sources.push_back({0.1 + 10.0 * u(rng), u(rng)});
    }
    if (rng() % 2) {
        plan.scenario.noise = NoiseSpec{NoiseKind::spatial_ar, u(rng) + 0.01, {0.3 * u(rng), -0.2 * u(rng)}};
        if (rng() % 2) plan.scenario.noise.sampling = NoiseSampling::exact;
    } else {
        plan.scenario.noise.variance = 0.5 + u(rng);
    }
    plan.scenario.steering_phase_factor = rng() % 2 ? default_steering_phase_factor : std::numbers::pi;
    std::size_t m = 50 + rng() % 50;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i) {
        plan.sample_counts.push_back(m);
        m += 1 + rng() % 500;
    }
    plan.scenario.snapshot_count = plan.sample_counts.front();
    plan.trials = 1 + rng() % 1000;
    plan.detectors = {DetectorKind::itc_rr, DetectorKind::glrt_full};
    plan.pfa_list = {u(rng) * 0.1 + 1e-6};
    if (rng() % 2) plan.r_max.fixed = 1 + rng() % 4;
    plan.box_df = rng() % 2 ? BoxDf::derived : BoxDf::printed;
    plan.base_seed = rng();
    plan.scenario.seed = plan.base_seed;
    return plan;
}

} // namespace

TEST(Config, ParsesScenario)
{
    const auto cfg = parse_scenario(
        "m = 60\nM = 1000\nseed = 9\nangles_deg = 10, 15\nsource_variances = 5, 5\n"
        "source_circularities = 1, 0.9\nnoise_kind = ar\nnoise_variance = 0.25\nar_coefficients = 0.5, 0.25\n");
    EXPECT_EQ(cfg.sensor_count, 60u);
    EXPECT_EQ(cfg.snapshot_count, 1000u);
    EXPECT_EQ(cfg.seed, 9u);
    ASSERT_EQ(cfg.sources.size(), 2u);
    EXPECT_EQ(cfg.sources[1].circularity, 0.9);
    EXPECT_EQ(cfg.noise.kind, NoiseKind::spatial_ar);
    EXPECT_EQ(cfg.noise.ar_coefficients, (std::vector<double>{0.5, 0.25}));
    EXPECT_EQ(cfg.steering_phase_factor, default_steering_phase_factor);
    EXPECT_EQ(parse_scenario(serialize_scenario(cfg)), cfg);
}

TEST(Config, ScenarioErrors)
{
    EXPECT_THROW(parse_scenario("M = 10\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\nm = 5\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = four\nM = 10\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\njust text\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\nangles_deg = 10, 20\nsource_circularities = 0.5\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\nnoise_kind = ar\nar_coefficients = -2\n"), ConfigError);
    EXPECT_THROW(parse_scenario("m = 4\nM = 10\nnoise_kind = pink\n"), ConfigError);
}

TEST(Config, ParsesPlan)
{
    const auto plan = parse_plan(kPlan);
    EXPECT_EQ(plan.scenario.sensor_count, 8u);
    EXPECT_EQ(plan.scenario.sources.size(), 2u);
    EXPECT_EQ(plan.sample_counts, (std::vector<std::size_t>{200, 400}));
    EXPECT_EQ(plan.trials, 3u);
    ASSERT_EQ(plan.detectors.size(), 3u);
    EXPECT_EQ(plan.detectors[2], DetectorKind::glrt_rr);
    EXPECT_EQ(plan.pfa_list, (std::vector<double>{0.005, 0.001}));
    EXPECT_FALSE(plan.r_max.fixed);
    EXPECT_EQ(plan.base_seed, 3u);
    EXPECT_EQ(plan.box_df, BoxDf::derived);
}

TEST(Config, PlanRoundTripProperty)
{
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 200; ++rep) {
        const ExperimentPlan plan = random_plan(rng);
        const ExperimentPlan once = parse_plan(serialize_plan(plan));
        EXPECT_EQ(once, plan) << serialize_plan(plan);
        EXPECT_EQ(parse_plan(serialize_plan(once)), once);
    }
    const auto parsed = parse_plan(kPlan);
    EXPECT_EQ(parse_plan(serialize_plan(parsed)), parsed);
}

TEST(Config, PlanErrors)
{
    const std::string base = "m = 8\ndetectors = itc-rr\n";
    EXPECT_THROW(parse_plan(base), ConfigError); // no sample_counts
    EXPECT_THROW(parse_plan(base + "sample_counts = 300, 200\n"), ConfigError);
    EXPECT_THROW(parse_plan(base + "sample_counts = 100\ntrials = 0\n"), ConfigError);
    EXPECT_THROW(parse_plan("m = 8\nsample_counts = 100\ndetectors = glrt-rr\n"), ConfigError);
    EXPECT_THROW(parse_plan("m = 8\nsample_counts = 100\ndetectors = glrt-rr\npfa_list = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_plan("m = 8\nsample_counts = 100\ndetectors = ncpca\n"), ConfigError);
    EXPECT_THROW(parse_plan(base + "sample_counts = 100\nbox_df = other\n"), ConfigError);
}

TEST(Dataset, RoundTripIsBitExact)
{
    ScenarioConfig cfg = reference_scenario(NoiseKind::spatial_ar, 3, 1);
    cfg.sensor_count = 6;
    cfg.angles_deg.resize(2);
    cfg.sources.resize(2);
    const DataMatrix x = generate_scenario(cfg);
    std::stringstream buf;
    write_dataset(buf, x);
    const std::string text = buf.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "improperdim v1 m=6 M=3");
    const DataMatrix y = read_dataset(buf);
    EXPECT_EQ(y.channels(), 6u);
    EXPECT_EQ(y.snapshots(), 3u);
    EXPECT_TRUE((x.samples().array() == y.samples().array()).all());

    std::stringstream again;
    write_dataset(again, y);
    EXPECT_EQ(again.str(), text);
}

TEST(Dataset, SeventeenDigitFields)
{
    ComplexMatrix s(1, 1);
    s(0, 0) = Complex(0.1, -1e-300);
    std::stringstream buf;
    write_dataset(buf, DataMatrix(s));
    EXPECT_NE(buf.str().find("0.10000000000000001 -1e-300\n"), std::string::npos) << buf.str();
}

TEST(Dataset, MalformedFiles)
{
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return read_dataset(in);
    };
    EXPECT_THROW(read(""), DatasetError);
    EXPECT_THROW(read("hello\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=2\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=0 M=1\n\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=2\n1 2\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=1\n1\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=1\n1 2 3\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=1\n1 x\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=1\n1 nan\n"), DatasetError);
    EXPECT_THROW(read("improperdim v1 m=1 M=1\n1 2\n3 4\n"), DatasetError);
    EXPECT_NO_THROW(read("improperdim v1 m=1 M=1\r\n1 2\r\n"));
}

TEST(RunDetector, ProperNoiseGivesZero)
{
    ScenarioConfig cfg;
    cfg.sensor_count = 20;
    cfg.snapshot_count = 600;
    cfg.seed = 7;
    const DataMatrix x = generate_scenario(cfg);
    for (auto kind : {DetectorKind::itc_full, DetectorKind::itc_rr, DetectorKind::glrt_full, DetectorKind::glrt_rr}) {
        EXPECT_EQ(run_detector(x, kind).estimate, 0u) << to_string(kind);
    }
}

TEST(RunDetector, InfeasibleRMax)
{
    ScenarioConfig cfg;
    cfg.sensor_count = 8;
    cfg.snapshot_count = 10;
    const DataMatrix x = generate_scenario(cfg);
    DetectorOptions opts;
    opts.r_max = 10;
    EXPECT_THROW(run_detector(x, DetectorKind::glrt_rr, opts), InfeasibleOptions);
    opts.r_max = 9;
    EXPECT_THROW(run_detector(x, DetectorKind::itc_rr, opts), InfeasibleOptions);
    opts.r_max = 0;
    EXPECT_THROW(run_detector(x, DetectorKind::itc_rr, opts), InfeasibleOptions);
    opts.r_max = 3;
    EXPECT_NO_THROW(run_detector(x, DetectorKind::itc_rr, opts));
    EXPECT_NO_THROW(run_detector(x, DetectorKind::itc_full, opts));
}

TEST(MonteCarlo, SingleTrialRow)
{
    ExperimentPlan plan = parse_plan(kPlan);
    plan.trials = 1;
    plan.sample_counts = {300};
    plan.detectors = {DetectorKind::itc_rr};
    const auto rows = run_montecarlo(plan, 1);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].p_detect == 0.0 || rows[0].p_detect == 1.0);
    EXPECT_EQ(rows[0].snapshots, 300u);
    EXPECT_EQ(rows[0].trials, 1u);
    EXPECT_FALSE(rows[0].p_fa);
}

TEST(MonteCarlo, RowsAndExactMatchCounting)
{
    const ExperimentPlan plan = parse_plan(kPlan);
    const auto variants = expand_variants(plan);
    ASSERT_EQ(variants.size(), 4u); // itc-full, itc-rr, glrt-rr x 2
    const auto rows = run_montecarlo(plan, 1);
    ASSERT_EQ(rows.size(), 8u);
    // Recount by hand from run_trial.
    for (std::size_t v = 0; v < variants.size(); ++v) {
        for (std::size_t mi = 0; mi < plan.sample_counts.size(); ++mi) {
            std::size_t hits = 0;
            for (std::size_t t = 0; t < plan.trials; ++t) {
                const auto out = run_trial(plan, variants, plan.sample_counts[mi], t);
                hits += out[v].estimate == 2 ? 1 : 0;
            }
            const auto& row = rows[v * plan.sample_counts.size() + mi];
            EXPECT_EQ(row.detector, to_string(variants[v].kind));
            EXPECT_DOUBLE_EQ(row.p_detect, static_cast<double>(hits) / 3.0);
        }
    }
}

TEST(MonteCarlo, IndependentOfThreadCount)
{
    ExperimentPlan plan = parse_plan(kPlan);
    plan.trials = 7;
    const auto serial = run_montecarlo(plan, 1);
    const auto parallel = run_montecarlo(plan, 4);
    std::ostringstream a, b;
    write_csv(a, serial);
    write_csv(b, parallel);
    EXPECT_EQ(a.str(), b.str());
}

TEST(MonteCarlo, CsvFormat)
{
    std::vector<CurveRow> rows{{"itc-rr", std::nullopt, 1000, 500, 0.984, 12.5}, {"glrt-rr", 0.005, 200, 10, 1.0, 4}};
    std::ostringstream out;
    write_csv(out, rows);
    EXPECT_EQ(out.str(), "detector,p_fa,M,trials,p_detect,mean_selected_rank\n"
                         "itc-rr,,1000,500,0.984,12.5\n"
                         "glrt-rr,0.005,200,10,1,4\n");
}

TEST(MonteCarlo, InfeasibleFixedRank)
{
    ExperimentPlan plan = parse_plan(kPlan);
    plan.r_max.fixed = 9;
    EXPECT_THROW(run_montecarlo(plan, 1), InfeasibleOptions);
}

TEST(MonteCarlo, TrialSeedsDiffer)
{
    EXPECT_NE(trial_seed(1, 100, 0), trial_seed(1, 100, 1));
    EXPECT_NE(trial_seed(1, 100, 0), trial_seed(1, 200, 0));
    EXPECT_NE(trial_seed(1, 100, 0), trial_seed(2, 100, 0));
    EXPECT_EQ(trial_seed(1, 100, 0), trial_seed(1, 100, 0));
}
