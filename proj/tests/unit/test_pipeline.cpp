#include "helpers.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/explain/report.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/diagnose.hpp"
#include "rca/pipeline/suite.hpp"
#include "rca/sim/telemetry_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

namespace fs = std::filesystem;
using namespace rca;
using namespace rca::pipeline;

namespace {

const fs::path kQuickstart = fs::path(RCA_DATA_DIR) / "quickstart";

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

ConfigValues quickstart_values() {
    ConfigValues v;
    v.merge_ini(kQuickstart / "config.ini");
    return v;
}

// Simulates the quickstart incident into `dir` the way `rcactl simulate` does.
sim::GroundTruth simulate_into(const ConfigValues& values, const fs::path& dir) {
    const auto config = make_config(values);
    const auto topology = load_topology(config);
    const auto c = simulate_case(topology, {config.sim.template_name, config.sim.seed, config.sim.decoys}, config);
    sim::write_bundle(dir, c.bundle);
    return c.truth;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("defaults cover the whole schema") {
    const ConfigValues v;
    CHECK(v.values().size() == config_schema().size());
    for (const auto& k : config_schema()) CHECK(v.get(std::string(k.key)) == k.fallback);
    const auto c = make_config(v);
    CHECK(c.filter.threshold == 0.3);
    CHECK(c.pagerank.damping == 0.85);
    CHECK(c.ablation.cross_level);
}

TEST_CASE("unknown keys and malformed assignments are input errors") {
    ConfigValues v;
    CHECK_THROWS_AS(v.set("causal.nope", "1"), InputError);
    CHECK_THROWS_AS(v.assign("causal.threshold"), InputError);
    CHECK(message_of([&] { v.assign("gat.colour=red"); }).find("gat.colour") != std::string::npos);
}

TEST_CASE("command line assignments override the ini file") {
    const auto dir = testing::scratch_dir("ini");
    text::write_file((dir / "a.ini").string(), "; comment\n[causal]\nthreshold = 0.4\ndamping = 0.9\n[run]\nseed = 5\n");
    ConfigValues v;
    v.merge_ini(dir / "a.ini");
    v.assign("causal.threshold = 0.5");
    const auto c = make_config(v);
    CHECK(c.filter.threshold == 0.5);
    CHECK(c.pagerank.damping == 0.9);
    CHECK(c.seed == 5);
    CHECK(v.format().find("threshold = 0.5") != std::string::npos);

    text::write_file((dir / "b.ini").string(), "[causal]\nthreshhold = 0.4\n");
    const auto msg = message_of([&] { v.merge_ini(dir / "b.ini"); });
    CHECK(msg.find("b.ini") != std::string::npos);
    CHECK(msg.find("threshhold") != std::string::npos);
}

TEST_CASE("canonical dump merges back to the same values") {
    const auto dir = testing::scratch_dir("dump");
    ConfigValues v;
    v.assign("gat.hidden=8");
    v.assign("ablation.cross_level=off");
    text::write_file((dir / "c.ini").string(), v.format());
    ConfigValues w;
    w.merge_ini(dir / "c.ini");
    CHECK(w.values() == v.values());
}

TEST_CASE("out of range values name the key") {
    const std::pair<const char*, const char*> bad[] = {
        {"causal.threshold", "1.5"},    {"causal.damping", "1"},       {"prep.denoise_window", "4"},
        {"sim.template", "meteor"},     {"run.seed", "-3"},            {"gat.hidden", "0"},
        {"ablation.cross_level", "yes"}, {"causal.predictor", "oracle"}, {"sim.duration_s", "abc"},
    };
    for (const auto& [key, value] : bad) {
        ConfigValues v;
        v.set(key, value);
        const auto msg = message_of([&] { (void)make_config(v); });
        CAPTURE(key);
        CHECK(msg.find(key) != std::string::npos);
    }
}

TEST_CASE("stage seeds are distinct and follow the run seed") {
    ConfigValues v;
    const auto a = make_config(v);
    CHECK(stage_seed(a, "filter") != stage_seed(a, "strength"));
    CHECK(stage_seed(a, "filter") == stage_seed(make_config(v), "filter"));
    v.set("run.seed", "2");
    CHECK(stage_seed(a, "filter") != stage_seed(make_config(v), "filter"));
}

TEST_CASE("quickstart diagnosis recovers the injected chain and resumes identically") {
    const auto values = quickstart_values();
    const auto input = testing::scratch_dir("qs-in");
    const auto truth = simulate_into(values, input);
    const auto run = testing::scratch_dir("qs-run");
    const DiagnosePaths paths{input, run, kQuickstart / "model.txt"};

    const auto first = run_diagnose(values, paths, false);
    CHECK(first.stages.size() == 4);
    for (const auto& s : first.stages) CHECK_FALSE(s.skipped);
    for (const char* f : {"tensor.bin", "schema.txt", kEdgesFile, kRankingFile, kGraphFile, kPredictionFile, kReportText,
                          kReportJsonl, kChainCsv, kChainPlot, kManifestFile, kTimingsFile}) {
        CHECK_MESSAGE(fs::exists(run / f), f);
    }
    const auto text = text::read_file((run / kReportText).string());
    for (auto title : explain::kReportSections) CHECK(text.find(title) != std::string::npos);

    const auto jsonl = text::read_file((run / kReportJsonl).string());
    const auto payload = explain::parse_report_payload(jsonl);
    CHECK(payload.chain.root == truth.root);
    REQUIRE(payload.chain.links.size() == truth.chain.size());
    for (std::size_t i = 0; i < truth.chain.size(); ++i) {
        CHECK(payload.chain.links[i].source == truth.chain[i].source);
        CHECK(payload.chain.links[i].target == truth.chain[i].target);
    }
    const std::set<std::string> flagged(first.flagged.begin(), first.flagged.end());
    CHECK(flagged.count(truth.root) == 1);

    const auto again = run_diagnose(values, paths, true);
    for (const auto& s : again.stages) CHECK(s.skipped);
    CHECK(again.run_id == first.run_id);
    CHECK(text::read_file((run / kReportJsonl).string()) == jsonl);

    const auto fresh = testing::scratch_dir("qs-run2");
    (void)run_diagnose(values, {input, fresh, kQuickstart / "model.txt"}, false);
    CHECK(text::read_file((fresh / kReportJsonl).string()) == jsonl);
    CHECK(text::read_file((fresh / kReportText).string()) == text);

    auto changed = values;
    changed.set("causal.threshold", "0.35");
    const auto msg = message_of([&] { (void)run_diagnose(changed, paths, true); });
    CHECK(msg.find(kManifestFile) != std::string::npos);
}

TEST_CASE("missing telemetry is an input error naming the file") {
    const auto values = quickstart_values();
    const auto input = testing::scratch_dir("qs-missing");
    (void)simulate_into(values, input);
    fs::remove(input / sim::kMetricsFile);
    const auto run = testing::scratch_dir("qs-missing-run");
    const auto msg = message_of([&] { (void)run_diagnose(values, {input, run, kQuickstart / "model.txt"}, false); });
    CHECK(msg.find((input / sim::kMetricsFile).string()) != std::string::npos);

    const auto no_model = message_of([&] { (void)run_diagnose(values, {input, run, input / "model.txt"}, false); });
    CHECK_FALSE(no_model.empty());
}

TEST_CASE("evaluation rows are deterministic text") {
    EvalRow row{"full", {}};
    row.result.cases = 2;
    row.result.localization = {0.5, 1.0, 2.0 / 3.0};
    const auto a = format_eval({row});
    CHECK(a == format_eval({row}));
    CHECK(a.find("full") != std::string::npos);
}

TEST_CASE("suites are seeded and sized") {
    const auto loc = localization_suite(50);
    CHECK(loc.size() == 50);
    std::set<std::uint64_t> seeds;
    for (const auto& c : loc) {
        CHECK(c.template_name != "nominal");
        seeds.insert(c.seed);
    }
    CHECK(seeds.size() == 50);
    CHECK(cross_level_suite(10).size() == 10);
    for (const auto& c : cross_level_suite(10)) CHECK(c.decoys == 2);
}

} // TEST_SUITE
