// End-to-end checks of the command-line tool: each subcommand is run as a
// child process against files in a scratch directory.

#include "edgefit/attention.hpp"
#include "edgefit/image.hpp"
#include "edgefit/scene.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

using namespace edgefit;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

int run_cli(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd =
        std::string(EDGEFIT_CLI_PATH) + " " + args + " >/dev/null 2>" + stderr_file;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    json j;
    in >> j;
    return j;
}

}  // namespace

TEST_CASE("cli edges/fit/attend pipeline on a rendered scene") {
    testutil::TempDir tmp;
    const SceneSpec spec = testutil::rect_scene(60, 24, 25 * kDeg, 128);
    write_pgm(render_scene(spec, 1).image, tmp.file("scene.pgm"));
    const std::string base = "--out-dir " + tmp.path.string() + " ";

    SUBCASE("edges writes the mask and the point list") {
        CHECK(run_cli(base + "edges --input " + tmp.file("scene.pgm")) == 0);
        const GrayImage mask = load_pgm(tmp.file("edge_mask.pgm"));
        CHECK(mask.width == 128);
        std::ifstream lines(tmp.file("edges.jsonl"));
        std::string line;
        std::size_t count = 0;
        while (std::getline(lines, line)) {
            const json j = json::parse(line);
            CHECK(j.contains("x"));
            CHECK(j.contains("gy"));
            ++count;
        }
        CHECK(count > 100);
    }

    SUBCASE("fit recovers a perturbed box") {
        const std::string gt = R"({"cx":64,"cy":64,"w":60,"h":24,"theta_deg":25})";
        const std::string init = R"({"cx":60,"cy":67,"w":66,"h":22,"theta_deg":31})";
        CHECK(run_cli(base + "fit --image " + tmp.file("scene.pgm") + " --gt '" + gt +
                      "' --init '" + init + "' --trace") == 0);
        const json fit = read_json(tmp.file("fit.json"));
        CHECK(fit.at("converged").get<bool>());
        CHECK(fit.at("angle_error_deg").get<double>() < 1.5);
        CHECK(fit.at("trace").is_array());
    }

    SUBCASE("attend is deterministic and writes loadable tensors") {
        CHECK(run_cli(base + "--seed 9 attend --image " + tmp.file("scene.pgm") +
                      " --channels 2 --fuse") == 0);
        const FeatureMap first = load_tensor(tmp.file("attended_1.bin"));
        CHECK(first.channels == 2);
        CHECK(first.width == 64);
        CHECK(first.height == 64);
        CHECK(load_tensor(tmp.file("fused_5.bin")).channels == 2);
        const auto bytes_a = testutil::read_bytes(tmp.file("attended_3.bin"));
        CHECK(run_cli(base + "--seed 9 attend --image " + tmp.file("scene.pgm") +
                      " --channels 2") == 0);
        CHECK(testutil::read_bytes(tmp.file("attended_3.bin")) == bytes_a);
        const json stats = read_json(tmp.file("attention_stats.json"));
        CHECK(stats.size() == 5);
    }
}

TEST_CASE("cli match finds a displaced rotated target") {
    testutil::TempDir tmp;
    write_pgm(render_scene(testutil::rect_scene(30, 12, 0.0, 64, 255.0, 30.0), 0).image,
              tmp.file("template.pgm"));
    SceneSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.background = 30.0;
    spec.objects.push_back({ShapeKind::Rectangle, {70, 58, 30, 12, 12 * kDeg}, 255.0});
    write_pgm(render_scene(spec, 0).image, tmp.file("source.pgm"));

    CHECK(run_cli("--out-dir " + tmp.path.string() + " match --template " +
                  tmp.file("template.pgm") + " --source " + tmp.file("source.pgm") +
                  " --angle-lo 6 --angle-hi 18 --angle-step 2 --score-min 0.5 --overlay") == 0);
    const json matches = read_json(tmp.file("matches.json"));
    REQUIRE(!matches.empty());
    CHECK(std::abs(matches[0].at("angle_deg").get<double>() - 12.0) < 1.0);
    CHECK(matches[0].at("score").get<double>() > 0.7);
    CHECK(load_pgm(tmp.file("overlay.pgm")).width == 128);
}

TEST_CASE("cli convert and crop") {
    testutil::TempDir tmp;
    {
        std::ofstream anno(tmp.file("anno.txt"));
        anno << "imagesource:synthetic\n";
        anno << "0 0 10 0 10 4 0 4 ship 0\n";
        anno << "5 5 5 25 13 25 13 5 harbor 1\n";
    }
    const std::string base = "--out-dir " + tmp.path.string() + " ";
    CHECK(run_cli(base + "convert --input " + tmp.file("anno.txt")) == 0);
    const json boxes = read_json(tmp.file("boxes.json"));
    REQUIRE(boxes.at("records").size() == 2);
    CHECK(boxes.at("records")[0].at("label") == "ship");
    CHECK(boxes.at("records")[1].at("w").get<double>() == doctest::Approx(20.0));

    write_pgm(GrayImage(1536, 1024, 50.0), tmp.file("big.pgm"));
    CHECK(run_cli(base + "crop --input " + tmp.file("big.pgm")) == 0);
    const json plan = read_json(tmp.file("crop_plan.json"));
    CHECK(plan.at("window").get<int>() == 1024);
    REQUIRE(plan.at("windows").size() == 2);
    CHECK(plan.at("windows")[1].at("x0").get<int>() == 512);
}

TEST_CASE("cli quick bench and gradcheck run clean") {
    testutil::TempDir tmp;
    const std::string base = "--out-dir " + tmp.path.string() + " ";
    CHECK(run_cli(base + "--seed 4 bench --scenes 2 --noise 0") == 0);
    const json bench = read_json(tmp.file("benchmark.json"));
    CHECK(bench.at("variants")[0].at("n").get<int>() == 2);

    CHECK(run_cli(base + "--seed 4 gradcheck --trials 3") == 0);
    const json grad = read_json(tmp.file("gradcheck.json"));
    CHECK(grad.at("max_rel_err_overall").get<double>() < 1e-4);
}

TEST_CASE("cli failures exit nonzero with a machine-readable error") {
    testutil::TempDir tmp;
    const std::string err_file = tmp.file("stderr.txt");
    CHECK(run_cli("--out-dir " + tmp.path.string() + " edges --input " + tmp.file("missing.pgm"),
                  err_file) == 1);
    std::ifstream in(err_file);
    std::stringstream buf;
    buf << in.rdbuf();
    const json err = json::parse(buf.str());
    CHECK(err.at("error").at("type") == "io_error");
    CHECK(err.at("error").contains("message"));
}
