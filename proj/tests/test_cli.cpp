#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

#include "support.hpp"

using blendopt::io::Json;
namespace fs = std::filesystem;

namespace {

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / ("blendopt-cli-" + std::to_string(::getpid()));
        fs::create_directories(dir);
        blendopt::io::write_file(dir / "fig3.json", blendopt::io::histogram_to_json(testing::fig3_spec()).dump(2));
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
    int code;
    std::string out;
};

Run cli(const Workdir& w, const std::string& args) {
    const std::string log = w / "stdout.txt";
    const std::string cmd = std::string(BLENDOPT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, blendopt::io::read_file(log)};
}

const std::string kModel = testing::source_path("tests/fixtures/tiny_terms.model.json");
const std::string kShort = " --t-start 10 --t-end 0.01 --gamma 0.97";

}  // namespace

TEST_CASE("optimize writes a document that score reproduces") {
    Workdir w;
    const Run r = cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel + " --seed 7 --out " +
                             (w / "sol.json") + " --trace " + (w / "trace.csv") + " --render " + (w / "sol.svg") + kShort);
    INFO(r.out);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(w / "trace.csv"));
    CHECK(fs::exists(w / "sol.svg"));
    const Json doc = Json::parse(blendopt::io::read_file(w / "sol.json"));
    CHECK(doc["format"] == "blendopt-solution");
    CHECK(doc["seed"] == 7);

    const Run s = cli(w, "score --scene " + (w / "fig3.json") + " --name-model " + kModel + " --solution " +
                             (w / "sol.json") + " --out " + (w / "score.json"));
    INFO(s.out);
    REQUIRE(s.code == 0);
    const Json score = Json::parse(blendopt::io::read_file(w / "score.json"));
    CHECK(score == doc["score"]);

    // rerun with the same seed: identical bytes
    const std::string first = blendopt::io::read_file(w / "sol.json");
    REQUIRE(cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel + " --seed 7 --out " +
                       (w / "sol2.json") + kShort)
                .code == 0);
    CHECK(blendopt::io::read_file(w / "sol2.json") == first);

    const Run rr = cli(w, "render --scene " + (w / "fig3.json") + " --solution " + (w / "sol.json") + " --out " +
                              (w / "again.svg"));
    REQUIRE(rr.code == 0);
    CHECK(blendopt::io::read_file(w / "again.svg") == blendopt::io::read_file(w / "sol.svg"));
}

TEST_CASE("fixed palette entries survive optimization") {
    Workdir w;
    const Run r = cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel +
                             " --fixed-palette '#1f77b4,,#2ca02c' --out " + (w / "sol.json") + kShort);
    INFO(r.out);
    REQUIRE(r.code == 0);
    const Json doc = Json::parse(blendopt::io::read_file(w / "sol.json"));
    CHECK(doc["palette"][0] == "#1f77b4");
    CHECK(doc["palette"][2] == "#2ca02c");
}

TEST_CASE("zero weights are reported as excluded") {
    Workdir w;
    const Run r = cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel +
                             " --weights 1,0,0 --out " + (w / "sol.json") + kShort);
    INFO(r.out);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("excluded") != std::string::npos);
    const Json doc = Json::parse(blendopt::io::read_file(w / "sol.json"));
    CHECK(doc["score"]["excluded"].size() == 2);
}

TEST_CASE("exit codes") {
    Workdir w;
    CHECK(cli(w, "optimize --scene " + (w / "missing.json") + " --name-model " + kModel + " --out " + (w / "x.json"))
              .code == 2);
    CHECK(cli(w, "optimize --bogus").code == 2);
    CHECK(cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel + " --weights 1,2 --out " +
                 (w / "x.json"))
              .code == 2);
    const Run inf = cli(w, "optimize --scene " + (w / "fig3.json") + " --name-model " + kModel + " --eta 500 --out " +
                               (w / "x.json") + kShort);
    CHECK(inf.code == 3);
    CHECK_FALSE(fs::exists(w / "x.json"));
    CHECK(cli(w, "gen-stimuli --classes 9 --out " + (w / "s.json")).code == 2);
}

TEST_CASE("gen-stimuli writes one file per seed") {
    Workdir w;
    const Run r = cli(w, "gen-stimuli --classes 3 --smoothness unsmooth --seed 5 --count 3 --out-dir " + (w / "stim"));
    INFO(r.out);
    REQUIRE(r.code == 0);
    for (int s = 5; s < 8; ++s) {
        const std::string f = w / ("stim/stimulus-unsmooth-m3-s" + std::to_string(s) + ".json");
        REQUIRE(fs::exists(f));
        CHECK(blendopt::io::load_scene_file(f).class_count == 3);
    }
}
