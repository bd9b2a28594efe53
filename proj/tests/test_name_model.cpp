#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"

#include "blendopt/errors.hpp"
#include "support.hpp"

using namespace blendopt;

namespace {

// Plain scan, written without the model's lookup code.
std::size_t scan_nearest(const NameModel& m, const LabColor& c) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t b = 0; b < m.bin_count(); ++b) {
        const double d = ciede2000(c, m.bins()[b]);
        if (d < bd) {
            bd = d;
            best = b;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("fixture model loads with its declared shape") {
    const NameModel& m = testing::tiny_model();
    CHECK(m.bin_count() == 9);
    CHECK(m.term_count() == 6);
    CHECK(m.row(0)[0] == 40.0);
    CHECK(m.row(0)[3] == 2.0);
    CHECK(m.row(4)[4] == 50.0);
}

TEST_CASE("bin cosine follows the count rows") {
    const NameModel& m = testing::tiny_model();
    // bin 0: red 40, yellow 2; bin 7: red 18, yellow 16
    const double expected = (40.0 * 18 + 2.0 * 16) / (std::sqrt(40.0 * 40 + 2 * 2) * std::sqrt(18.0 * 18 + 16 * 16));
    CHECK(m.bin_cosine(0, 7) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(m.bin_cosine(7, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(m.bin_cosine(3, 3) == 1.0);
    CHECK(m.bin_cosine(4, 5) == 0.0);
}

TEST_CASE("nearest bin equals an exhaustive scan and the memo agrees") {
    const NameModel& m = testing::basic_model();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        const Srgb8 c = testing::random_color(rng);
        const LabColor lab = srgb_to_lab(c);
        const std::size_t expected = scan_nearest(m, lab);
        CHECK(m.nearest_bin(lab) == expected);
        CHECK(m.bin_for(c) == expected);
        CHECK(m.bin_for(c) == expected);
    }
}

TEST_CASE("memoized lookups are consistent across threads") {
    const NameModel& m = testing::basic_model();
    std::vector<Srgb8> colors;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) colors.push_back(testing::random_color(rng));
    std::vector<std::vector<std::size_t>> got(4);
    {
        std::vector<std::jthread> ts;
        for (int t = 0; t < 4; ++t) {
            ts.emplace_back([&, t] {
                for (const auto& c : colors) got[t].push_back(m.bin_for(c));
            });
        }
    }
    for (std::size_t k = 0; k < colors.size(); ++k) {
        const std::size_t ref = m.nearest_bin(srgb_to_lab(colors[k]));
        for (int t = 0; t < 4; ++t) CHECK(got[t][k] == ref);
    }
}

TEST_CASE("name similarity of two mid-blue shades matches an independent computation") {
    const NameModel& m = testing::basic_model();
    // numpy cosine over skimage nearest bins of the same model file
    const auto sim = [&](const char* x, const char* y) {
        return name_similarity(m, srgb_to_lab(*parse_hex(x)), srgb_to_lab(*parse_hex(y)));
    };
    CHECK(sim("#3a6ea5", "#4682b4") == doctest::Approx(0.9204578749067933).epsilon(1e-9));
    CHECK(sim("#1f77b4", "#ff7f0e") == doctest::Approx(0.061966620654756534).epsilon(1e-9));
    CHECK(sim("#4169e1", "#6495ed") == doctest::Approx(0.6196502434144118).epsilon(1e-9));
    CHECK(sim("#4682b4", "#4682b4") == 1.0);
}

TEST_CASE("name vector is the count row of the nearest bin") {
    const NameModel& m = testing::tiny_model();
    const auto v = name_vector(m, {53, 80, 67});
    REQUIRE(v.size() == 6);
    CHECK(v[0] == 40.0);
    CHECK(v[3] == 2.0);
}

TEST_CASE("alternative similarity measures") {
    const LabColor a{60, 20, 0};
    const LabColor b{40, 20, 0};
    CHECK(alt_similarity(SimilarityMeasure::Luminance, a, b) == doctest::Approx(0.8));
    CHECK(alt_similarity(SimilarityMeasure::Color, a, a) == 1.0);
    CHECK(alt_similarity(SimilarityMeasure::Color, a, b) == doctest::Approx(1.0 - ciede2000(a, b) / 100.0));
    CHECK(alt_similarity(SimilarityMeasure::Color, {100, 0, 0}, {0, 0, 0}) == 0.0);
    // hues 350 and 10 degrees are 20 degrees apart across the wrap
    const double r = 20.0;
    const LabColor h350{50, r * std::cos(350 * M_PI / 180), r * std::sin(350 * M_PI / 180)};
    const LabColor h10{50, r * std::cos(10 * M_PI / 180), r * std::sin(10 * M_PI / 180)};
    CHECK(alt_similarity(SimilarityMeasure::Hue, h350, h10) == doctest::Approx(1.0 - 20.0 / 180.0));
    CHECK_THROWS_AS(alt_similarity(SimilarityMeasure::Name, a, b), ContractViolation);
    CHECK(similarity(testing::tiny_model(), SimilarityMeasure::Luminance, a, b) == doctest::Approx(0.8));
}

TEST_CASE("measure names parse") {
    CHECK(parse_similarity_measure("hue") == SimilarityMeasure::Hue);
    CHECK(to_string(SimilarityMeasure::Name) == "name");
    CHECK_THROWS_AS(parse_similarity_measure("bogus"), ParseError);
}

TEST_CASE("model documents round trip") {
    const NameModel& m = testing::tiny_model();
    const NameModel back = load_name_model(dump_name_model(m));
    CHECK(back.terms() == m.terms());
    CHECK(back.bins() == m.bins());
    const auto a = m.sparse_counts();
    const auto b = back.sparse_counts();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bin == b[i].bin);
        CHECK(a[i].term == b[i].term);
        CHECK(a[i].count == b[i].count);
    }
}

TEST_CASE("malformed model documents name the offending record") {
    const std::string head = R"({"format":"blendopt-name-model","version":1,"bins":[50,0,0,60,0,0],"terms":["x","y"],)";
    try {
        load_name_model(head + R"("counts":[[0,0,3],[1,"a",2]]})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.where()).find("counts[1]") != std::string::npos);
    }
    try {
        load_name_model(R"({"format":"blendopt-name-model","version":1,"bins":[50,0,0],"terms":["x"]})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.where()).find("counts") != std::string::npos);
    }
    CHECK_THROWS_AS(load_name_model("{not json"), ParseError);
    // a bin without any counts
    CHECK_THROWS_AS(load_name_model(head + R"("counts":[[0,0,3]]})"), ValidationError);
    // term index out of range
    try {
        load_name_model(head + R"("counts":[[0,0,3],[1,5,2]]})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.where()) == "counts[1]");
    }
}

TEST_CASE("survey export converts and drops empty bins") {
    // 4 colors x 3 terms; color 2 has no responses.
    const std::string exported = R"({
        "color": [50,0,0, 60,10,10, 70,0,-20, 30,5,5],
        "terms": ["grey", "pink", "blue"],
        "T": [0, 5, 1, 1, 4, 7, 9, 3, 11, 2, 6, 0]
    })";
    const NameModel m = load_name_model(convert_survey_export(exported));
    CHECK(m.bin_count() == 3);
    CHECK(m.term_count() == 3);
    CHECK(m.bins()[2] == LabColor{30, 5, 5});
    CHECK(m.row(0)[0] == 5.0);
    CHECK(m.row(0)[1] == 1.0);
    CHECK(m.row(1)[1] == 7.0);
    CHECK(m.row(2)[0] == 3.0);
    CHECK(m.row(2)[2] == 2.0);
    CHECK_THROWS_AS(convert_survey_export(R"({"color":[50,0,0],"terms":["a"],"T":[7,1]})"), ParseError);
    CHECK_THROWS_AS(convert_survey_export(R"({"color":[50,0],"terms":["a"],"T":[]})"), ParseError);
}
