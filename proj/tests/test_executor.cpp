#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lego/errors.hpp"
#include "lego/executor.hpp"
#include "lego/netpbm.hpp"
#include "lego/validator.hpp"

#include "support.hpp"

#include <random>
#include <sstream>

using namespace lego;

namespace {

const Registry& registry() {
    static const Registry r = Registry::bundled_default();
    return r;
}

MaskBuf random_mask(std::mt19937_64& rng, int w = 16, int h = 16) {
    MaskBuf m = MaskBuf::zeros(w, h);
    for (auto& bit : m.bits) bit = rng() % 2;
    return m;
}

ImageBuf random_image(std::mt19937_64& rng, int w = 16, int h = 16) {
    ImageBuf img = ImageBuf::filled(w, h, 0, 0, 0);
    for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng() % 256);
    return img;
}

std::map<std::string, Value> checker_init(int w = 64, int h = 64) {
    ImageBuf img = ImageBuf::filled(w, h, 0, 0, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x / 8 + y / 8) % 2) {
                std::uint8_t* p = img.at(x, y);
                p[0] = 200;
                p[1] = 180;
                p[2] = 40;
            }
    std::map<std::string, Value> init;
    init["image"] = Value::img(std::move(img));
    return init;
}

} // namespace

TEST_CASE("topological schedules") {
    DepGraph g2{3, {{1, 2}, {1, 3}, {2, 3}}};
    CHECK(topological_schedule(g2) == std::vector<int>{1, 2, 3});

    DepGraph edgeless{3, {}};
    CHECK(topological_schedule(edgeless) == std::vector<int>{1, 2, 3});

    DepGraph g3{5, {{1, 2}, {1, 3}, {1, 4}, {2, 5}, {3, 4}, {4, 5}}};
    CHECK(topological_schedule(g3) == std::vector<int>{1, 2, 3, 4, 5});

    DepGraph cyclic{2, {{1, 2}, {2, 1}}};
    CHECK_THROWS_AS(topological_schedule(cyclic), Error);
}

TEST_CASE("schedule property on random DAGs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 20);
        DepGraph g;
        g.node_count = n;
        for (int j = 2; j <= n; ++j)
            for (int i = 1; i < j; ++i)
                if (rng() % 3 == 0) g.edges.push_back({i, j});
        const std::vector<int> order = topological_schedule(g);
        REQUIRE(static_cast<int>(order.size()) == n);
        std::vector<int> position(static_cast<std::size_t>(n) + 1, -1);
        for (int i = 0; i < n; ++i) {
            CHECK(position[static_cast<std::size_t>(order[i])] == -1);
            position[static_cast<std::size_t>(order[i])] = i;
        }
        for (const auto& [from, to] : g.edges)
            CHECK(position[static_cast<std::size_t>(from)] <
                  position[static_cast<std::size_t>(to)]);
    }
}

TEST_CASE("raster algebra properties") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 500; ++trial) {
        const MaskBuf m = random_mask(rng);

        // INVERSE: complement is an involution; self-subtraction annihilates.
        const MaskBuf complement = *op_inverse(nullptr, &m, nullptr, nullptr).first;
        const MaskBuf twice =
            *op_inverse(nullptr, &complement, nullptr, nullptr).first;
        CHECK(twice == m);
        const MaskBuf zero = *op_inverse(&m, &m, nullptr, nullptr).first;
        CHECK(zero.popcount() == 0);

        // COMPOSE on masks: idempotent, and union with empty is identity.
        const MaskBuf empty = MaskBuf::zeros(m.width, m.height);
        CHECK(*op_compose(&m, &m, nullptr, nullptr).first == m);
        CHECK(*op_compose(&empty, &m, nullptr, nullptr).first == m);

        // BBOX: fixed point.
        if (m.popcount() > 0) {
            const MaskBuf box = op_bbox(m);
            CHECK(op_bbox(box) == box);
            // Covers the input.
            for (int y = 0; y < m.height; ++y)
                for (int x = 0; x < m.width; ++x)
                    if (m.get(x, y)) CHECK(box.get(x, y));
        }

        // RESIZE: identity at ratio 1.
        if (m.popcount() > 0)
            CHECK(*op_resize(&m, nullptr, 1.0).first == m);
        const ImageBuf img = random_image(rng);
        bool has_valid = false;
        for (int y = 0; y < img.height && !has_valid; ++y)
            for (int x = 0; x < img.width; ++x)
                if (!img.transparent_at(x, y)) {
                    has_valid = true;
                    break;
                }
        if (has_valid)
            CHECK(*op_resize(nullptr, &img, 1.0).second == img);
    }
}

TEST_CASE("compose images: second input wins where opaque") {
    ImageBuf a = ImageBuf::filled(4, 4, 10, 10, 10);
    ImageBuf b = ImageBuf::filled(4, 4, 0, 0, 0);
    for (int y = 0; y < 4; ++y)
        for (int x = 2; x < 4; ++x) {  // right half opaque
            std::uint8_t* p = b.at(x, y);
            p[0] = 99;
            p[1] = 98;
            p[2] = 97;
        }
    const ImageBuf out = *op_compose(nullptr, nullptr, &a, &b).second;
    CHECK(out.at(0, 0)[0] == 10);  // left half from a
    CHECK(out.at(3, 0)[0] == 99);  // right half from b
}

TEST_CASE("inverse images: saturating subtraction") {
    const ImageBuf a = ImageBuf::filled(2, 2, 100, 5, 255);
    const ImageBuf b = ImageBuf::filled(2, 2, 30, 50, 255);
    const ImageBuf out = *op_inverse(nullptr, nullptr, &a, &b).second;
    CHECK(out.at(0, 0)[0] == 70);
    CHECK(out.at(0, 0)[1] == 0);  // clamped
    CHECK(out.at(0, 0)[2] == 0);

    const ImageBuf only_a = ImageBuf::filled(2, 2, 1, 1, 1);
    CHECK_THROWS_AS(op_inverse(nullptr, nullptr, &only_a, nullptr), Error);
}

TEST_CASE("resize oracle: centered block doubling") {
    const MaskBuf block = MaskBuf::rect(8, 8, 3, 3, 4, 4);
    const MaskBuf out = *op_resize(&block, nullptr, 2.0).first;
    CHECK(out == MaskBuf::rect(8, 8, 2, 2, 5, 5));
    CHECK_THROWS_AS(op_resize(&block, nullptr, 0.0), Error);
    const MaskBuf empty = MaskBuf::zeros(8, 8);
    CHECK_THROWS_AS(op_resize(&empty, nullptr, 2.0), Error);
}

TEST_CASE("bbox oracle") {
    MaskBuf m = MaskBuf::zeros(8, 8);
    m.set(2, 3, 1);
    CHECK(op_bbox(m) == MaskBuf::rect(8, 8, 2, 3, 2, 3));
    m.set(5, 7, 1);
    CHECK(op_bbox(m) == MaskBuf::rect(8, 8, 2, 3, 5, 7));
    CHECK_THROWS_AS(op_bbox(MaskBuf::zeros(4, 4)), Error);
}

TEST_CASE("netpbm round-trips") {
    std::mt19937_64 rng(41);
    const ImageBuf img = random_image(rng, 9, 5);
    std::stringstream ppm;
    write_ppm(ppm, img);
    CHECK(read_ppm(ppm) == img);

    const MaskBuf mask = random_mask(rng, 7, 3);
    std::stringstream pgm;
    write_pgm(pgm, mask);
    CHECK(read_pgm(pgm) == mask);

    // Raster bytes include a NUL, so build the strings with explicit sizes.
    std::stringstream commented(
        std::string("P5\n# a comment\n2 1\n255\n\xff\x00", 25));
    const MaskBuf small = read_pgm(commented);
    CHECK(small.get(0, 0) == 1);
    CHECK(small.get(1, 0) == 0);

    std::stringstream wrong_maxval(std::string("P5\n2 1\n15\n\xff\x00", 12));
    CHECK_THROWS_AS(read_pgm(wrong_maxval), Error);
    std::stringstream truncated("P6\n4 4\n255\nxx");
    CHECK_THROWS_AS(read_ppm(truncated), Error);
}

TEST_CASE("fixtures execute with documented trace lengths") {
    MockBackend backend;
    const auto init = checker_init();
    const std::vector<std::pair<const char*, std::size_t>> expect = {
        {"example1.json", 4}, {"example2.json", 3}, {"example3.json", 5}};
    for (const auto& [name, steps] : expect) {
        const Workflow w = support::load_fixture(name);
        const ExecutionResult result =
            execute_workflow(w, registry(), backend, init, 0);
        INFO(name, " fault: ", result.fault_reason);
        REQUIRE(result.ok());
        CHECK(result.trace.size() == steps);
        CHECK(result.results.size() == w.result.size());
    }
}

TEST_CASE("execution determinism") {
    MockBackend backend;
    const auto init = checker_init();
    const Workflow w = support::load_fixture("example3.json");
    const ExecutionResult a = execute_workflow(w, registry(), backend, init, 7);
    const ExecutionResult b = execute_workflow(w, registry(), backend, init, 7);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.results == b.results);
    CHECK(a.trace_jsonl() == b.trace_jsonl());

    // A different seed steers the mock elsewhere.
    const ExecutionResult c = execute_workflow(w, registry(), backend, init, 8);
    REQUIRE(c.ok());
    CHECK(a.results != c.results);
}

TEST_CASE("faults carry the step and reason") {
    MockBackend backend;
    const auto init = checker_init();

    Workflow w = support::load_fixture("example2.json");
    for (auto& [slot, ref] : w.steps[2].inputs)
        if (slot == "preimage") ref = ValueRef::init("mask");
    const ExecutionResult result =
        execute_workflow(w, registry(), backend, init, 0);
    CHECK(!result.ok());
    CHECK(result.fault_step == 3);
    CHECK(result.fault_reason.find("MissingBinding") != std::string::npos);
}

TEST_CASE("mock backend behaviors") {
    MockBackend backend;
    const Registry& r = registry();
    const ImageBuf canvas = ImageBuf::filled(32, 32, 120, 30, 30);

    std::map<std::string, Value> res_in;
    res_in["image"] = Value::img(canvas);
    res_in["prompt"] = Value::txt("dog");
    const auto res_a = backend.invoke(r.lookup("RES"), res_in, 0);
    const auto res_b = backend.invoke(r.lookup("RES"), res_in, 0);
    CHECK(res_a.at("mask") == res_b.at("mask"));
    res_in["prompt"] = Value::txt("cat");
    CHECK(backend.invoke(r.lookup("RES"), res_in, 0).at("mask") !=
          res_a.at("mask"));

    // ADD-PRED stays inside the constraining mask.
    std::map<std::string, Value> add_in;
    add_in["image"] = Value::img(canvas);
    add_in["prompt"] = Value::txt("a dog on the left");
    const MaskBuf bound = MaskBuf::rect(32, 32, 4, 4, 15, 15);
    add_in["mask"] = Value::msk(bound);
    const auto add_out = backend.invoke(r.lookup("ADD-PRED"), add_in, 0);
    const MaskBuf* predicted = add_out.at("mask").mask();
    REQUIRE(predicted);
    CHECK(predicted->popcount() > 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (predicted->get(x, y)) CHECK(bound.get(x, y));

    // CAP-PRED expansion arithmetic: uniform ratio 2 on 32x32 gives 160x160.
    std::map<std::string, Value> cap_in;
    cap_in["image"] = Value::img(canvas);
    cap_in["ratio"] = Value::num(2.0);
    const auto cap_out = backend.invoke(r.lookup("CAP-PRED"), cap_in, 0);
    REQUIRE(cap_out.at("image").image());
    CHECK(cap_out.at("image").image()->width == 160);
    CHECK(cap_out.at("image").image()->height == 160);
    const MaskBuf* expansion = cap_out.at("mask").mask();
    REQUIRE(expansion);
    CHECK(expansion->popcount() == 160 * 160 - 32 * 32);
    const std::string* caption = cap_out.at("caption").text();
    REQUIRE(caption);
    CHECK(caption->rfind("a synthetic scene ", 0) == 0);

    // Caption-only mode leaves image and mask nil.
    cap_in.erase("ratio");
    const auto cap_only = backend.invoke(r.lookup("CAP-PRED"), cap_in, 0);
    CHECK(cap_only.at("image").is_nil());
    CHECK(cap_only.at("mask").is_nil());

    // FASTINPAINT: score is the set-bit fraction to 3 decimals.
    std::map<std::string, Value> fast_in;
    fast_in["image"] = Value::img(canvas);
    fast_in["mask"] = Value::msk(MaskBuf::rect(32, 32, 0, 0, 15, 31));
    const auto fast_out = backend.invoke(r.lookup("FASTINPAINT"), fast_in, 0);
    REQUIRE(fast_out.at("score").number());
    CHECK(*fast_out.at("score").number() == doctest::Approx(0.5));

    // Unknown tools are refused.
    ToolSpec rrf;
    rrf.canonical_name = "RRF";
    CHECK_THROWS_AS(backend.invoke(rrf, {}, 0), Error);
}
