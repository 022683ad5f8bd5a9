#include <doctest.h>

#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "xeval/error.hpp"
#include "xeval/metrics.hpp"

using namespace xeval;

namespace {

LabelMap map_of(std::vector<std::uint8_t> labels, int width, int height, int classes) {
    LabelMap map;
    map.width = width;
    map.height = height;
    map.class_count = classes;
    map.labels = std::move(labels);
    return map;
}

ExposureMap exposure_of(std::vector<double> values, int width, int height) {
    ExposureMap map;
    map.width = width;
    map.height = height;
    map.values = std::move(values);
    return map;
}

struct Instance {
    LabelMap gt;
    LabelMap pred;
    ExposureMap exposure;
};

Instance random_instance(std::mt19937_64& rng, int max_side, int classes) {
    std::uniform_int_distribution<int> side(1, max_side);
    const int w = side(rng);
    const int h = side(rng);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    Instance inst;
    inst.gt = map_of({}, w, h, classes);
    inst.pred = map_of({}, w, h, classes);
    inst.gt.labels.resize(static_cast<std::size_t>(w) * h);
    inst.pred.labels.resize(inst.gt.labels.size());
    inst.exposure = exposure_of({}, w, h);
    inst.exposure.values.resize(inst.gt.labels.size());
    for (std::size_t p = 0; p < inst.gt.labels.size(); ++p) {
        inst.gt.labels[p] = coin(rng) < 0.2 ? kInvalidLabel
                                            : static_cast<std::uint8_t>(cls(rng));
        inst.pred.labels[p] = static_cast<std::uint8_t>(cls(rng));
        double v = unit(rng);
        if (coin(rng) < 0.15) v = std::uniform_int_distribution<int>(0, 10)(rng) / 10.0;
        inst.exposure.values[p] = v;
    }
    inst.gt.labels[0] = static_cast<std::uint8_t>(cls(rng));  // keep metrics defined
    return inst;
}

}  // namespace

TEST_CASE("accumulate counts on the diagonal for perfect predictions") {
    const auto gt = map_of({0, 1, 2, 1}, 2, 2, 3);
    const auto exposure = exposure_of({0.1, 0.3, 0.5, 0.7}, 2, 2);
    GroupedConfusion acc(ExposureBins::uniform(10), 3);
    acc.accumulate(gt, gt, exposure);
    const ConfusionMatrix sum = acc.bin_sum();
    for (int t = 0; t < 3; ++t) {
        for (int p = 0; p < 3; ++p) {
            CHECK(sum.at(t, p) == (t == p ? (t == 1 ? 2u : 1u) : 0u));
        }
    }
}

TEST_CASE("invalid ground truth contributes nowhere") {
    const auto gt = map_of({0, kInvalidLabel}, 2, 1, 2);
    const auto pred = map_of({1, 0}, 2, 1, 2);
    const auto exposure = exposure_of({0.05, 0.95}, 2, 1);
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    acc.accumulate(gt, pred, exposure);
    CHECK(acc.total() == 1);
    CHECK(acc.per_bin[0].at(0, 1) == 1);
    CHECK(acc.per_bin[9].total() == 0);
}

TEST_CASE("accumulation order does not matter") {
    std::mt19937_64 rng(31);
    const Instance a = random_instance(rng, 4, 3);
    const Instance b = random_instance(rng, 4, 3);

    GroupedConfusion ab(ExposureBins::uniform(10), 3);
    ab.accumulate(a.gt, a.pred, a.exposure);
    ab.accumulate(b.gt, b.pred, b.exposure);

    GroupedConfusion ba(ExposureBins::uniform(10), 3);
    ba.accumulate(b.gt, b.pred, b.exposure);
    ba.accumulate(a.gt, a.pred, a.exposure);

    for (int g = 0; g < 10; ++g) CHECK(ab.per_bin[g].counts == ba.per_bin[g].counts);
}

TEST_CASE("grouped merge is associative and commutative") {
    std::mt19937_64 rng(37);
    std::vector<Instance> instances;
    for (int i = 0; i < 3; ++i) instances.push_back(random_instance(rng, 4, 3));

    auto single = [&](const Instance& inst) {
        GroupedConfusion acc(ExposureBins::uniform(10), 3);
        acc.accumulate(inst.gt, inst.pred, inst.exposure);
        return acc;
    };
    GroupedConfusion left = single(instances[0]);
    left.merge(single(instances[1]));
    left.merge(single(instances[2]));

    GroupedConfusion right = single(instances[2]);
    GroupedConfusion tail = single(instances[1]);
    tail.merge(single(instances[0]));
    right.merge(tail);

    for (int g = 0; g < 10; ++g) CHECK(left.per_bin[g].counts == right.per_bin[g].counts);
}

TEST_CASE("accumulate validates inputs") {
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    const auto gt = map_of({0, 1}, 2, 1, 2);
    const auto bad_pred = map_of({0, kInvalidLabel}, 2, 1, 2);
    const auto exposure = exposure_of({0.2, 0.4}, 2, 1);
    CHECK_THROWS_AS(acc.accumulate(gt, bad_pred, exposure), format_error);
    const auto short_exposure = exposure_of({0.2}, 1, 1);
    CHECK_THROWS_AS(acc.accumulate(gt, gt, short_exposure), format_error);
}

TEST_CASE("iou on the documented four-pixel fixture") {
    const auto gt = map_of({0, 0, 1, 1}, 2, 2, 2);
    const auto pred = map_of({0, 1, 1, 1}, 2, 2, 2);
    const auto exposure = exposure_of({0.5, 0.5, 0.5, 0.5}, 2, 2);
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    acc.accumulate(gt, pred, exposure);
    const IouResult result = iou(acc);
    CHECK(result.per_class.at(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(result.per_class.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(result.miou == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("iou extremes") {
    const auto exposure = exposure_of({0.5, 0.5}, 2, 1);
    SUBCASE("perfect prediction") {
        const auto gt = map_of({0, 1}, 2, 1, 2);
        GroupedConfusion acc(ExposureBins::uniform(10), 2);
        acc.accumulate(gt, gt, exposure);
        const IouResult result = iou(acc);
        CHECK(result.miou == 1.0);
        CHECK(result.per_class.at(0) == 1.0);
        CHECK(result.per_class.at(1) == 1.0);
    }
    SUBCASE("disjoint prediction") {
        const auto gt = map_of({0, 0}, 2, 1, 2);
        const auto pred = map_of({1, 1}, 2, 1, 2);
        GroupedConfusion acc(ExposureBins::uniform(10), 2);
        acc.accumulate(gt, pred, exposure);
        const IouResult result = iou(acc);
        CHECK(result.miou == 0.0);
        CHECK(result.per_class.at(0) == 0.0);
        CHECK(result.per_class.at(1) == 0.0);
    }
    SUBCASE("empty accumulator is undefined") {
        GroupedConfusion acc(ExposureBins::uniform(10), 2);
        CHECK_THROWS_AS(iou(acc), metric_error);
    }
}

TEST_CASE("ef1 formula from precision and recall") {
    // precision 0.5, recall 1.0, beta 1 -> 2 * 0.5 * 1 / (0.5 + 1) = 2/3
    CHECK(ef1_from_precision_recall(0.5, 1.0, 1.0) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(ef1_from_precision_recall(0.0, 0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(ef1_from_precision_recall(0.5, 1.0, 0.0), std::domain_error);
}

TEST_CASE("ef1 is 1 everywhere for perfect predictions") {
    const auto gt = map_of({0, 1, 0, 1}, 2, 2, 2);
    const auto exposure = exposure_of({0.05, 0.35, 0.65, 0.95}, 2, 2);
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    acc.accumulate(gt, gt, exposure);
    for (const Averaging mode : {Averaging::kMacro, Averaging::kMicro}) {
        const Ef1Result result = ef1(acc, 1.0, mode);
        CHECK(result.mean == 1.0);
        CHECK(result.populated == 4);
        for (const auto& v : result.per_group) {
            if (v) CHECK(*v == 1.0);
        }
    }
}

TEST_CASE("ef1 input validation") {
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    CHECK_THROWS_AS(ef1(acc, 0.0, Averaging::kMacro), std::domain_error);
    CHECK_THROWS_AS(ef1(acc, -1.0, Averaging::kMacro), std::domain_error);
    CHECK_THROWS_AS(ef1(acc, 1.0, Averaging::kMacro), metric_error);  // all empty
}

TEST_CASE("metrics match the brute-force counting oracle on small instances") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        const Instance inst = random_instance(rng, 4, 4);
        GroupedConfusion acc(ExposureBins::uniform(10), 4);
        acc.accumulate(inst.gt, inst.pred, inst.exposure);

        const auto counts = oracle::count_sets(inst.gt, inst.pred, inst.exposure, 10, 4);
        const auto expected = oracle::metric_values(counts, 4, 1.0);

        const IouResult got_iou = iou(acc);
        REQUIRE(expected.iou_defined);
        CHECK(got_iou.miou == doctest::Approx(expected.miou).epsilon(1e-13));
        for (const auto& [c, v] : expected.per_class_iou) {
            CHECK(got_iou.per_class.at(c) == doctest::Approx(v).epsilon(1e-13));
        }

        const Ef1Result macro = ef1(acc, 1.0, Averaging::kMacro);
        const Ef1Result micro = ef1(acc, 1.0, Averaging::kMicro);
        CHECK(macro.mean == doctest::Approx(expected.mef1_macro).epsilon(1e-13));
        CHECK(micro.mean == doctest::Approx(expected.mef1_micro).epsilon(1e-13));
        for (int g = 0; g < 10; ++g) {
            CHECK(macro.per_group[g].has_value() == expected.ef1_macro[g].has_value());
            if (macro.per_group[g]) {
                CHECK(*macro.per_group[g] ==
                      doctest::Approx(*expected.ef1_macro[g]).epsilon(1e-13));
                CHECK(*micro.per_group[g] ==
                      doctest::Approx(*expected.ef1_micro[g]).epsilon(1e-13));
                // micro EF1 degenerates to per-group accuracy
                CHECK(*micro.per_group[g] ==
                      doctest::Approx(*expected.accuracy[g]).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("total cell mass equals the number of valid ground-truth pixels") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const Instance inst = random_instance(rng, 6, 4);
        GroupedConfusion acc(ExposureBins::uniform(10), 4);
        acc.accumulate(inst.gt, inst.pred, inst.exposure);
        std::uint64_t valid = 0;
        for (auto id : inst.gt.labels) valid += id != kInvalidLabel;
        CHECK(acc.total() == valid);
    }
}

TEST_CASE("evaluate bundles a full report") {
    const auto gt = map_of({0, 1, 1, 0}, 2, 2, 2);
    const auto exposure = exposure_of({0.05, 0.05, 0.95, 0.95}, 2, 2);
    GroupedConfusion acc(ExposureBins::uniform(10), 2);
    acc.accumulate(gt, gt, exposure);
    const EvalReport report = evaluate(acc, 1.0, Averaging::kMacro);
    CHECK(report.miou == 1.0);
    CHECK(report.mef1 == 1.0);
    CHECK(report.populated_groups == 2);
    CHECK(report.group_pixel_counts[0] == 2);
    CHECK(report.group_pixel_counts[9] == 2);
    CHECK(report.beta == 1.0);
}

TEST_CASE("resize_labels identity and block upscale") {
    const auto m = map_of({0, 1, 2, 3}, 2, 2, 4);
    const LabelMap same = resize_labels(m, 2, 2);
    CHECK(same.labels == m.labels);

    const LabelMap up = resize_labels(m, 4, 4);
    const std::vector<std::uint8_t> expected = {0, 0, 1, 1, 0, 0, 1, 1,
                                                2, 2, 3, 3, 2, 2, 3, 3};
    CHECK(up.labels == expected);
}

TEST_CASE("resize_labels matches the index-arithmetic oracle") {
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> cls(0, 4);
    LabelMap m = map_of({}, 5, 3, 5);
    m.labels.resize(15);
    for (auto& id : m.labels) id = static_cast<std::uint8_t>(cls(rng));
    const LabelMap resized = resize_labels(m, 7, 4);
    const LabelMap expected = oracle::resize_naive(m, 7, 4);
    CHECK(resized.labels == expected.labels);

    // never invents a label
    for (auto id : resized.labels) {
        bool present = false;
        for (auto src : m.labels) present = present || src == id;
        CHECK(present);
    }
    CHECK_THROWS_AS(resize_labels(m, 0, 4), std::domain_error);
}
