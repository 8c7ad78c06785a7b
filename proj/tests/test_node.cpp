#include <doctest.h>

#include <random>

#include "fatnode/errors.hpp"
#include "fatnode/node.hpp"
#include "fatnode/processor_set.hpp"
#include "test_helpers.hpp"

using namespace fatnode;
using fatnode::testing::haswell_node;
using fatnode::testing::knl_node;

TEST_CASE("logical_processors") {
    CHECK(logical_processors(knl_node()) == 272);
    CHECK(logical_processors(haswell_node()) == 32);

    NodeSpec tiny;
    tiny.physical_cores = 1;
    tiny.hyperthread_ways = 1;
    tiny.total_ram_mib = 1024;
    CHECK(logical_processors(tiny) == 1);
}

TEST_CASE("usable_memory") {
    CHECK(usable_memory_mib(knl_node()) == 88064);  // 86 GiB
    CHECK(usable_memory_mib(haswell_node()) == 65536);

    NodeSpec spec = haswell_node();
    spec.os_reserve_mib = 2048;
    CHECK(usable_memory_mib(spec) == 63488);  // 62 GiB by direct subtraction
    CHECK(usable_memory_mib(spec) + spec.os_reserve_mib == spec.total_ram_mib);
}

TEST_CASE("memory_per_thread") {
    const NodeSpec knl = knl_node();
    // just over 300 MiB with all 272 threads busy
    const double all_threads = memory_per_thread_mib(knl, 272);
    CHECK(all_threads == doctest::Approx(88064.0 / 272).epsilon(1e-12));
    CHECK(all_threads > 300.0);
    CHECK(all_threads < 350.0);
    // around 600 MiB with 2 threads per core
    const double half_threads = memory_per_thread_mib(knl, 136);
    CHECK(half_threads == doctest::Approx(88064.0 / 136).epsilon(1e-12));
    CHECK(half_threads > 600.0);
    CHECK(half_threads < 700.0);
    CHECK(memory_per_thread_mib(knl, 1) == doctest::Approx(88064.0));

    CHECK_THROWS_AS(memory_per_thread_mib(knl, 0), ValidationError);
    CHECK_THROWS_AS(memory_per_thread_mib(knl, 273), ValidationError);
}

TEST_CASE("memory_per_thread strictly decreasing") {
    const NodeSpec knl = knl_node();
    double previous = memory_per_thread_mib(knl, 1);
    for (int threads = 2; threads <= 272; ++threads) {
        const double current = memory_per_thread_mib(knl, threads);
        CHECK(current < previous);
        previous = current;
    }
}

TEST_CASE("logical_processors is multiplicative in hyperthread ways") {
    std::mt19937 rng(7);
    for (int i = 0; i < 100; ++i) {
        NodeSpec spec;
        spec.physical_cores = 1 + static_cast<int>(rng() % 128);
        spec.hyperthread_ways = 1 + static_cast<int>(rng() % 4);
        spec.total_ram_mib = 1024;
        NodeSpec doubled = spec;
        doubled.hyperthread_ways *= 2;
        CHECK(logical_processors(doubled) == 2 * logical_processors(spec));
    }
}

TEST_CASE("NodeSpec validation") {
    NodeSpec spec = knl_node();
    spec.physical_cores = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);

    spec = knl_node();
    spec.os_reserve_mib = spec.total_ram_mib;
    CHECK_THROWS_AS(spec.validate(), ValidationError);

    spec = knl_node();
    spec.hyperthread_ways = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);

    CHECK_NOTHROW(knl_node().validate());
}

TEST_CASE("core-major processor id layout") {
    const NodeSpec knl = knl_node();
    // IDs {c, c+68, c+136, c+204} share core c
    CHECK(core_of(knl, 0) == 0);
    CHECK(core_of(knl, 68) == 0);
    CHECK(core_of(knl, 69) == 1);
    CHECK(core_of(knl, 271) == 67);
    CHECK(thread_slot_of(knl, 67) == 0);
    CHECK(thread_slot_of(knl, 68) == 1);
    CHECK(thread_slot_of(knl, 271) == 3);
}

TEST_CASE("ProcessorSet basics") {
    ProcessorSet set(272);
    CHECK(set.count() == 0);
    set.set(0);
    set.set(271);
    set.set(100);
    CHECK(set.count() == 3);
    CHECK(set.test(100));
    set.reset(100);
    CHECK_FALSE(set.test(100));
    CHECK(set.to_vector() == std::vector<int>{0, 271});

    CHECK_THROWS_AS(set.set(272), std::logic_error);
    CHECK_THROWS_AS(set.test(-1), std::logic_error);

    ProcessorSet full = ProcessorSet::full(272);
    CHECK(full.count() == 272);
}

TEST_CASE("ProcessorSet take_lowest") {
    ProcessorSet free = ProcessorSet::full(16);
    ProcessorSet first = free.take_lowest(5);
    CHECK(first.to_vector() == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(free.count() == 11);
    CHECK(free.disjoint_with(first));

    ProcessorSet second = free.take_lowest(3);
    CHECK(second.to_vector() == std::vector<int>{5, 6, 7});

    free.unite(first);
    CHECK(free.count() == 13);
    CHECK(free.test(0));

    CHECK_THROWS_AS(free.take_lowest(14), std::logic_error);
}
