#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <ccgeo/expression.hpp>
#include <ccgeo/io.hpp>
#include <ccgeo/rng.hpp>

using namespace ccgeo;

TEST_CASE("rng is deterministic and seed-separated") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 64; ++i) {
        auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
        all_equal = all_equal && x == y;
        any_differ = any_differ || x != z;
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("rng forked streams are independent of draw order") {
    Rng base(7);
    Rng f1 = base.fork(1);
    std::uint64_t first = f1.next_u64();
    // Consuming the parent or a sibling does not change the child stream.
    base.next_u64();
    Rng f1_again = Rng(7).fork(1);
    CHECK(f1_again.next_u64() == first);
    Rng f2 = Rng(7).fork(2);
    CHECK(f2.next_u64() != first);
}

TEST_CASE("uniform and box sampling stay in range") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Box box = Box::cube(2.0, 3);
    for (int i = 0; i < 200; ++i) {
        CHECK(box.contains(rng.uniform_in_box(box)));
        CHECK(box.contains(halton_in_box(i + 1, box)));
    }
    for (int i = 0; i < 100; ++i)
        CHECK(rng.on_sphere(4).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("radical inverse matches hand values") {
    CHECK(radical_inverse(1, 2) == 0.5);
    CHECK(radical_inverse(2, 2) == 0.25);
    CHECK(radical_inverse(3, 2) == 0.75);
    CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("fmt17 round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, 6.02e23, -1.7976931348623157e308, 2.5e-300, 0.0}) {
        CHECK(std::stod(fmt17(x)) == x);
    }
}

TEST_CASE("atomic_write replaces the target and leaves no temp files") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ccgeo_io_test";
    fs::create_directories(dir);
    fs::path f = dir / "out.txt";
    atomic_write(f.string(), "first");
    atomic_write(f.string(), "second");
    CHECK(read_file(f.string()) == "second");
    int entries = 0;
    for (auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
    fs::remove_all(dir);
}

TEST_CASE("expression evaluation and precedence") {
    Vec x(2);
    x << 2.0, 3.0;
    CHECK(Expression::parse("x1 + x2 * 2", 2).eval(x) == 8.0);
    CHECK(Expression::parse("(x1 + x2) * 2", 2).eval(x) == 10.0);
    CHECK(Expression::parse("-x1^2", 2).eval(x) == -4.0);
    CHECK(Expression::parse("2^3^2", 2).eval(x) == 512.0);  // right-assoc
    CHECK(Expression::parse("x1 - x2 - 1", 2).eval(x) == -2.0);
    CHECK(Expression::parse("8 / 2 / 2", 2).eval(x) == 2.0);
    CHECK(Expression::parse("sin(0) + cos(0)", 2).eval(x) == doctest::Approx(1.0));
    CHECK(Expression::parse("sqrt(x1 * x1)", 2).eval(x) == doctest::Approx(2.0));
    CHECK(Expression::parse("exp(0)", 2).eval(x) == doctest::Approx(1.0));
    CHECK(Expression::parse("1.5e2", 2).eval(x) == 150.0);
}

TEST_CASE("expression errors carry line and column") {
    CHECK_THROWS_AS(Expression::parse("x3", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 +", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("bogus(1)", 2), ParseError);
    try {
        Expression::parse("1 +\n* 2", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col == 1);
    }
}
