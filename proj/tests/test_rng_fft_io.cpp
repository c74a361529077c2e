#include <doctest.h>

#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "eegtriage/errors.hpp"
#include "eegtriage/fft.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/rng.hpp"
#include "test_util.hpp"

using namespace eegtriage;

TEST_SUITE("rng") {
    TEST_CASE("same seed reproduces the stream exactly") {
        Rng a(42), b(42);
        for (int i = 0; i < 1000; ++i) {
            CHECK(a.next_u64() == b.next_u64());
            CHECK(a.uniform() == b.uniform());
            CHECK(a.normal() == b.normal());
        }
    }

    TEST_CASE("uniform stays in [0,1) and fills the range") {
        Rng rng(7);
        double lo = 1.0, hi = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double u = rng.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        CHECK(lo < 0.001);
        CHECK(hi > 0.999);
    }

    TEST_CASE("below is bounded and reaches every residue") {
        Rng rng(3);
        std::set<std::uint64_t> seen;
        for (int i = 0; i < 2000; ++i) {
            const std::uint64_t v = rng.below(7);
            CHECK(v < 7);
            seen.insert(v);
        }
        CHECK(seen.size() == 7);
        CHECK_THROWS_AS(rng.below(0), Error);
    }

    TEST_CASE("normal moments are near standard") {
        Rng rng(11);
        double sum = 0.0, sum_sq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.normal();
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        CHECK(std::abs(mean) < 0.01);
        CHECK(std::abs(var - 1.0) < 0.02);
    }

    TEST_CASE("shuffle is a permutation and seed-stable") {
        Rng rng(5);
        std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        rng.shuffle(v);
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

        Rng rng2(5);
        std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        rng2.shuffle(w);
        CHECK(v == w);
    }

    TEST_CASE("sample_without_replacement: sorted, distinct, in range") {
        Rng rng(9);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 1 + rng.below(50);
            const std::size_t k = 1 + rng.below(n);
            const std::vector<std::size_t> s = rng.sample_without_replacement(n, k);
            REQUIRE(s.size() == k);
            for (std::size_t i = 0; i < s.size(); ++i) {
                CHECK(s[i] < n);
                if (i > 0) CHECK(s[i] > s[i - 1]);
            }
        }
    }

    TEST_CASE("mix_seed separates streams") {
        std::set<std::uint64_t> seeds;
        for (std::uint64_t s = 0; s < 10; ++s)
            for (std::uint64_t i = 0; i < 100; ++i) seeds.insert(mix_seed(s, i));
        CHECK(seeds.size() == 1000);
    }
}

namespace {

// O(n^2) reference transform
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x,
                                            bool inverse) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = sign * 2.0 * std::numbers::pi *
                                 static_cast<double>(k) * static_cast<double>(t) /
                                 static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

double max_abs_err(const std::vector<std::complex<double>>& a,
                   const std::vector<std::complex<double>>& b) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    return err;
}

}  // namespace

TEST_SUITE("fft") {
    TEST_CASE("matches the direct transform at power-of-two and general sizes") {
        Rng rng(123);
        for (std::size_t n : {1, 2, 4, 8, 16, 64, 3, 5, 7, 12, 37, 100, 241}) {
            std::vector<std::complex<double>> x(n);
            for (auto& v : x) v = {rng.normal(), rng.normal()};
            std::vector<std::complex<double>> got = x;
            fft(got, false);
            const auto want = naive_dft(x, false);
            const double scale = std::max(1.0, std::abs(want[0]));
            CHECK(max_abs_err(got, want) / scale < 1e-9);
        }
    }

    TEST_CASE("inverse undoes forward") {
        Rng rng(321);
        for (std::size_t n : {8, 48, 37, 250}) {
            std::vector<std::complex<double>> x(n);
            for (auto& v : x) v = {rng.normal(), rng.normal()};
            std::vector<std::complex<double>> y = x;
            fft(y, false);
            fft(y, true);
            CHECK(max_abs_err(y, x) < 1e-10);
        }
    }

    TEST_CASE("rfft equals the lower half of the complex transform") {
        Rng rng(55);
        for (std::size_t n : {8, 16, 256}) {
            std::vector<double> x(n);
            for (double& v : x) v = rng.normal();
            std::vector<std::complex<double>> full(n);
            for (std::size_t i = 0; i < n; ++i) full[i] = x[i];
            fft(full, false);
            const auto half = rfft(x);
            REQUIRE(half.size() == n / 2 + 1);
            for (std::size_t k = 0; k < half.size(); ++k)
                CHECK(std::abs(half[k] - full[k]) < 1e-9);
        }
    }

    TEST_CASE("impulse transforms to a flat spectrum") {
        std::vector<std::complex<double>> x(16, 0.0);
        x[0] = 1.0;
        fft(x, false);
        for (const auto& v : x) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
    }
}

TEST_SUITE("io_util") {
    TEST_CASE("format_double round-trips exactly") {
        Rng rng(77);
        for (int i = 0; i < 1000; ++i) {
            const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-20.0, 20.0));
            CHECK(parse_double(format_double(v)) == v);
        }
        CHECK(format_double(0.0) == "0");
        CHECK(parse_double("-1.5") == -1.5);
    }

    TEST_CASE("parse rejects malformed numerics") {
        CHECK_THROWS_AS(parse_double("12x"), Error);
        CHECK_THROWS_AS(parse_double(""), Error);
        CHECK_THROWS_AS(parse_int("1.5"), Error);
        CHECK_THROWS_AS(parse_int("abc"), Error);
        CHECK(parse_int("-42") == -42);
    }

    TEST_CASE("csv splitting strips carriage returns and keeps empty cells") {
        const auto fields = split_csv_line("a,,c\r");
        REQUIRE(fields.size() == 3);
        CHECK(fields[0] == "a");
        CHECK(fields[1] == "");
        CHECK(fields[2] == "c");
        CHECK(join_csv({"x", "", "z"}) == "x,,z");
    }

    TEST_CASE("text file round trip creates parent directories") {
        testutil::TempDir tmp("io");
        const auto p = tmp.path() / "a" / "b" / "f.txt";
        write_text_file(p, "hello\nworld\n");
        CHECK(read_text_file(p) == "hello\nworld\n");
        CHECK_THROWS_AS(read_text_file(tmp.path() / "missing.txt"), Error);
    }

    TEST_CASE("fnv1a matches published vectors") {
        CHECK(fnv1a("", 0xcbf29ce484222325ULL) == 0xcbf29ce484222325ULL);
        CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
        CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
        // literal and std::string agree (overload regression guard)
        CHECK(fnv1a("\n") == fnv1a(std::string("\n")));
    }

    TEST_CASE("read_csv validates row widths") {
        testutil::TempDir tmp("csv");
        write_text_file(tmp.path() / "ok.csv", "a,b\n1,2\n3,4\n");
        const CsvTable t = read_csv(tmp.path() / "ok.csv");
        REQUIRE(t.rows.size() == 2);
        CHECK(t.column("b") == 1);
        CHECK_THROWS_AS(t.column("zzz"), Error);
        write_text_file(tmp.path() / "bad.csv", "a,b\n1\n");
        CHECK_THROWS_AS(read_csv(tmp.path() / "bad.csv"), Error);
    }

    TEST_CASE("parallel_for covers every index once for any thread count") {
        for (int threads : {1, 2, 3, 8}) {
            std::vector<std::atomic<int>> hits(257);
            for (auto& h : hits) h = 0;
            parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
            for (const auto& h : hits) CHECK(h == 1);
        }
    }

    TEST_CASE("parallel_for propagates worker exceptions") {
        CHECK_THROWS_AS(
            parallel_for(100, 4,
                         [&](std::size_t i) {
                             if (i == 37) throw Error(ErrorCode::Internal, "boom");
                         }),
            Error);
    }
}
