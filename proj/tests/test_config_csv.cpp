#include <claricov/config.hpp>
#include <claricov/csv.hpp>

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace claricov;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "claricov-tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("format_double round-trips") {
    for (const double v : {0.0, 1.0, 0.1, -3.49, 12.1801, 1e-9, 6.02e23, -0.0001}) {
        const std::string s = csv::format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("csv writer/reader round trip") {
    const fs::path path = temp_file("roundtrip.csv");
    {
        const std::vector<std::string> header{"a", "b", "c"};
        csv::Writer w(path, header);
        w.row(std::vector<double>{1.0, 2.5, -3.0});
        w.row(std::vector<double>{0.1, 0.0, 42.0});
    }
    const csv::Table t = csv::read(path);
    REQUIRE(t.header.size() == 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.column("b") == 1);
    CHECK(t.number(0, 1) == 2.5);
    CHECK(t.number(1, 2) == 42.0);
    CHECK_THROWS_AS((void)t.column("missing"), DataError);
}

TEST_CASE("csv errors carry line numbers") {
    const fs::path path = temp_file("bad.csv");

    SUBCASE("ragged row") {
        std::ofstream(path) << "a,b\n1,2\n3\n";
        try {
            (void)csv::read(path);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }

    SUBCASE("non-numeric cell") {
        std::ofstream(path) << "a,b\n1,2\nx,4\n";
        const csv::Table t = csv::read(path);
        try {
            (void)t.number(1, 0);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }

    SUBCASE("empty file") {
        std::ofstream(path) << "";
        CHECK_THROWS_AS((void)csv::read(path), DataError);
    }
}

TEST_CASE("config round trip is the identity") {
    SUBCASE("defaults") {
        const ScenarioConfig c;
        const std::string s1 = serialize_config(c);
        const std::string s2 = serialize_config(parse_config(s1));
        CHECK(s1 == s2);
    }

    SUBCASE("fully customized") {
        ScenarioConfig c;
        c.len_x = 12.7;
        c.len_y = 6.3;
        c.grid_spacing = 0.2;
        c.kernel = {KernelFamily::SquaredExponential, 2.17, 1.3, 0.04};
        c.prior_mean = 1.25;
        c.sigma_t_sq = 0.037;
        c.sigma_t_sq_file = "rates.csv";
        c.agents = 10;
        c.u_max_mps = 25.0;
        c.start_positions = {{0.5, 0.25}, {1.5, 0.25}};
        c.policy = CoveragePolicy::Indirect;
        c.modes = 12;
        c.tau_max = 1800.0;
        c.eps_gradient = 1e-7;
        c.q_target = 0.75;
        c.dt = 2.5;
        c.horizon = 3600.0;
        c.seed = 123456789ull;
        c.truth_refine = 3;
        c.snapshot_every = 24;
        c.components = 1;
        const std::string s1 = serialize_config(c);
        const ScenarioConfig parsed = parse_config(s1);
        CHECK(serialize_config(parsed) == s1);
        CHECK(parsed.kernel.family == KernelFamily::SquaredExponential);
        CHECK(parsed.start_positions.size() == 2);
        CHECK(parsed.seed == 123456789ull);
    }
}

TEST_CASE("config parser diagnostics") {
    CHECK_THROWS_AS((void)parse_config("[domain]\nbogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[domain]\nlength_x_km = abc\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[domain\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("length_x_km\n"), ConfigError);

    // comments and blank lines are fine
    const ScenarioConfig c =
        parse_config("# comment\n[domain]\n; other comment\nlength_x_km = 4\n");
    CHECK(c.len_x == 4.0);
}

TEST_CASE("config validation") {
    ScenarioConfig c;
    c.validate(); // defaults are sane

    SUBCASE("horizon must be a multiple of dt") {
        c.horizon = 7.3;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("q_target below 1") {
        c.q_target = 1.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("start positions inside the domain") {
        c.start_positions = {{5.0, 5.0}};
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("noise variance must be positive for assimilation") {
        c.kernel.noise_var = 0.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }

    SUBCASE("south-edge default start positions") {
        c.agents = 4;
        const auto starts = c.resolved_starts();
        REQUIRE(starts.size() == 4);
        for (const auto& p : starts) {
            CHECK(p.y() == 0.0);
            CHECK(p.x() > 0.0);
            CHECK(p.x() < c.len_x);
        }
        CHECK(starts[1].x() - starts[0].x() ==
              doctest::Approx(c.len_x / 4.0).epsilon(1e-12));
    }
}
