#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

namespace fs = std::filesystem;
using namespace loopgrade;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "loopgrade_test_io";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("format_double round-trips the exact bit pattern") {
    const double values[] = {0.0,
                             -0.0,
                             1.0,
                             -1.5,
                             0.1,
                             1.0 / 3.0,
                             M_PI,
                             1e-9,
                             1e17,
                             6.02214076e23,
                             std::numeric_limits<double>::max(),
                             std::numeric_limits<double>::min(),
                             std::numeric_limits<double>::denorm_min()};
    for (const double v : values) {
        CAPTURE(v);
        CHECK(same_bits(parse_double(format_double(v)), v));
    }
}

TEST_CASE("format_double prefers the shortest form") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.0) == "0");
}

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a_bytes("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a_bytes("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a_bytes("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("file helpers create parents and round-trip bytes") {
    const fs::path dir = temp_dir();
    const fs::path nested = dir / "a" / "b" / "payload.txt";
    const std::string content = "line one\n0.1,0.25\n";
    write_file(nested, content);
    CHECK(read_file(nested) == content);
    CHECK(fnv1a_file(nested) == fnv1a_bytes(content));
}

TEST_CASE("time-series CSV round-trips exact doubles and bytes") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "series.csv";
    TimeSeries series;
    series.t = {0.0, 0.5, 1.0, 1.5};
    series.v = {1.25, -3e-5, 1.0 / 3.0, 7.0};
    write_series_csv(path, series, "y");

    const TimeSeries back = read_series_csv(path);
    REQUIRE(back.t.size() == series.t.size());
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        CHECK(same_bits(back.t[i], series.t[i]));
        CHECK(same_bits(back.v[i], series.v[i]));
    }

    const std::string first = read_file(path);
    write_series_csv(path, back, "y");
    CHECK(read_file(path) == first);
}

TEST_CASE("response CSV stores the normalized trajectory on its grid") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "response.csv";
    RejectionResponse resp;
    resp.dt = 0.25;
    resp.r = {0.0, 0.125, -1.0 / 3.0, 0.0625};
    write_response_csv(path, resp);

    const TimeSeries back = read_series_csv(path);
    REQUIRE(back.t.size() == resp.r.size());
    for (std::size_t i = 0; i < resp.r.size(); ++i) {
        CHECK(same_bits(back.t[i], resp.dt * static_cast<double>(i)));
        CHECK(same_bits(back.v[i], resp.r[i]));
    }
}
