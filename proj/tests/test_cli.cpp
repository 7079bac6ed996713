#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "loadcast/csv_io.hpp"
#include "loadcast/dataset_io.hpp"
#include "loadcast/error.hpp"
#include "loadcast/model_io.hpp"
#include "loadcast/synth.hpp"

using namespace loadcast;
namespace fs = std::filesystem;

namespace {

std::vector<RawSeries> toy_series() {
    std::vector<RawSeries> out;
    for (const char* id : {"A", "B"}) {
        RawSeries r;
        r.customer_id = id;
        for (int day = 0; day < 2; ++day)
            for (int h = 0; h < 24; ++h) {
                const Date date = add_days(parse_date("2019-05-06"), day);
                r.consumption.push_back({date, h, 0.1 * (h + 1) / 3.0 + (id[0] == 'B' ? 0.5 : 0.0)});
                r.temperature.push_back({date, h, 12.0 + h / 7.0});
            }
        out.push_back(r);
    }
    return out;
}

std::string csv_text(const std::vector<std::string>& lines) {
    std::string s = "customer_id,timestamp,value\n";
    for (const auto& l : lines) s += l + "\n";
    return s;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const fs::path kWork = LOADCAST_TEST_WORKDIR;

int cli(const std::string& args, const std::string& log = "cli.log") {
    const std::string cmd =
        std::string(LOADCAST_CLI) + " " + args + " >> " + (kWork / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("timestamps") {
    const Timestamp t = parse_timestamp("2019-10-27T02:00:00");
    CHECK(t.date == parse_date("2019-10-27"));
    CHECK(t.hour == 2);
    CHECK(parse_timestamp("2019-10-27 23:00").hour == 23);
    CHECK(format_timestamp(t.date, 5) == "2019-10-27T05:00:00");
    CHECK_THROWS_AS(parse_timestamp("2019-10-27T02:30:00"), InputError);
    CHECK_THROWS_AS(parse_timestamp("2019-10-27T24:00:00"), InputError);
    CHECK_THROWS_AS(parse_timestamp("27/10/2019 02:00"), InputError);
}

TEST_CASE("ingest and export round trip") {
    const auto series = toy_series();
    std::stringstream cons, temp;
    export_raw(cons, temp, series);
    IngestReport report;
    const auto back = ingest(cons, temp, &report);
    CHECK(back == series);
    // Rows of both files.
    CHECK(report.rows == 192);
    CHECK(report.gaps.empty());
    // A second export of the ingested data is byte-identical.
    std::stringstream cons2, temp2;
    export_raw(cons2, temp2, back);
    std::stringstream cons1, temp1;
    export_raw(cons1, temp1, series);
    CHECK(cons2.str() == cons1.str());
    CHECK(temp2.str() == temp1.str());
}

TEST_CASE("out-of-order rows are sorted") {
    const auto series = toy_series();
    std::stringstream cons, temp;
    export_raw(cons, temp, series);
    std::vector<std::string> lines;
    std::string line;
    std::getline(cons, line);
    while (std::getline(cons, line)) lines.push_back(line);
    std::mt19937_64 gen(4);
    std::shuffle(lines.begin(), lines.end(), gen);
    std::stringstream shuffled(csv_text(lines));
    temp.seekg(0);
    CHECK(ingest(shuffled, temp) == series);
}

TEST_CASE("ingest validation") {
    const std::string temp_text = csv_text({"A,2019-05-06T00:00:00,10", "A,2019-05-06T01:00:00,10"});
    SUBCASE("duplicate ordinary hour") {
        std::stringstream cons(csv_text({"A,2019-05-06T00:00:00,1", "A,2019-05-06T01:00:00,1", "A,2019-05-06T01:00:00,2"}));
        std::stringstream temp(temp_text);
        try {
            ingest(cons, temp);
            FAIL("expected an input error");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("lines 3, 4") != std::string::npos);
        }
    }
    SUBCASE("autumn 02:00 may appear twice") {
        std::stringstream cons(csv_text({"A,2019-10-27T01:00:00,1", "A,2019-10-27T02:00:00,1", "A,2019-10-27T02:00:00,2"}));
        std::stringstream temp(csv_text({"A,2019-10-27T01:00:00,1", "A,2019-10-27T02:00:00,1", "A,2019-10-27T02:00:00,2"}));
        IngestReport report;
        const auto s = ingest(cons, temp, &report);
        CHECK(s.front().consumption.size() == 3);
        CHECK(s.front().consumption[2].value == 2.0);
        CHECK(report.dst_duplicates >= 1);
    }
    SUBCASE("customer in one file only") {
        std::stringstream cons(csv_text({"A,2019-05-06T00:00:00,1", "A,2019-05-06T01:00:00,1", "Z,2019-05-06T00:00:00,1"}));
        std::stringstream temp(temp_text);
        try {
            ingest(cons, temp);
            FAIL("expected an input error");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("Z") != std::string::npos);
            CHECK(msg.find("line 4") != std::string::npos);
        }
    }
    SUBCASE("malformed rows cite their line") {
        std::stringstream cons(csv_text({"A,2019-05-06T00:00:00,1", "A,2019-05-06T01:00:00,abc"}));
        std::stringstream temp(temp_text);
        try {
            ingest(cons, temp);
            FAIL("expected an input error");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("consumption:3") != std::string::npos);
        }
        std::stringstream short_row(csv_text({"A,2019-05-06T00:00:00"}));
        std::stringstream temp2(temp_text);
        CHECK_THROWS_AS(ingest(short_row, temp2), InputError);
    }
    SUBCASE("gaps are reported") {
        std::stringstream cons(csv_text({"A,2019-05-06T00:00:00,1", "A,2019-05-06T03:00:00,1"}));
        std::stringstream temp(csv_text({"A,2019-05-06T00:00:00,1", "A,2019-05-06T03:00:00,1"}));
        IngestReport report;
        ingest(cons, temp, &report);
        CHECK_FALSE(report.gaps.empty());
    }
}

TEST_CASE("synthetic corpus") {
    SynthConfig cfg;
    cfg.n_customers = 6;
    cfg.seed = 21;
    const SynthData a = synthesize(cfg), b = synthesize(cfg);
    std::stringstream ca, ta, cb, tb;
    export_raw(ca, ta, a.series);
    export_raw(cb, tb, b.series);
    CHECK(ca.str() == cb.str());
    CHECK(ta.str() == tb.str());
    cfg.seed = 22;
    std::stringstream cc, tc;
    export_raw(cc, tc, synthesize(cfg).series);
    CHECK(cc.str() != ca.str());

    const DstDays dst = eu_dst_days(2019);
    for (const RawSeries& s : a.series) {
        CAPTURE(s.customer_id);
        std::vector<double> logs;
        for (const Reading& r : s.consumption) {
            REQUIRE(r.value >= 0.0);
            logs.push_back(std::log(r.value));
        }
        const double n = static_cast<double>(logs.size());
        double mean = 0.0;
        for (double v : logs) mean += v / n;
        double m2 = 0.0, m3 = 0.0;
        for (double v : logs) m2 += (v - mean) * (v - mean) / n, m3 += std::pow(v - mean, 3) / n;
        const double skew = m3 / std::pow(m2, 1.5);
        CHECK(std::abs(skew) < 0.5);

        auto count = [&](Date d, int h) {
            return std::count_if(s.consumption.begin(), s.consumption.end(),
                                 [&](const Reading& r) { return r.date == d && r.hour == h; });
        };
        CHECK(count(dst.spring, 2) == 0);
        CHECK(count(dst.autumn, 2) == 2);
        CHECK(count(dst.spring, 3) == 1);
    }
    CHECK(a.days.size() == 6 * 365);
}

/// Runs synth, preprocess, train and two predicts once for all subcases.
bool chain_ready() {
    static const bool ok = [] {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        const std::string w = kWork.string();
        const std::string small_net = " --hidden-layers 2 --hidden-width 16 --conv-channels 2 --epochs 3 --batch-size 32";
        const std::string window = " --from 2019-06-01 --to 2019-06-30 --samples 500";
        std::ofstream(kWork / "one.txt") << "# one customer\nC007\n";
        return cli("synth --customers 30 --seed 5 --out " + w + "/raw") == 0 &&
               cli("preprocess --consumption " + w + "/raw/consumption.csv --temperature " + w +
                   "/raw/temperature.csv --seed 5 --out " + w + "/data") == 0 &&
               cli("train --data " + w + "/data --model " + w + "/model.json --seed 5" + small_net) == 0 &&
               cli("predict --data " + w + "/data --model " + w + "/model.json --out " + w + "/fc" + window) == 0 &&
               cli("predict --data " + w + "/data --model " + w + "/model.json --out " + w + "/fc2" + window) == 0;
    }();
    return ok;
}

TEST_CASE("command-line workflow") {
    REQUIRE(chain_ready());
    const std::string w = kWork.string();

    SUBCASE("predict is byte-for-byte reproducible") {
        for (const char* f : {"forecast_hourly.csv", "forecast_daily.csv"}) {
            const std::string first = read_file(kWork / "fc" / f);
            CHECK_FALSE(first.empty());
            CHECK(first == read_file(kWork / "fc2" / f));
        }
    }

    SUBCASE("forecast bands are ordered") {
        for (Resolution r : {Resolution::Hourly, Resolution::Daily}) {
            const auto rows = read_forecasts(kWork / "fc" / (r == Resolution::Hourly ? "forecast_hourly.csv"
                                                                                     : "forecast_daily.csv"), r);
            CHECK(rows.size() == (r == Resolution::Hourly ? 30u * 30 * 24 : 30u * 30));
            for (const auto& row : rows) {
                CHECK(row.lower <= row.median);
                CHECK(row.median <= row.upper);
            }
        }
    }

    SUBCASE("single-member portfolio matches the member's forecast") {
        for (Resolution r : {Resolution::Hourly, Resolution::Daily}) {
            const std::string res(to_string(r));
            const std::string file = r == Resolution::Hourly ? "forecast_hourly.csv" : "forecast_daily.csv";
            REQUIRE(cli("aggregate --forecast " + w + "/fc/" + file + " --members " + w + "/one.txt --resolution " +
                        res + " --samples 20000 --seed 3 --out " + w + "/portfolio_" + res + ".csv") == 0);
            auto rows = read_forecasts(kWork / "fc" / file, r);
            std::erase_if(rows, [](const ForecastRow& x) { return x.customer_id != "C007"; });
            std::ifstream in(kWork / ("portfolio_" + res + ".csv"));
            std::string line;
            std::getline(in, line);
            CHECK(line == (r == Resolution::Hourly ? "date,hour,median,lower,upper" : "date,median,lower,upper"));
            std::size_t i = 0;
            while (std::getline(in, line)) {
                const auto f = split_csv_line(line);
                REQUIRE(i < rows.size());
                const double median = parse_double(f[r == Resolution::Hourly ? 2 : 1], "median");
                CHECK(std::abs(median / rows[i].median - 1.0) < 0.03);
                ++i;
            }
            CHECK(i == rows.size());
        }
    }

    SUBCASE("evaluate and inspect") {
        REQUIRE(cli("evaluate --data " + w + "/data --forecasts " + w + "/fc --seed 5 --samples 500 --out " + w +
                    "/report.csv") == 0);
        std::ifstream in(kWork / "report.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "level,resolution,split,model,n_points,mdre,coverage");
        std::size_t rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows >= 8);

        REQUIRE(cli("inspect --model " + w + "/model.json --data " + w + "/data --histogram 20 --out " + w +
                    "/hist.csv", "inspect.log") == 0);
        const std::string log = read_file(kWork / "inspect.log");
        CHECK(log.find("lambda_mu") != std::string::npos);
        CHECK(read_file(kWork / "hist.csv").find("variable,bin_lower,bin_upper,count") == 0);
        const Model m = load_model(kWork / "model.json");
        CHECK(m.seed == 5);
    }

    SUBCASE("user errors exit with status 1") {
        CHECK(cli("predict --data " + w + "/nowhere --model " + w + "/model.json --out " + w + "/x", "err.log") == 1);
        CHECK(cli("aggregate --forecast " + w + "/fc/forecast_daily.csv --members " + w + "/one.txt --out " + w +
                  "/x.csv --samples 10", "err.log") == 1);
        CHECK(cli("frobnicate", "err.log") == 1);
        CHECK(cli("synth", "err.log") == 1);
        std::ofstream(kWork / "ghost.txt") << "NOPE\n";
        CHECK(cli("aggregate --forecast " + w + "/fc/forecast_daily.csv --resolution daily --members " + w +
                  "/ghost.txt --out " + w + "/x.csv", "err.log") == 1);
        const std::string log = read_file(kWork / "err.log");
        CHECK(log.find("error [cli-app]") != std::string::npos);
        CHECK(log.find("NOPE") != std::string::npos);
    }
}
