#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rfsense/detector.hpp"
#include "rfsense/errors.hpp"
#include "rfsense/simulate.hpp"
#include "rfsense/trace_io.hpp"

#include <nlohmann/json.hpp>

using namespace rfsense;
using testutil::make_trace;
using testutil::plateau;

namespace {

// 12 calibration samples at `level`, then the given drops below it.
std::vector<RssiSample> cal_then_drops(double level, const std::vector<double>& drops) {
    std::vector<double> vals(12, level);
    for (double d : drops) vals.push_back(level - d);
    return make_trace(vals);
}

std::vector<MotionEvent> detect_fixture(const char* id, double sigma = 0.0,
                                        std::uint64_t seed = 0) {
    auto s = fixture_scenario(id);
    s.noise_sigma_db = sigma;
    s.seed = seed;
    return detect_trace(simulate(s));
}

}  // namespace

TEST_CASE("config defaults are consistent") {
    const DetectorConfig c;
    CHECK(c.sustained_threshold_db == 4.0);
    CHECK(c.release_margin_db == 2.0);
    CHECK(c.momentary_threshold_db == 8.0);
    CHECK(c.min_sustained_samples == 3);
    CHECK(c.side_boundary_db == 12.0);
    CHECK(c.violations().empty());
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config invariants are enforced") {
    DetectorConfig c;
    c.release_margin_db = 5.0;  // exceeds sustained threshold
    CHECK_FALSE(c.violations().empty());
    CHECK_THROWS_AS(c.validate(), ValidationError);

    c = {};
    c.momentary_threshold_db = 3.0;  // below sustained threshold
    CHECK_FALSE(c.violations().empty());

    c = {};
    c.min_sustained_samples = 0;
    CHECK_FALSE(c.violations().empty());

    c = {};
    c.side_boundary_db = 4.0;  // must exceed sustained threshold
    CHECK_FALSE(c.violations().empty());

    c = {};
    c.momentary_threshold_db = c.sustained_threshold_db;  // equal is allowed
    CHECK(c.violations().empty());
}

TEST_CASE("side follows the drop magnitude") {
    const DetectorConfig c;
    CHECK(classify_side(15.0, c) == Side::near_ap);
    CHECK(classify_side(12.0, c) == Side::near_ap);  // boundary is inclusive
    CHECK(classify_side(11.99, c) == Side::near_receiver);
    CHECK(classify_side(5.0, c) == Side::near_receiver);
}

TEST_CASE("kind and side names round trip") {
    CHECK(to_string(EventKind::momentary) == "momentary");
    CHECK(event_kind_from_string("sustained") == EventKind::sustained);
    CHECK(to_string(Side::near_ap) == "near_ap");
    CHECK(side_from_string("near_receiver") == Side::near_receiver);
    CHECK(side_from_string("unknown") == Side::unknown);
    CHECK_THROWS_AS(event_kind_from_string("bogus"), ParseError);
    CHECK_THROWS_AS(side_from_string("left"), ParseError);
}

TEST_CASE("a flat trace produces no events") {
    const auto events = detect_trace(make_trace(plateau(200, -50.0)));
    CHECK(events.empty());
}

TEST_CASE("fixture replay: single deep walk") {
    const auto events = detect_fixture("fig5_los_2p5m");
    REQUIRE(events.size() == 1);
    const auto& e = events[0];
    CHECK(e.start_ms == 20'000);
    CHECK(e.end_ms == 35'000);
    CHECK(e.drop_db == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(e.baseline_at_start_dbm == doctest::Approx(-50.0).epsilon(1e-9));
    CHECK(e.min_rssi_dbm == doctest::Approx(-65.0).epsilon(1e-9));
    CHECK(e.kind == EventKind::sustained);
    CHECK(e.side == Side::near_ap);
}

TEST_CASE("fixture replay: longer path, smaller drop") {
    const auto events = detect_fixture("fig6_los_5p3m");
    REQUIRE(events.size() == 1);
    CHECK(events[0].drop_db == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(events[0].side == Side::near_ap);
    CHECK(events[0].kind == EventKind::sustained);
}

TEST_CASE("fixture replay: two people, two events") {
    const auto events = detect_fixture("fig7_two_people");
    REQUIRE(events.size() == 2);
    CHECK(events[0].start_ms == 20'000);
    CHECK(events[0].drop_db == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(events[1].start_ms == 48'000);
    CHECK(events[1].drop_db == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(events[0].side == Side::near_receiver);
    CHECK(events[1].side == Side::near_receiver);
}

TEST_CASE("fixture replay: one-sample crossing is momentary") {
    const auto events = detect_fixture("fig8_fast_crossing");
    REQUIRE(events.size() == 1);
    const auto& e = events[0];
    CHECK(e.kind == EventKind::momentary);
    CHECK(e.start_ms == 30'000);
    CHECK(e.end_ms == 30'250);
    CHECK(e.drop_db == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(e.side == Side::near_receiver);
}

TEST_CASE("fixture replay: wall sides are told apart") {
    const auto events = detect_fixture("fig9_wall");
    REQUIRE(events.size() == 2);
    CHECK(events[0].drop_db == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(events[0].side == Side::near_receiver);
    CHECK(events[1].drop_db == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(events[1].side == Side::near_ap);
}

TEST_CASE("fixture replay: repeated crossings alternate sides") {
    const auto events = detect_fixture("fig10_wall_repeated");
    REQUIRE(events.size() == 4);
    CHECK(events[0].side == Side::near_receiver);
    CHECK(events[1].side == Side::near_ap);
    CHECK(events[2].side == Side::near_receiver);
    CHECK(events[3].side == Side::near_ap);
    CHECK(events[0].drop_db == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(events[1].drop_db == doctest::Approx(19.0).epsilon(1e-9));
    for (const auto& e : events) CHECK(e.kind == EventKind::sustained);
}

TEST_CASE("three samples open a sustained event, two do not") {
    // two marks only: discarded at close
    CHECK(detect_trace(cal_then_drops(-50, {5, 5, 0, 0, 0})).empty());
    // three consecutive marks: sustained event
    const auto events = detect_trace(cal_then_drops(-50, {5, 5, 5, 0, 0}));
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::sustained);
    CHECK(events[0].start_ms == 12 * 250);
    CHECK(events[0].end_ms == 15 * 250);
    CHECK(events[0].drop_db == doctest::Approx(5.0));
}

TEST_CASE("one deep sample opens a momentary event") {
    const auto events = detect_trace(cal_then_drops(-50, {9, 0, 0, 0}));
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::momentary);
    CHECK(events[0].drop_db == doctest::Approx(9.0));
    CHECK(events[0].end_ms == events[0].start_ms + 250);
}

TEST_CASE("a drop just under the momentary threshold needs a run") {
    CHECK(detect_trace(cal_then_drops(-50, {7.99, 0, 0, 0})).empty());
    CHECK(detect_trace(cal_then_drops(-50, {8.0, 0, 0, 0})).size() == 1);
}

TEST_CASE("interrupted runs never open") {
    CHECK(detect_trace(cal_then_drops(-50, {5, 5, 0, 5, 5, 0, 5, 5, 0})).empty());
}

TEST_CASE("hysteresis holds an event through shallow samples") {
    // open with three marks, then oscillate between 4 and 2.5 db of drop;
    // 2.5 is inside [2, 4) so the event must stay open, then close at 0
    std::vector<double> drops = {5, 5, 5};
    for (int i = 0; i < 20; ++i) {
        drops.push_back(i % 2 == 0 ? 2.5 : 4.0);
        }
    drops.push_back(0.0);
    drops.push_back(0.0);
    const auto events = detect_trace(cal_then_drops(-50, drops));
    REQUIRE(events.size() == 1);
    CHECK(events[0].end_ms == (12 + 23) * 250);
}

TEST_CASE("a dip below the release margin closes the event") {
    // drop 1.9 < 4 - 2: closes; the following marks open a second event
    const auto events = detect_trace(cal_then_drops(-50, {5, 5, 5, 1.9, 5, 5, 5, 0, 0}));
    CHECK(events.size() == 2);
}

TEST_CASE("event drop is at least the sustained threshold") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> depth(4.0, 25.0);
    std::uniform_int_distribution<int> len(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> drops;
        for (int b = 0; b < 3; ++b) {
            const int n = len(rng);
            const double d = depth(rng);
            for (int i = 0; i < n; ++i) drops.push_back(d);
            for (int i = 0; i < 35; ++i) drops.push_back(0.0);
        }
        const auto events = detect_trace(cal_then_drops(-60, drops));
        for (const auto& e : events) {
            CHECK(e.drop_db >= 4.0);
            CHECK(e.start_ms <= e.end_ms);
            CHECK(e.baseline_at_start_dbm - e.min_rssi_dbm ==
                  doctest::Approx(e.drop_db).epsilon(1e-9));
        }
    }
}

TEST_CASE("kind matches the event span") {
    for (int n = 1; n <= 10; ++n) {
        std::vector<double> drops(n, 10.0);
        drops.insert(drops.end(), 20, 0.0);
        const auto events = detect_trace(cal_then_drops(-55, drops));
        if (n == 2) {
            // both samples cleared the threshold but the run is too short to
            // be sustained and too long to be momentary
            CHECK(events.empty());
            continue;
        }
        REQUIRE(events.size() == 1);
        const auto& e = events[0];
        const bool momentary = e.kind == EventKind::momentary;
        CHECK(momentary == (e.end_ms - e.start_ms < 3 * 250));
    }
}

TEST_CASE("a deepening obstruction never yields a smaller drop") {
    double prev = 0.0;
    for (double loss : {5.0, 8.0, 12.0, 16.0, 20.0}) {
        std::vector<double> drops(8, loss);
        drops.insert(drops.end(), 10, 0.0);
        const auto events = detect_trace(cal_then_drops(-50, drops));
        REQUIRE(events.size() == 1);
        CHECK(events[0].drop_db >= prev);
        prev = events[0].drop_db;
    }
}

TEST_CASE("the baseline stays frozen for the whole event") {
    // 60 obstructed samples dwarf the 40-sample window; without freezing, the
    // baseline would adapt to the obstructed level and the drop would shrink
    std::vector<double> drops(60, 15.0);
    drops.insert(drops.end(), 10, 0.0);
    std::vector<double> vals(40, -50.0);
    for (double d : drops) vals.push_back(-50.0 - d);
    const auto events = detect_trace(make_trace(vals), {}, 40, 40);
    REQUIRE(events.size() == 1);
    CHECK(events[0].drop_db == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(events[0].baseline_at_start_dbm == doctest::Approx(-50.0).epsilon(1e-9));
}

TEST_CASE("an obstruction running to the end of the trace still closes") {
    const auto trace = cal_then_drops(-50, {9, 9, 9, 9});
    const auto events = detect_trace(trace);
    REQUIRE(events.size() == 1);
    CHECK(events[0].end_ms == trace.back().timestamp_ms);
    CHECK(events[0].kind == EventKind::sustained);
}

TEST_CASE("a noiseless quiet hour is silent") {
    // one million constant samples must not produce a single event
    std::vector<RssiSample> trace;
    trace.reserve(1'000'000);
    const auto id = testutil::bssid(3);
    for (int i = 0; i < 1'000'000; ++i) {
        trace.push_back({static_cast<std::int64_t>(i) * 250, id, RssiDbm{-62.0}, {}});
    }
    CHECK(detect_trace(trace).empty());
}

TEST_CASE("ingest refuses to run before arming") {
    Baseline b;  // never calibrated
    DetectorState s;
    CHECK(s.phase == DetectorPhase::calibrating);
    CHECK(testutil::throws_containing<CalibrationError>(
        [&] { ingest(s, b, {0, testutil::bssid(), RssiDbm{-50.0}, {}}, {}); },
        "not armed"));
}

TEST_CASE("ingest refuses non-advancing timestamps") {
    const auto warmup = make_trace(plateau(12, -50.0));
    const auto b = calibrate(warmup, 12);
    const auto s = DetectorState::armed();
    CHECK(testutil::throws_containing<SequencingError>(
        [&] { ingest(s, b, {warmup.back().timestamp_ms, testutil::bssid(), RssiDbm{-50.0}, {}}, {}); },
        "does not advance"));
}

TEST_CASE("armed state reports clear phase and no open event") {
    const auto s = DetectorState::armed();
    CHECK(s.phase == DetectorPhase::clear);
    CHECK_FALSE(s.open_event.has_value());
    CHECK(s.consecutive_below == 0);
}

TEST_CASE("open event is present exactly while obstructed") {
    auto b = calibrate(make_trace(plateau(12, -50.0)), 12);
    auto s = DetectorState::armed();
    std::int64_t t = 3000;
    auto feed = [&](double rssi) {
        auto r = ingest(s, b, {t, testutil::bssid(), RssiDbm{rssi}, {}}, {});
        t += 250;
        s = r.state;
        b = r.baseline;
        return r.event;
    };
    CHECK_FALSE(feed(-50.0).has_value());
    CHECK(s.phase == DetectorPhase::clear);
    feed(-59.0);  // momentary opener
    CHECK(s.phase == DetectorPhase::obstructed);
    CHECK(s.open_event.has_value());
    CHECK(b.frozen);
    const auto ev = feed(-50.0);
    REQUIRE(ev.has_value());
    CHECK(s.phase == DetectorPhase::clear);
    CHECK_FALSE(s.open_event.has_value());
    CHECK_FALSE(b.frozen);
    CHECK(ev->kind == EventKind::momentary);
}

TEST_CASE("detector class arms itself and binds to one bssid") {
    Detector d;
    CHECK_FALSE(d.armed());
    std::int64_t t = 0;
    for (int i = 0; i < 12; ++i) {
        CHECK_FALSE(d.push({t, testutil::bssid(1), RssiDbm{-50.0}, {}}).has_value());
        t += 250;
    }
    CHECK(d.armed());
    CHECK(d.baseline()->level_dbm == -50.0);
    CHECK(testutil::throws_containing<ValidationError>(
        [&] { d.push({t, testutil::bssid(2), RssiDbm{-50.0}, {}}); },
        "bound to bssid"));
}

TEST_CASE("detector finish closes what is still open") {
    Detector d;
    std::int64_t t = 0;
    for (int i = 0; i < 12; ++i) {
        d.push({t, testutil::bssid(), RssiDbm{-50.0}, {}});
        t += 250;
    }
    for (int i = 0; i < 5; ++i) {
        CHECK_FALSE(d.push({t, testutil::bssid(), RssiDbm{-62.0}, {}}).has_value());
        t += 250;
    }
    const auto ev = d.finish();
    REQUIRE(ev.has_value());
    CHECK(ev->end_ms == t - 250);
    CHECK(ev->drop_db == doctest::Approx(12.0));
    CHECK_FALSE(d.finish().has_value());  // idempotent
}

TEST_CASE("unarmed finish yields nothing") {
    Detector d;
    d.push({0, testutil::bssid(), RssiDbm{-50.0}, {}});
    CHECK_FALSE(d.finish().has_value());
}

TEST_CASE("detect_trace needs enough samples per bssid") {
    const auto trace = make_trace(plateau(8, -50.0));
    CHECK(testutil::throws_containing<CalibrationError>(
        [&] { detect_trace(trace); }, "8 samples"));
}

TEST_CASE("detect_trace rejects per-bssid disorder") {
    auto trace = make_trace(plateau(30, -50.0));
    std::swap(trace[20], trace[21]);
    CHECK_THROWS_AS(detect_trace(trace), SequencingError);
}

TEST_CASE("bssids are detected independently and merged by start") {
    auto one = make_trace(plateau(12, -50.0, {-62, -62, -62, -62, -50, -50}),
                          250, testutil::bssid(1));
    // second stream: same shape, shifted later in time and deeper
    std::vector<double> vals2(12, -44.0);
    vals2.insert(vals2.end(), {-44, -44, -44, -44, -60, -60, -60, -60, -44, -44});
    auto two = make_trace(vals2, 250, testutil::bssid(2));
    std::vector<RssiSample> merged;
    for (std::size_t i = 0; i < one.size() || i < two.size(); ++i) {
        if (i < one.size()) merged.push_back(one[i]);
        if (i < two.size()) merged.push_back(two[i]);
    }
    const auto events = detect_trace(merged);
    REQUIRE(events.size() == 2);
    CHECK(events[0].bssid == testutil::bssid(1));
    CHECK(events[0].start_ms == 12 * 250);
    CHECK(events[1].bssid == testutil::bssid(2));
    CHECK(events[1].start_ms == 16 * 250);
    CHECK(std::is_sorted(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; }));
}

TEST_CASE("plot rows align one to one with the trace") {
    auto s = fixture_scenario("fig5_los_2p5m");
    s.noise_sigma_db = 0.0;
    const auto trace = simulate(s);
    std::vector<PlotRow> rows;
    detect_trace(trace, {}, 40, 12, &rows);
    REQUIRE(rows.size() == trace.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].timestamp_ms == trace[i].timestamp_ms);
        CHECK(rows[i].rssi_dbm == trace[i].rssi.value);
    }
    // calibration rows carry the armed level and no event
    CHECK(rows[0].baseline_dbm == doctest::Approx(-50.0));
    CHECK_FALSE(rows[0].event_open);
    // the obstructed stretch is flagged and keeps the frozen baseline
    const auto at = [&](std::int64_t t) {
        for (const auto& r : rows)
            if (r.timestamp_ms == t) return r;
        REQUIRE(false);
        return rows[0];
    };
    CHECK(at(25'000).event_open);
    CHECK(at(25'000).baseline_dbm == doctest::Approx(-50.0));
    CHECK_FALSE(at(10'000).event_open);
    CHECK_FALSE(at(40'000).event_open);
}

TEST_CASE("grouping reference: events equal marked runs on noiseless traces") {
    // brute-force reference: group consecutive samples with drop >= 4,
    // keep groups of >= 3 and singletons >= 8, intervals [first, one-after-last]
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> depth(4.5, 25.0);
    std::uniform_real_distribution<double> level_dist(-75.0, -35.0);
    std::uniform_int_distribution<int> runlen(1, 10);
    std::uniform_int_distribution<int> gaplen(31, 60);
    for (int trial = 0; trial < 50; ++trial) {
        const double level = std::round(level_dist(rng) * 100.0) / 100.0;
        std::vector<double> vals(12, level);
        struct Ref {
            std::int64_t start, end;
        };
        std::vector<Ref> expect;
        const int blocks = 1 + static_cast<int>(rng() % 4);
        for (int b = 0; b < blocks; ++b) {
            const int n = runlen(rng);
            double d = std::round(depth(rng) * 100.0) / 100.0;
            if (d > 7.9 && d < 8.1) d = 8.5;  // keep clear of the momentary edge
            const bool keeps = n >= 3 || (n == 1 && d >= 8.0);
            const auto first = static_cast<std::int64_t>(vals.size()) * 250;
            for (int i = 0; i < n; ++i) vals.push_back(level - d);
            if (keeps) expect.push_back({first, static_cast<std::int64_t>(vals.size()) * 250});
            const int gap = gaplen(rng);
            for (int i = 0; i < gap; ++i) vals.push_back(level);
        }
        const auto events = detect_trace(make_trace(vals));
        REQUIRE(events.size() == expect.size());
        for (std::size_t i = 0; i < events.size(); ++i) {
            CHECK(events[i].start_ms == expect[i].start);
            CHECK(events[i].end_ms == expect[i].end);
        }
    }
}

TEST_CASE("events serialize to stable json lines") {
    MotionEvent e;
    e.bssid = Bssid::parse("02:00:00:00:00:09");
    e.start_ms = 20'000;
    e.end_ms = 26'000;
    e.min_rssi_dbm = -60.0;
    e.baseline_at_start_dbm = -55.0;
    e.drop_db = 5.0;
    e.kind = EventKind::sustained;
    e.side = Side::near_receiver;
    CHECK(event_to_jsonl(e) ==
          R"({"bssid":"02:00:00:00:00:09","start_ms":20000,"end_ms":26000,)"
          R"("min_rssi_dbm":-60.00,"baseline_at_start_dbm":-55.00,"drop_db":5.00,)"
          R"("kind":"sustained","side":"near_receiver"})");
}

TEST_CASE("event files round trip") {
    auto s = fixture_scenario("fig10_wall_repeated");
    s.noise_sigma_db = 0.0;
    const auto events = detect_trace(simulate(s));
    REQUIRE(events.size() == 4);
    std::ostringstream out;
    write_events(out, events);
    std::istringstream in(out.str());
    const auto back = read_events(in);
    REQUIRE(back.size() == events.size());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == events[i]);
}

TEST_CASE("event files reject malformed lines") {
    using testutil::throws_containing;
    const std::string good =
        R"({"bssid":"02:00:00:00:00:09","start_ms":1,"end_ms":2,"min_rssi_dbm":-60.00,)"
        R"("baseline_at_start_dbm":-55.00,"drop_db":5.00,"kind":"sustained","side":"near_ap"})";

    {
        std::istringstream in(good + "\n" + good);
        CHECK(read_events(in).size() == 2);
    }
    {
        std::istringstream in(good + "\n{\"bssid\":\"02:00:00:00:00:09\"}");
        CHECK(throws_containing<ParseError>([&] { read_events(in); }, "line 2"));
    }
    {
        auto j = nlohmann::json::parse(good);
        j["kind"] = "weird";
        std::istringstream in(j.dump());
        CHECK_THROWS_AS(read_events(in), ParseError);
    }
    {
        auto j = nlohmann::json::parse(good);
        j["extra"] = true;
        std::istringstream in(j.dump());
        CHECK(throws_containing<ParseError>([&] { read_events(in); }, "extra"));
    }
}

TEST_CASE("detect options json") {
    const auto opts = detect_options_from_json(nlohmann::json::parse(R"({
        "sustained_threshold_db": 5.0,
        "momentary_threshold_db": 9.0,
        "side_boundary_db": 14.0,
        "baseline_window": 20,
        "min_calibration_samples": 10
    })"));
    CHECK(opts.config.sustained_threshold_db == 5.0);
    CHECK(opts.config.release_margin_db == 2.0);  // untouched default
    CHECK(opts.baseline_window == 20);
    CHECK(opts.min_calibration == 10);
    CHECK_NOTHROW(opts.validate());

    CHECK(testutil::throws_containing<ParseError>(
        [] { detect_options_from_json(nlohmann::json::parse(R"({"threshold": 1})")); },
        "threshold"));
    CHECK_THROWS_AS(detect_options_from_json(nlohmann::json::parse(
                        R"({"min_sustained_samples": 0})")),
                    ValidationError);
    // window smaller than the calibration minimum
    CHECK_THROWS_AS(detect_options_from_json(nlohmann::json::parse(
                        R"({"baseline_window": 8})"))
                        .validate(),
                    ValidationError);
}

TEST_CASE("plot csv format") {
    const std::vector<PlotRow> rows = {
        {0, -50.0, -50.0, false},
        {250, -65.4, -50.0, true},
    };
    std::ostringstream out;
    write_plot_csv(out, rows);
    CHECK(out.str() ==
          "timestamp_ms,rssi_dbm,baseline_dbm,event_open\n"
          "0,-50.00,-50.00,0\n"
          "250,-65.40,-50.00,1\n");
}
