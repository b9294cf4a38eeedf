#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "kslab/report.hpp"
#include "kslab/rng.hpp"
#include "kslab/synthetic.hpp"
#include "test_util.hpp"

using namespace kslab;

TEST(NumberFormat, FullPrecisionRoundTrips)
{
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.uniform_int(-300, 300)));
        const auto back = detail::parse_double(detail::format_full(v));
        ASSERT_TRUE(back.has_value());
        ASSERT_EQ(*back, v);
    }
    EXPECT_EQ(detail::format_full(1.0), "1");
    EXPECT_EQ(detail::format_full(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(NumberFormat, RoundedUsesFiveSignificantDigits)
{
    EXPECT_EQ(detail::format_rounded(45.29213), "45.292");
    EXPECT_EQ(detail::format_rounded(-0.123449), "-0.12345");
    EXPECT_EQ(detail::format_rounded(std::nan("")), "undefined");
}

TEST(NumberFormat, ParseRejectsGarbage)
{
    EXPECT_FALSE(detail::parse_double("1.5x").has_value());
    EXPECT_FALSE(detail::parse_double("").has_value());
    EXPECT_EQ(*detail::parse_double(" +2.5 "), 2.5);
    EXPECT_EQ(*detail::parse_integer("8092"), 8092);
    EXPECT_FALSE(detail::parse_integer("80.92").has_value());
}

TEST(ReportTable, CsvQuotesFieldsWithDelimiters)
{
    report::Table t{{"group", "value"}, {{"Reggio, Emilia", "1"}, {"say \"hi\"", "2"}}};
    std::ostringstream out;
    t.write_csv(out);
    EXPECT_EQ(out.str(), "group,value\n\"Reggio, Emilia\",1\n\"say \"\"hi\"\"\",2\n");
}

TEST(ReportTable, JsonTypesNumbers)
{
    report::Table t{{"group", "s"}, {{"AA", "0.5"}, {"BB", "nan"}}};
    std::ostringstream out;
    t.write_json(out);
    const auto j = nlohmann::json::parse(out.str());
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["group"], "AA");
    EXPECT_EQ(j[0]["s"], 0.5);
    EXPECT_EQ(j[1]["s"], "nan");
}

TEST(ReportBlock, TextAndJson)
{
    report::KeyValueBlock b;
    b.add("model", std::string("power")).add("p", 1.25).add("n_points", std::size_t{110}).add("ok", true);
    std::ostringstream text;
    b.write_text(text);
    EXPECT_EQ(text.str(), "model = power\np = 1.25\nn_points = 110\nok = true\n");
    const auto j = b.to_json();
    EXPECT_EQ(j["p"], 1.25);
    EXPECT_EQ(j["n_points"], 110);
    EXPECT_EQ(j.begin().key(), "model");
    ASSERT_NE(b.find("p"), nullptr);
    EXPECT_EQ(*b.find("p"), "1.25");
    EXPECT_EQ(b.find("missing"), nullptr);
}

TEST(SkPoints, WriteThenReadIsExact)
{
    const auto pts = synthetic::sk_cloud({.n = 50});
    std::ostringstream out;
    report::sk_points_table(pts).write_csv(out);
    std::istringstream in(out.str());
    const auto back = report::read_sk_points(in);
    ASSERT_EQ(back.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(back[i].group_key, pts[i].group_key);
        EXPECT_EQ(back[i].s, pts[i].s);
        EXPECT_EQ(back[i].k, pts[i].k);
    }
}

TEST(SkPoints, MissingColumnIsSchemaError)
{
    std::istringstream in("group,s\nA,1\n");
    EXPECT_EQ(kind_of([&] { report::read_sk_points(in); }), ErrorKind::schema);
}

TEST(SummaryTable, RoundedRowsInOrder)
{
    std::ostringstream out;
    report::write_summary_table(out, {{"X", summarize(std::vector<double>{1, 2, 3})}}, "Title (rounded)");
    const auto s = out.str();
    EXPECT_EQ(s.rfind("Title (rounded)\n", 0), 0u);
    const char* labels[] = {"Min.", "Max.", "Sum", "N_p", "Mean (μ)", "Median (m)", "RMS", "St. Dev. (σ)", "Variance",
                            "Std Err.", "Skewn.", "Kurt.", "μ/σ", "CV (σ/μ)", "3(μ-m)/σ", "ρ", "μ-2σ", "μ+2σ"};
    std::size_t pos = 0;
    for (const char* l : labels) {
        const auto at = s.find(std::string("\n") + l, pos);
        ASSERT_NE(at, std::string::npos) << l;
        pos = at + 1;
    }
    EXPECT_NE(s.find("0.8165"), std::string::npos);
    EXPECT_NE(s.find("2.1602"), std::string::npos);
    EXPECT_EQ(s.find("0.81649658"), std::string::npos);
}

TEST(BetaCdfCsv, HeaderAndEndpoints)
{
    std::ostringstream out;
    report::write_beta_cdf_csv(out, {1.0, 2.0}, 5);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# a=1");
    std::getline(in, line);
    EXPECT_EQ(line, "# b=2");
    std::getline(in, line);
    EXPECT_EQ(line, "x,cdf");
    const double want[] = {0.0, 0.4375, 0.75, 0.9375, 1.0};
    for (int i = 0; i < 5; ++i) {
        ASSERT_TRUE(std::getline(in, line));
        const auto comma = line.find(',');
        EXPECT_EQ(*detail::parse_double(line.substr(0, comma)), i / 4.0);
        EXPECT_NEAR(*detail::parse_double(line.substr(comma + 1)), want[i], 1e-15);
    }
    EXPECT_EQ(line, "1,1");
}

TEST(SimulationTable, ColumnsAndRows)
{
    const auto r = summarize_urns({1, 1, 2, 5});
    const auto t = report::simulation_table(r, 1, 0.0, 3.0);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"k", "count", "frequency", "limit_pmf"}));
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0][0], "1");
    EXPECT_EQ(t.rows[0][1], "2");
    EXPECT_EQ(t.rows[0][2], "0.5");
    EXPECT_NEAR(*detail::parse_double(t.rows[0][3]), 2.0 / 3.0, 1e-15);
}

TEST(KsCurve, SpansData)
{
    const auto pts = synthetic::sk_cloud({.n = 30});
    const auto fit = fit_quadratic(pts);
    const auto t = report::ks_curve_table(pts, fit);
    ASSERT_EQ(t.rows.size(), 200u);
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts) lo = std::min(lo, p.s), hi = std::max(hi, p.s);
    EXPECT_EQ(*detail::parse_double(t.rows.front()[0]), lo);
    EXPECT_DOUBLE_EQ(*detail::parse_double(t.rows.back()[0]), hi);
}
