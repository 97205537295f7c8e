#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "sqz/errors.hpp"
#include "sqz/io.hpp"
#include "sqz/svg_chart.hpp"

using namespace sqz;

TEST_CASE("CSV fields are quoted per RFC 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CsvTable t({"x", "label"});
  t.add_row({"1", "p, q"});
  CHECK(t.str() == "x,label\r\n1,\"p, q\"\r\n");
  CHECK_THROWS_AS(t.add_row({"only one"}), DimensionError);
}

TEST_CASE("table numbers") {
  CHECK(db(-2.705) == "-2.71");
  CHECK(db(-0.001) == "0.00");
  CHECK(fixed(1.23456, 3) == "1.235");
  for (double v : {0.1, 160000.0, 1.0 / 3.0, 6.02e23, -7.5e-9}) CHECK(std::stod(exact(v)) == v);
  CHECK(exact(160000.0) == "160000");
}

TEST_CASE("nice ticks cover the range with round steps") {
  const auto t = nice_ticks(0.0, 5.0);
  REQUIRE(!t.empty());
  CHECK(t.front() == 0.0);
  CHECK(t.back() == doctest::Approx(5.0));
  const auto u = nice_ticks(-3.2, 1.7);
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i] - u[i - 1] == doctest::Approx(u[1] - u[0]));
}

TEST_CASE("SVG charts are self-contained and break lines at NaN") {
  LineChart c;
  c.title = "S_min <vs> power";
  c.x_label = "power (mW)";
  c.y_label = "dB";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  c.series.push_back({"N = 1", {1, 2, 3, 4}, {0.0, -1.0, nan, -2.0}, true});
  c.series.push_back({"N = 30", {1, 2, 3, 4}, {0.0, -2.0, -3.0, -2.5}, false});
  const std::string svg = render_svg(c);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("S_min &lt;vs&gt; power") != std::string::npos);
  CHECK(svg.find("N = 30") != std::string::npos);
  // First series: "M .. L .." then a fresh "M" after the gap.
  const auto first = svg.find("<path d=\"M");
  const auto end = svg.find('"', first + 9);
  const std::string d = svg.substr(first + 9, end - first - 9);
  CHECK(d.find(" M") != std::string::npos);
  CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));
}
