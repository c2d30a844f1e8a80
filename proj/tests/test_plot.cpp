#include <doctest.h>

#include "rgnet/errors.hpp"
#include "rgnet/plot.hpp"

using namespace rgnet;

TEST_CASE("parse_csv") {
  const auto t = parse_csv("axis,value,R@1\ntop_k,1,50\ntop_k,3,75\n");
  CHECK(t.header == std::vector<std::string>{"axis", "value", "R@1"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][2] == "75");
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), DataError);
}

TEST_CASE("render_sweep_svg draws one line per metric") {
  const auto t = parse_csv("axis,value,R@1,R1@0.5\ntop_k,1,50,20\ntop_k,3,75,30\ntop_k,5,80,35\n");
  const auto svg = render_sweep_svg(t, "top_k sweep");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("top_k sweep") != std::string::npos);
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 2);
}
