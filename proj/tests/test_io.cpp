#include "xxz/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>

#include "xxz/gap.hpp"
#include "xxz/graph.hpp"
#include "xxz/isoperimetry.hpp"

namespace xxz {
namespace io {
namespace {

TEST(Io, FormatG17RoundTrips) {
  for (double x : {0.0, 1.0, -1.5, 1.0 / 3.0, 2.0959283537896818,
                   std::numeric_limits<double>::min(), -0.1, 1e308}) {
    std::string s = format_g17(x);
    EXPECT_EQ(std::stod(s), x) << s;
  }
  EXPECT_EQ(format_g17(0.25), "0.25");  // %.17g trims trailing zeros
  EXPECT_THROW(format_g17(std::numeric_limits<double>::quiet_NaN()),
               std::invalid_argument);
  EXPECT_THROW(format_g17(std::numeric_limits<double>::infinity()),
               std::invalid_argument);
}

TEST(Io, JsonEncoding) {
  EXPECT_EQ(json_str("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
  EXPECT_EQ(json_str("tab\there"), "\"tab\\there\"");
  EXPECT_EQ(json_escape(std::string_view("\x01", 1)), "\\u0001");
  EXPECT_EQ(json_bool(true), "true");
  EXPECT_EQ(json_int(-42), "-42");
  EXPECT_EQ(json_uint(42), "42");
  EXPECT_EQ(json_arr({"1", "2"}), "[1,2]");
  EXPECT_EQ(json_arr({}), "[]");
  EXPECT_EQ(json_obj({{"a", "1"}, {"b", "\"x\""}}), "{\"a\":1,\"b\":\"x\"}");
}

TEST(Io, FnvHashing) {
  // FNV-1a with the standard 64-bit offset basis and prime.
  EXPECT_EQ(fnv1a(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a("a"), 12638187200555641996ull);
  EXPECT_EQ(fnv_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv_hex("abc"), fnv_hex("abc"));
  EXPECT_NE(fnv_hex("abc"), fnv_hex("abd"));
}

TEST(Io, CsvBuilder) {
  CsvBuilder csv{"a", "b"};
  csv.row({"1", "x"});
  csv.row({"2", "y"});
  EXPECT_EQ(csv.str(), "a,b\n1,x\n2,y\n");
}

TEST(Io, WriteAndReadFile) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "xxz_io_test";
  std::filesystem::remove_all(dir);
  std::filesystem::path p = dir / "sub" / "f.txt";
  write_file(p, "payload\n");
  EXPECT_EQ(read_file(p), "payload\n");
  EXPECT_THROW(read_file(dir / "missing.txt"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Io, GraphJsonRoundTrip) {
  BaseGraph g = build_lattice_window("strip", {2, 3});
  std::string s = graph_json(g);
  BaseGraph back = parse_graph(s);
  EXPECT_EQ(back.vertex_count(), g.vertex_count());
  EXPECT_EQ(back.edges(), g.edges());
  EXPECT_EQ(back.labels(), g.labels());
  EXPECT_EQ(graph_json(back), s);  // canonical: serialize(parse(s)) == s
}

TEST(Io, SpectrumCsv) {
  EXPECT_EQ(spectrum_csv({0.5, -1.0}),
            "index,value\n0,0.5\n1,-1\n");
}

TEST(Io, CatalogJson) {
  BaseGraph g = build_lattice_window("path", {6});
  DropletCatalog cat = brute_force_surface_levels(g, 2, EnumConstraint::kBulk);
  EXPECT_EQ(catalog_json(cat),
            "{\"N\":2,\"D_min\":2,\"second_level\":4,"
            "\"minimizers\":[[1,2],[2,3],[3,4]]}\n");
}

TEST(Io, CertificateJson) {
  GapCertificate cert = certify_from_bounds(0.1, 2.0, 1.0, 1, 2, 0.5, "exact");
  cert.v1_size = 10;
  cert.v2_size = 3;
  cert.partition_descriptor = "bulk(2) surface <= 3";
  std::string without = certificate_json(cert, nullptr);
  EXPECT_NE(without.find("\"a\":2"), std::string::npos);
  EXPECT_NE(without.find("\"empty\":false"), std::string::npos);
  EXPECT_NE(without.find("\"interval\":["), std::string::npos);
  EXPECT_EQ(without.find("verification"), std::string::npos);

  CertificateVerification check;
  check.pass = true;
  check.eigs_inside = 0;
  check.count_below_upper = 3;
  check.v2_size = 3;
  check.nearest_below = 0.9;
  check.nearest_above = 2.1;
  std::string with = certificate_json(cert, &check);
  EXPECT_NE(with.find("\"verification\":{\"pass\":true"), std::string::npos);

  GapCertificate empty = certify_from_bounds(0.5, 1.0, 2.0, 1, 1, 0.0);
  std::string es = certificate_json(empty, nullptr);
  EXPECT_NE(es.find("\"empty\":true"), std::string::npos);
  EXPECT_NE(es.find("\"empty_reason\":"), std::string::npos);
  EXPECT_EQ(es.find("\"interval\""), std::string::npos);
}

TEST(Io, CtReportCsvAndShellsJson) {
  CTReport rep;
  CTRow r;
  r.delta_ct = 0.5;
  r.e_re = -0.25;
  r.distance = 3;
  r.lhs = 0.125;
  r.rhs = 0.5;
  r.eta = 0.25;
  r.margin = 0.375;
  rep.rows.push_back(r);
  EXPECT_EQ(ct_report_csv(rep),
            "delta,E,distance,lhs,rhs,eta,margin\n"
            "0.5,-0.25,3,0.125,0.5,0.25,0.375\n");

  ShellRow s;
  s.distance = 1;
  s.members = 4;
  s.norm = 0.5;
  s.bound = 1.0;
  EXPECT_EQ(shells_json({s}),
            "[{\"distance\":1,\"members\":4,\"norm\":0.5,\"bound\":1}]");
}

}  // namespace
}  // namespace io
}  // namespace xxz
