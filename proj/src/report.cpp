#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "traj_atlas/error.hpp"
#include "traj_atlas/evaluation.hpp"

namespace traj_atlas {

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "method,horizon_m,n,mean,median,p25,p75\n";
  for (const auto& row : r.rows)
    out << row.method << ',' << num(row.horizon_m) << ',' << row.n << ',' << num(row.mean) << ',' << num(row.median)
        << ',' << num(row.p25) << ',' << num(row.p75) << '\n';
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "method,horizon_m,n,mean,median,p25,p75")
    throw ParseError("missing report header", 1);
  std::vector<ReportRow> rows;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw ParseError("expected 7 fields", no);
    ReportRow r;
    r.method = f[0];
    r.horizon_m = parse_field<double>(f[1], no);
    r.n = parse_field<std::size_t>(f[2], no);
    r.mean = parse_field<double>(f[3], no);
    r.median = parse_field<double>(f[4], no);
    r.p25 = parse_field<double>(f[5], no);
    r.p75 = parse_field<double>(f[6], no);
    rows.push_back(r);
  }
  return rows;
}

void write_comparison_svg(std::ostream& out, const EvalReport& r) {
  const double W = 640, H = 420, left = 60, right = 150, top = 30, bottom = 50;
  double xmax = 0.0, ymax = 0.0;
  std::map<std::string, std::vector<const ReportRow*>> by_method;
  std::vector<std::string> order;
  for (const auto& row : r.rows) {
    if (!by_method.count(row.method)) order.push_back(row.method);
    by_method[row.method].push_back(&row);
    xmax = std::max(xmax, row.horizon_m);
    ymax = std::max({ymax, row.p75, row.mean});
  }
  if (xmax <= 0.0) xmax = 1.0;
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  auto X = [&](double h) { return left + h / xmax * (W - left - right); };
  auto Y = [&](double e) { return H - bottom - e / ymax * (H - top - bottom); };
  const char* colors[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << Y(0) << "\" x2=\"" << X(xmax) << "\" y2=\"" << Y(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << Y(0) << "\" x2=\"" << left << "\" y2=\"" << top
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double e = ymax * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << Y(e) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << std::fixed << std::setprecision(2) << e << "</text>\n";
  }
  if (!order.empty())
    for (const auto* row : by_method[order.front()])
      out << "<text x=\"" << X(row->horizon_m) << "\" y=\"" << Y(0) + 16
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(row->horizon_m) << "</text>\n";
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">horizon [m]</text>\n";
  out << "<text x=\"14\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">combined error [m]</text>\n";

  for (std::size_t m = 0; m < order.size(); ++m) {
    const auto& rows = by_method[order[m]];
    const char* c = colors[m % 5];
    out << "<polygon fill=\"" << c << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (const auto* row : rows) out << X(row->horizon_m) << ',' << Y(row->p75) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) out << X((*it)->horizon_m) << ',' << Y((*it)->p25) << ' ';
    out << "\"/>\n<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto* row : rows) out << X(row->horizon_m) << ',' << Y(row->mean) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - right + 10 << "\" y=\"" << top + 18 * (m + 1) << "\" font-size=\"12\" fill=\"" << c
        << "\">" << order[m] << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_report(const EvalReport& r, const std::filesystem::path& out_dir) {
  if (r.rows.empty()) throw ValidationError("report has no rows");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  {
    std::ofstream csv(out_dir / "report.csv");
    if (!csv) throw IoError("cannot write " + (out_dir / "report.csv").string());
    write_report_csv(csv, r);
    if (!csv) throw IoError("write failed: report.csv");
  }
  std::ofstream svg(out_dir / "comparison.svg");
  if (!svg) throw IoError("cannot write " + (out_dir / "comparison.svg").string());
  write_comparison_svg(svg, r);
  if (!svg) throw IoError("write failed: comparison.svg");
}

}  // namespace traj_atlas
