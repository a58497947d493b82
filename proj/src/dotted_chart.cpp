#include "guidecheck/dotted_chart.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <ostream>

#include "guidecheck/csv.hpp"
#include "guidecheck/xml.hpp"

namespace guidecheck {

namespace {

constexpr double kWidth = 960.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 40.0;
constexpr double kRowHeight = 4.0;
constexpr double kDotRadius = 1.6;

}  // namespace

DottedChartData dotted_chart(const EventLog& log, const WaveBoundaries& waves) {
  std::vector<const Trace*> order;
  for (const auto& trace : log.traces()) {
    if (!trace.empty()) order.push_back(&trace);
  }
  std::stable_sort(order.begin(), order.end(), [](const Trace* a, const Trace* b) {
    return std::tie((*a)[0].date, a->case_id()) < std::tie((*b)[0].date, b->case_id());
  });

  DottedChartData chart;
  chart.cutoffs.assign(waves.cutoffs().begin(), waves.cutoffs().end());
  chart.rows.reserve(order.size());
  chart.dots.reserve(log.event_count());
  for (std::size_t row = 0; row < order.size(); ++row) {
    const Trace& trace = *order[row];
    chart.rows.push_back({trace.case_id(), trace[0].date});
    for (std::size_t i = 0; i < trace.size(); ++i) chart.dots.push_back({row, trace[i].date, i == 0});
  }
  return chart;
}

void write_dotted_chart_csv(const DottedChartData& chart, std::ostream& out) {
  out << "row_index,case_id,date,is_first\n";
  for (const auto& dot : chart.dots) {
    out << dot.row << ',' << csv::escape(chart.rows[dot.row].case_id) << ',' << format_date(dot.date)
        << ',' << (dot.is_first ? 1 : 0) << '\n';
  }
}

void write_dotted_chart_svg(const DottedChartData& chart, std::ostream& out) {
  std::vector<Date> all_dates;
  for (const auto& dot : chart.dots) all_dates.push_back(dot.date);
  all_dates.insert(all_dates.end(), chart.cutoffs.begin(), chart.cutoffs.end());

  Date lo{};
  Date hi{};
  if (!all_dates.empty()) {
    const auto [mn, mx] = std::minmax_element(all_dates.begin(), all_dates.end());
    lo = *mn;
    hi = *mx;
  }
  const double span = std::max(1L, days_between(lo, hi));
  const double plot_width = kWidth - kMarginLeft - kMarginRight;
  const double plot_height = std::max<double>(1, chart.rows.size()) * kRowHeight;
  const double height = kMarginTop + plot_height + kMarginBottom;
  auto x_of = [&](Date d) { return kMarginLeft + plot_width * days_between(lo, d) / span; };
  auto y_of = [&](std::size_t row) { return kMarginTop + (row + 0.5) * kRowHeight; };

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      kWidth, height, kWidth, height);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n", kMarginLeft,
      kMarginTop + plot_height, kMarginLeft + plot_width);
  if (!all_dates.empty()) {
    out << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">{}</text>\n", kMarginLeft,
                       height - 12, format_date(lo));
    out << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
                       kMarginLeft + plot_width, height - 12, format_date(hi));
  }
  for (const auto& dot : chart.dots) {
    out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\"><title>{} {}</title></circle>\n",
                       x_of(dot.date), y_of(dot.row), kDotRadius, dot.is_first ? "#ff7f0e" : "#1f77b4",
                       xml::escape(chart.rows[dot.row].case_id), format_date(dot.date));
  }
  for (const auto& cutoff : chart.cutoffs) {
    out << fmt::format(
        "<line class=\"wave-cutoff\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"black\" stroke-dasharray=\"6,4\"/>\n",
        x_of(cutoff), kMarginTop, kMarginTop + plot_height);
  }
  out << "</svg>\n";
}

}  // namespace guidecheck
