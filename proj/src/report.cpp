#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "snd/format.hpp"
#include "snd/harness.hpp"

namespace snd {

namespace fs = std::filesystem;

ReportRow aggregate(const CellResult& cell) {
  ReportRow row;
  row.instance = cell.instance;
  row.scenario = cell.scenario;
  row.variant = to_string(cell.variant);
  row.replications = static_cast<int>(cell.reps.size());
  if (cell.reps.empty()) return row;
  const double n = static_cast<double>(cell.reps.size());
  row.profit_best = cell.reps.front().final.profit;
  row.det_cost_best = cell.reps.front().det_cost;
  auto& m = row.means;
  for (const auto& r : cell.reps) {
    const auto& d = r.final;
    row.profit_best = std::max(row.profit_best, d.profit);
    row.det_cost_best = std::min(row.det_cost_best, r.det_cost);
    row.det_cost_mean += r.det_cost / n;
    row.cpu_total += r.seconds;
    m.profit += d.profit / n;
    m.revenue += d.revenue / n;
    m.booking += d.booking / n;
    m.transit += d.transit / n;
    m.transfer += d.transfer / n;
    m.store += d.store / n;
    m.delay += d.delay / n;
    m.selected_share += d.selected_share / n;
    m.sigma_road += d.sigma_road / n;
    m.sigma_multimodal += d.sigma_multimodal / n;
    m.sigma_scheduled += d.sigma_scheduled / n;
    m.truck_hours += d.truck_hours / n;
    m.booked_capacity += d.booked_capacity / n;
    m.used_ratio += d.used_ratio / n;
  }
  row.profit_mean = m.profit;
  row.cpu_mean = row.cpu_total / n;
  if (cell.reps.size() > 1) {
    double ss = 0.0;
    for (const auto& r : cell.reps) ss += (r.final.profit - row.profit_mean) * (r.final.profit - row.profit_mean);
    row.profit_std = std::sqrt(ss / (n - 1.0));
  }
  return row;
}

namespace {

const char* kReportHeader =
    "instance,scenario,variant,replications,profit_mean,profit_best,profit_std,det_cost_best,det_cost_mean,"
    "revenue,booking,transit,transfer,store,delay,selected_share,sigma_road,sigma_multimodal,sigma_scheduled,"
    "truck_hours,booked_capacity,used_ratio";

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // "-0.0" reads as a sign where there is none.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string thousands(double v) { return fixed(v / 1000.0, 1); }
std::string percent(double share) { return fixed(100.0 * share, 1); }

std::vector<std::string> ordered_unique(const std::vector<ReportRow>& rows, std::string ReportRow::*field) {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.*field) == out.end()) out.push_back(r.*field);
  return out;
}

void write_table4(const Report& report, const fs::path& path) {
  auto out = open_out(path);
  out << "| Instance | Reference | SA_H (best) | SA_H (avg) | Diff (avg) |\n"
      << "|---|---:|---:|---:|---:|\n";
  std::map<std::string, int> scenarios_per_instance;
  for (const auto& r : report.rows)
    if (r.variant == "SA_H") ++scenarios_per_instance[r.instance];
  for (const auto& r : report.rows) {
    if (r.variant != "SA_H") continue;
    const std::string label = scenarios_per_instance[r.instance] > 1 ? r.instance + " (" + r.scenario + ")" : r.instance;
    std::optional<double> ref;
    if (auto it = report.reference_costs.find(r.instance); it != report.reference_costs.end()) ref = it->second;
    out << "| " << table4_row(label, ref, r.det_cost_best, r.det_cost_mean) << " |\n";
  }
}

void write_table6(const Report& report, const fs::path& path) {
  auto out = open_out(path);
  const auto scenarios = ordered_unique(report.rows, &ReportRow::scenario);
  const auto instances = ordered_unique(report.rows, &ReportRow::instance);
  auto header = [&] {
    out << "| Instance | Variant |";
    for (const auto& s : scenarios) out << " Profit " << s << " |";
    for (const auto& s : scenarios) out << " CPU " << s << " (s) |";
    out << "\n|---|---|";
    for (std::size_t k = 0; k < 2 * scenarios.size(); ++k) out << "---:|";
    out << '\n';
  };
  header();
  for (const auto& inst : instances) {
    const auto variants = [&] {
      std::vector<std::string> v;
      for (const auto& r : report.rows)
        if (r.instance == inst && std::find(v.begin(), v.end(), r.variant) == v.end()) v.push_back(r.variant);
      return v;
    }();
    for (const auto& var : variants) {
      auto find = [&](const std::string& sc) -> const ReportRow* {
        for (const auto& r : report.rows)
          if (r.instance == inst && r.variant == var && r.scenario == sc) return &r;
        return nullptr;
      };
      out << "| " << inst << " | " << var << " |";
      for (const auto& s : scenarios) {
        const ReportRow* r = find(s);
        out << ' ' << (r ? group_thousands(r->profit_mean) : "") << " |";
      }
      for (const auto& s : scenarios) {
        const ReportRow* r = find(s);
        out << ' ' << (r ? fixed(r->cpu_mean, 1) : "") << " |";
      }
      out << '\n';
    }
  }
}

void write_table7(const Report& report, const fs::path& path) {
  auto out = open_out(path);
  out << "| Instance | Scenario | Variant | Total | R | C_trs | C_trf | C_str | C_del | Selected (%) | sigma_R (%) "
         "| sigma_M (%) | sigma_S (%) | Truck hours | Booked capacity (container-km) | Used capacity ratio |\n"
      << "|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : report.rows) {
    const auto& m = r.means;
    // Money in thousands; booking is paid for scheduled transport and is
    // reported with transit.
    out << "| " << r.instance << " | " << r.scenario << " | " << r.variant << " | " << thousands(r.profit_mean)
        << " | " << thousands(m.revenue) << " | " << thousands(m.transit + m.booking) << " | "
        << thousands(m.transfer) << " | " << thousands(m.store) << " | " << thousands(m.delay) << " | "
        << percent(m.selected_share) << " | " << percent(m.sigma_road) << " | " << percent(m.sigma_multimodal)
        << " | " << percent(m.sigma_scheduled) << " | " << fixed(m.truck_hours, 1) << " | "
        << group_thousands(m.booked_capacity) << " | " << fixed(m.used_ratio, 3) << " |\n";
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string group_thousands(double v) {
  const long long n = std::llround(v);
  std::string digits = std::to_string(n < 0 ? -n : n);
  if (digits.size() >= 5)
    for (auto pos = static_cast<std::ptrdiff_t>(digits.size()) - 3; pos > 0; pos -= 3)
      digits.insert(static_cast<std::size_t>(pos), " ");
  return (n < 0 ? "-" : "") + digits;
}

std::string table4_row(const std::string& name, std::optional<double> reference, double best, double avg) {
  std::string row = name + " | " + (reference ? group_thousands(*reference) : "n/a") + " | " + group_thousands(best) +
                    " | " + group_thousands(avg) + " | ";
  if (reference && *reference != 0.0) row += fixed(100.0 * (avg - *reference) / *reference, 1) + "%";
  else row += "n/a";
  return row;
}

void emit_report(const Report& report, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& r : report.rows)
    for (const auto* s : {&r.instance, &r.scenario, &r.variant})
      if (s->find_first_of(",\"\n") != std::string::npos)
        throw std::invalid_argument("report: name '" + *s + "' cannot be written to CSV");
  {
    auto out = open_out(dir / "report.csv");
    out << kReportHeader << '\n';
    for (const auto& r : report.rows) {
      const auto& m = r.means;
      out << r.instance << ',' << r.scenario << ',' << r.variant << ',' << r.replications << ','
          << num(r.profit_mean) << ',' << num(r.profit_best) << ',' << num(r.profit_std) << ','
          << num(r.det_cost_best) << ',' << num(r.det_cost_mean) << ',' << num(m.revenue) << ','
          << num(m.booking) << ',' << num(m.transit) << ',' << num(m.transfer) << ',' << num(m.store) << ','
          << num(m.delay) << ',' << num(m.selected_share) << ',' << num(m.sigma_road) << ','
          << num(m.sigma_multimodal) << ',' << num(m.sigma_scheduled) << ',' << num(m.truck_hours) << ','
          << num(m.booked_capacity) << ',' << num(m.used_ratio) << '\n';
    }
  }
  {
    auto out = open_out(dir / "timing.csv");
    out << "instance,scenario,variant,cpu_mean,cpu_total\n";
    for (const auto& r : report.rows)
      out << r.instance << ',' << r.scenario << ',' << r.variant << ',' << num(r.cpu_mean) << ','
          << num(r.cpu_total) << '\n';
  }
  write_table4(report, dir / "table4.md");
  write_table6(report, dir / "table6.md");
  write_table7(report, dir / "table7.md");
}

std::vector<ReportRow> read_report_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader)
    throw std::runtime_error(path.string() + ": unexpected report header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 22) throw std::runtime_error(path.string() + ": expected 22 fields, got " + std::to_string(f.size()));
    ReportRow r;
    r.instance = f[0];
    r.scenario = f[1];
    r.variant = f[2];
    r.replications = std::stoi(f[3]);
    r.profit_mean = parse_num(f[4]);
    r.profit_best = parse_num(f[5]);
    r.profit_std = parse_num(f[6]);
    r.det_cost_best = parse_num(f[7]);
    r.det_cost_mean = parse_num(f[8]);
    auto& m = r.means;
    m.profit = r.profit_mean;
    m.revenue = parse_num(f[9]);
    m.booking = parse_num(f[10]);
    m.transit = parse_num(f[11]);
    m.transfer = parse_num(f[12]);
    m.store = parse_num(f[13]);
    m.delay = parse_num(f[14]);
    m.selected_share = parse_num(f[15]);
    m.sigma_road = parse_num(f[16]);
    m.sigma_multimodal = parse_num(f[17]);
    m.sigma_scheduled = parse_num(f[18]);
    m.truck_hours = parse_num(f[19]);
    m.booked_capacity = parse_num(f[20]);
    m.used_ratio = parse_num(f[21]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace snd
