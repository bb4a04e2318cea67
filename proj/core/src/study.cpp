#include "medcal/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace medcal {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const std::string& file,
                  const std::string& column, int row) {
  const std::string s = trim(raw);
  if (s.empty()) {
    throw std::invalid_argument(file + ": missing value in column '" + column +
                                "' at row " + std::to_string(row));
  }
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || !std::isfinite(value)) {
    throw std::invalid_argument(file + ": non-numeric cell '" + s + "' in column '" +
                                column + "' at row " + std::to_string(row));
  }
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument(path + ": empty file (header row required)");
  }
  for (auto& h : split_csv_line(line)) table.header.push_back(trim(h));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument(path + ": row " + std::to_string(table.rows.size() + 1) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

int find_column(const CsvTable& table, const std::string& name, const std::string& path,
                bool required, const std::string& what) {
  int found = -1;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == name) {
      if (found >= 0) {
        throw std::invalid_argument(path + ": duplicate column '" + name + "'");
      }
      found = static_cast<int>(j);
    }
  }
  if (found < 0 && required) {
    throw std::invalid_argument(path + ": " + what + " (missing column '" + name + "')");
  }
  return found;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ColumnStats column_stats(const std::string& name, const std::vector<double>& xs) {
  ColumnStats st;
  st.name = name;
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  st.mean = mean;
  st.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return st;
}

}  // namespace

Study make_study(std::vector<MainRecord> main, std::vector<ValidationRecord> validation,
                 std::vector<std::string> covariate_names,
                 std::optional<double> max_followup) {
  const int p = static_cast<int>(covariate_names.size());
  if (main.empty()) throw std::invalid_argument("study: main study is empty");
  if (static_cast<int>(validation.size()) < p + 3) {
    throw std::invalid_argument(
        "study: validation study too small to identify the calibration regression (need n2 >= " +
        std::to_string(p + 3) + ")");
  }
  for (std::size_t i = 0; i < main.size(); ++i) {
    const auto& r = main[i];
    if (!std::isfinite(r.t_obs) || r.t_obs < 0) {
      throw std::invalid_argument("study: invalid main time at row " + std::to_string(i + 1));
    }
    if (r.covariates.size() != p) {
      throw std::invalid_argument("study: main covariate length mismatch at row " +
                                  std::to_string(i + 1));
    }
  }
  for (std::size_t i = 0; i < validation.size(); ++i) {
    const auto& r = validation[i];
    if (!std::isfinite(r.t_obs) || r.t_obs < 0) {
      throw std::invalid_argument("study: invalid validation time at row " +
                                  std::to_string(i + 1));
    }
    if (r.covariates.size() != p) {
      throw std::invalid_argument("study: validation covariate length mismatch at row " +
                                  std::to_string(i + 1));
    }
  }

  Study study;
  study.main = std::move(main);
  study.validation = std::move(validation);
  study.covariate_names = std::move(covariate_names);

  double max_main_t = 0.0;
  for (const auto& r : study.main) max_main_t = std::max(max_main_t, r.t_obs);
  study.max_followup = max_followup.value_or(max_main_t);
  if (max_main_t > study.max_followup) {
    throw std::invalid_argument("study: main observation time exceeds the maximum follow-up t*");
  }
  return study;
}

LoadedStudy load_study(const std::string& main_path, const std::string& validation_path,
                       const Schema& schema, std::optional<double> max_followup) {
  LoadedStudy out;
  const int p = static_cast<int>(schema.covariates.size());

  const CsvTable main_tab = read_csv(main_path);
  const int mt = find_column(main_tab, schema.time, main_path, true, "main schema incomplete");
  const int me = find_column(main_tab, schema.event, main_path, true, "main schema incomplete");
  const int mm = find_column(main_tab, schema.mediator, main_path, true, "main schema incomplete");
  const int ma = find_column(main_tab, schema.exposure, main_path, true, "main schema incomplete");
  const int mtrue = find_column(main_tab, schema.true_exposure, main_path, false, "");
  std::vector<int> mcov(p);
  for (int j = 0; j < p; ++j) {
    mcov[j] =
        find_column(main_tab, schema.covariates[j], main_path, true, "main schema incomplete");
  }

  std::vector<MainRecord> main_records;
  std::vector<double> main_true;
  main_records.reserve(main_tab.rows.size());
  for (std::size_t i = 0; i < main_tab.rows.size(); ++i) {
    const auto& cells = main_tab.rows[i];
    const int row = static_cast<int>(i + 1);
    MainRecord r;
    r.t_obs = parse_cell(cells[mt], main_path, schema.time, row);
    const double ev = parse_cell(cells[me], main_path, schema.event, row);
    if (ev != 0.0 && ev != 1.0) {
      throw std::invalid_argument(main_path + ": event value outside {0,1} at row " +
                                  std::to_string(row));
    }
    r.event = ev == 1.0;
    r.mediator = parse_cell(cells[mm], main_path, schema.mediator, row);
    r.exposure_star = parse_cell(cells[ma], main_path, schema.exposure, row);
    r.covariates.resize(p);
    for (int j = 0; j < p; ++j) {
      r.covariates(j) = parse_cell(cells[mcov[j]], main_path, schema.covariates[j], row);
    }
    if (mtrue >= 0) {
      main_true.push_back(parse_cell(cells[mtrue], main_path, schema.true_exposure, row));
    }
    main_records.push_back(std::move(r));
  }

  const CsvTable val_tab = read_csv(validation_path);
  const int vt =
      find_column(val_tab, schema.time, validation_path, true, "validation schema incomplete");
  const int vm =
      find_column(val_tab, schema.mediator, validation_path, true, "validation schema incomplete");
  const int va =
      find_column(val_tab, schema.exposure, validation_path, true, "validation schema incomplete");
  const int vtrue = find_column(val_tab, schema.true_exposure, validation_path, true,
                                "validation schema incomplete");
  if (find_column(val_tab, schema.event, validation_path, false, "") >= 0) {
    out.warnings.push_back("validation file contains an event column '" + schema.event +
                           "'; ignored (external validation design)");
  }
  std::vector<int> vcov(p);
  for (int j = 0; j < p; ++j) {
    vcov[j] = find_column(val_tab, schema.covariates[j], validation_path, true,
                          "validation schema incomplete");
  }

  std::vector<ValidationRecord> val_records;
  val_records.reserve(val_tab.rows.size());
  for (std::size_t i = 0; i < val_tab.rows.size(); ++i) {
    const auto& cells = val_tab.rows[i];
    const int row = static_cast<int>(i + 1);
    ValidationRecord r;
    r.t_obs = parse_cell(cells[vt], validation_path, schema.time, row);
    r.mediator = parse_cell(cells[vm], validation_path, schema.mediator, row);
    r.exposure_star = parse_cell(cells[va], validation_path, schema.exposure, row);
    r.exposure_true = parse_cell(cells[vtrue], validation_path, schema.true_exposure, row);
    r.covariates.resize(p);
    for (int j = 0; j < p; ++j) {
      r.covariates(j) = parse_cell(cells[vcov[j]], validation_path, schema.covariates[j], row);
    }
    val_records.push_back(std::move(r));
  }

  out.study = make_study(std::move(main_records), std::move(val_records), schema.covariates,
                         max_followup);
  if (mtrue >= 0) out.main_true_exposure = std::move(main_true);
  return out;
}

void save_study(const Study& study, const std::string& main_path,
                const std::string& validation_path, const Schema& schema,
                const std::vector<double>* main_true_exposure) {
  const int p = study.n_covariates();
  {
    std::ofstream out(main_path);
    if (!out) throw std::invalid_argument("cannot write file: " + main_path);
    out << schema.time << ',' << schema.event << ',' << schema.mediator << ','
        << schema.exposure;
    if (main_true_exposure) out << ',' << schema.true_exposure;
    for (int j = 0; j < p; ++j) out << ',' << schema.covariates[j];
    out << '\n';
    for (std::size_t i = 0; i < study.main.size(); ++i) {
      const auto& r = study.main[i];
      out << format_double(r.t_obs) << ',' << (r.event ? 1 : 0) << ','
          << format_double(r.mediator) << ',' << format_double(r.exposure_star);
      if (main_true_exposure) out << ',' << format_double((*main_true_exposure)[i]);
      for (int j = 0; j < p; ++j) out << ',' << format_double(r.covariates(j));
      out << '\n';
    }
  }
  {
    std::ofstream out(validation_path);
    if (!out) throw std::invalid_argument("cannot write file: " + validation_path);
    out << schema.time << ',' << schema.mediator << ',' << schema.exposure << ','
        << schema.true_exposure;
    for (int j = 0; j < p; ++j) out << ',' << schema.covariates[j];
    out << '\n';
    for (const auto& r : study.validation) {
      out << format_double(r.t_obs) << ',' << format_double(r.mediator) << ','
          << format_double(r.exposure_star) << ',' << format_double(r.exposure_true);
      for (int j = 0; j < p; ++j) out << ',' << format_double(r.covariates(j));
      out << '\n';
    }
  }
}

StudyDiagnostics validate_study(const Study& study) {
  StudyDiagnostics d;
  d.n1 = study.n1();
  d.n2 = study.n2();
  d.max_followup = study.max_followup;

  std::vector<double> t1, m1, a1;
  for (const auto& r : study.main) {
    if (r.event) ++d.n_events;
    t1.push_back(r.t_obs);
    m1.push_back(r.mediator);
    a1.push_back(r.exposure_star);
  }
  d.event_rate = static_cast<double>(d.n_events) / static_cast<double>(d.n1);
  d.rare_outcome = d.event_rate < 0.10;

  d.main_columns.push_back(column_stats("t_obs", t1));
  d.main_columns.push_back(column_stats("mediator", m1));
  d.main_columns.push_back(column_stats("exposure_star", a1));
  for (int j = 0; j < study.n_covariates(); ++j) {
    std::vector<double> col;
    for (const auto& r : study.main) col.push_back(r.covariates(j));
    d.main_columns.push_back(column_stats(study.covariate_names[j], col));
  }

  std::vector<double> tv, mv, av, atv;
  for (const auto& r : study.validation) {
    tv.push_back(r.t_obs);
    mv.push_back(r.mediator);
    av.push_back(r.exposure_star);
    atv.push_back(r.exposure_true);
  }
  d.max_validation_time = *std::max_element(tv.begin(), tv.end());
  d.validation_columns.push_back(column_stats("t_obs", tv));
  d.validation_columns.push_back(column_stats("mediator", mv));
  d.validation_columns.push_back(column_stats("exposure_star", av));
  d.validation_columns.push_back(column_stats("exposure_true", atv));
  for (int j = 0; j < study.n_covariates(); ++j) {
    std::vector<double> col;
    for (const auto& r : study.validation) col.push_back(r.covariates(j));
    d.validation_columns.push_back(column_stats(study.covariate_names[j], col));
  }

  // corr(A, A*) in the validation study
  const auto sa = column_stats("", atv);
  const auto ss = column_stats("", av);
  double cov = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    cov += (atv[i] - sa.mean) * (av[i] - ss.mean);
  }
  cov /= static_cast<double>(av.size()) - 1.0;
  d.corr_a_astar = (sa.sd > 0 && ss.sd > 0)
                       ? cov / (sa.sd * ss.sd)
                       : std::numeric_limits<double>::quiet_NaN();
  return d;
}

}  // namespace medcal
