#include "blockmodel/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blockmodel {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const Mat& m,
                      const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names,
                      const std::string& id_column,
                      const std::vector<std::string>& header_lines) {
  if (static_cast<int>(row_names.size()) != m.rows ||
      static_cast<int>(col_names.size()) != m.cols)
    throw std::invalid_argument("matrix csv: name/shape mismatch");
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << id_column;
  for (const auto& c : col_names) out << "," << c;
  out << "\n";
  char buf[32];
  for (int r = 0; r < m.rows; ++r) {
    out << row_names[r];
    for (double x : m.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << "," << buf;
    }
    out << "\n";
  }
}

NamedMatrix read_matrix_csv(std::istream& in) {
  NamedMatrix nm;
  std::string line;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_commas(line);
    if (!have_header) {
      nm.col_names.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != nm.col_names.size() + 1)
      throw std::runtime_error("matrix csv: ragged row '" + line + "'");
    nm.row_names.push_back(fields[0]);
    std::vector<double> vals;
    for (size_t i = 1; i < fields.size(); ++i) {
      try {
        size_t used = 0;
        vals.push_back(std::stod(fields[i], &used));
        if (used != fields[i].size()) throw std::invalid_argument(fields[i]);
      } catch (const std::exception&) {
        throw std::runtime_error("matrix csv: bad number '" + fields[i] + "'");
      }
    }
    rows.push_back(std::move(vals));
  }
  if (!have_header) throw std::runtime_error("matrix csv: missing header");
  nm.m = Mat(static_cast<int>(rows.size()), static_cast<int>(nm.col_names.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      nm.m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return nm;
}

NamedMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_matrix_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_matrix_csv(const std::string& path, const Mat& m,
                     const std::vector<std::string>& row_names,
                     const std::vector<std::string>& col_names,
                     const std::string& id_column,
                     const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_matrix_csv(out, m, row_names, col_names, id_column, header_lines);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> role_names(int K) {
  std::vector<std::string> names;
  names.reserve(K);
  for (int k = 0; k < K; ++k) names.push_back("role" + std::to_string(k));
  return names;
}

void write_trace_csv(std::ostream& out, const std::vector<SweepTrace>& trace,
                     const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "sweep,max_delta,free_energy\n";
  char buf[32];
  for (const auto& t : trace) {
    out << t.sweep;
    for (double x : {t.max_delta, t.free_energy}) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << "," << buf;
    }
    out << "\n";
  }
}

void write_predictions_csv(std::ostream& out, const DirectedGraph& g,
                           const std::vector<int>& pred,
                           const std::vector<std::string>& class_names,
                           const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "node,predicted\n";
  for (int v = 0; v < g.num_nodes(); ++v) {
    int c = pred[v];
    out << g.name(v) << ","
        << (c >= 0 && c < static_cast<int>(class_names.size()) ? class_names[c]
                                                               : std::to_string(c))
        << "\n";
  }
}

}  // namespace blockmodel
