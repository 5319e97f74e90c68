#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"
#include "blockmodel/sbm.hpp"

namespace blockmodel {

// Labeled-matrix CSV: leading '# ' comment lines (format version, resolved
// config), a header row "name,<col0>,<col1>,...", then one row per entity.
// Values round-trip exactly (%.17g).
void write_matrix_csv(std::ostream& out, const Mat& m,
                      const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names,
                      const std::string& id_column,
                      const std::vector<std::string>& header_lines);

struct NamedMatrix {
  Mat m;
  std::vector<std::string> row_names, col_names;
};

NamedMatrix read_matrix_csv(std::istream& in);

NamedMatrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Mat& m,
                     const std::vector<std::string>& row_names,
                     const std::vector<std::string>& col_names,
                     const std::string& id_column,
                     const std::vector<std::string>& header_lines);

std::vector<std::string> role_names(int K);

void write_trace_csv(std::ostream& out, const std::vector<SweepTrace>& trace,
                     const std::vector<std::string>& header_lines);

// node,predicted class name; node order follows the graph.
void write_predictions_csv(std::ostream& out, const DirectedGraph& g,
                           const std::vector<int>& pred,
                           const std::vector<std::string>& class_names,
                           const std::vector<std::string>& header_lines);

}  // namespace blockmodel
