#include "bilab/tables.hpp"

namespace bilab {

std::vector<Index> factor_elements(const HaarFrame& frame, int level, int label, Factor f) {
  if (f == Factor::average) return {frame.average(level, label)};
  return frame.cancellative(level, label);
}

ProductRows product_rows(const HaarFrame& frame, Factor a, Factor b) {
  ProductRows out;
  const int L = frame.grid().levels();
  const int top = (a == Factor::delta || b == Factor::delta) ? L - 1 : L;
  for (int j = 0; j <= top; ++j) {
    for (int lab = 0; lab < frame.grid().count(j); ++lab) {
      for (Index ea : factor_elements(frame, j, lab, a)) {
        for (Index eb : factor_elements(frame, j, lab, b)) {
          out.left.push_back(ea);
          out.right.push_back(eb);
          out.level.push_back(j);
        }
      }
    }
  }
  out.rows.resize(Index(out.left.size()), frame.side().cells());
  for (Index p = 0; p < Index(out.left.size()); ++p)
    out.rows.row(p) = frame.values().row(out.left[p]).cwiseProduct(frame.values().row(out.right[p]));
  return out;
}

}  // namespace bilab
