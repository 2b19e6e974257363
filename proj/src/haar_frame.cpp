#include "bilab/haar_frame.hpp"

namespace bilab {

HaarFrame::HaarFrame(const DyadicGrid& grid) : grid_(grid) {
  const int L = grid_.levels();
  const int pats = patterns();
  level_base_.resize(L + 1);
  for (int j = 0; j <= L; ++j) {
    level_base_[j] = Index(elements_.size());
    const int per_cube = j < L ? pats : 1;
    for (int lab = 0; lab < grid_.count(j); ++lab) {
      for (int eta = 0; eta < per_cube; ++eta) elements_.push_back({j, lab, eta});
    }
  }
  values_.setZero(size(), side().cells());
  for (Index e = 0; e < size(); ++e) values_.row(e) = haar_values(haar_of(e)).transpose();
  analysis_ = values_ * side().cell_volume();

  basis_.push_back(average(0, 0));
  for (Index e = 0; e < size(); ++e) {
    if (elements_[e].eta != 0) {
      basis_.push_back(e);
      cancellative_.push_back(e);
    }
  }
}

Index HaarFrame::element(int level, int label, int eta) const {
  const int L = grid_.levels();
  if (level < 0 || level > L || label < 0 || label >= grid_.count(level)) return -1;
  const int per_cube = level < L ? patterns() : 1;
  if (eta < 0 || eta >= per_cube) return -1;
  return level_base_[level] + Index(label) * per_cube + eta;
}

std::vector<Index> HaarFrame::cancellative(int level, int label) const {
  std::vector<Index> out;
  if (level >= grid_.levels()) return out;
  for (int eta = 1; eta < patterns(); ++eta) out.push_back(element(level, label, eta));
  return out;
}

}  // namespace bilab
