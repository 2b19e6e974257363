#pragma once

// Table-driven expansion residuals; included from paraproducts.hpp.

#include <cmath>

namespace bilab {

namespace detail {

template <typename S>
void record_residual(double& worst, S lhs, const S* terms, int count) {
  S sum = S{};
  double scale = std::abs(lhs);
  for (int t = 0; t < count; ++t) {
    sum += terms[t];
    scale += std::abs(terms[t]);
  }
  if (scale > 0) worst = std::max(worst, std::abs(lhs - sum) / scale);
}

}  // namespace detail

template <typename S>
double max_expansion_residual(const RealFunction& b, const GridFunction<S>& f, const FramePair& frames,
                              Expansion mode) {
  check_same(b.mesh(), f.mesh());
  check_frames(frames, f.mesh());
  const HaarFrame& F1 = frames.first;
  const HaarFrame& F2 = frames.second;
  const MatrixX<S> tbf = haar_table(frames, multiply(b, f));
  const MatrixX<S> tf = haar_table(frames, f);
  const Eigen::MatrixXd tb = haar_table(frames, b);
  auto root_volume = [](const HaarFrame& F, Index e) { return std::sqrt(F.volume_of(e)); };
  auto avg_of = [](const HaarFrame& F, Index e) { return F.average(F.info(e).level, F.info(e).label); };
  // <b>_{cube(e1) x cube(e2)}
  auto bmean = [&](Index e1, Index e2) {
    return tb(avg_of(F1, e1), avg_of(F2, e2)) / (root_volume(F1, e1) * root_volume(F2, e2));
  };

  double worst = 0.0;
  switch (mode) {
    case Expansion::biparameter: {
      std::vector<MatrixX<S>> ta;
      for (int i = 1; i <= 8; ++i) ta.push_back(haar_table(frames, paraproduct_A(i, b, f, frames)));
      S terms[9];
      for (Index e1 : F1.cancellative_elements()) {
        for (Index e2 : F2.cancellative_elements()) {
          for (int i = 0; i < 8; ++i) terms[i] = ta[i](e1, e2);
          terms[8] = S(bmean(e1, e2)) * tf(e1, e2);
          detail::record_residual(worst, tbf(e1, e2), terms, 9);
        }
      }
      break;
    }
    case Expansion::mixed_first:
    case Expansion::mixed_second: {
      // Work on the first axis; the second-axis case is the transpose.
      const bool first = mode == Expansion::mixed_first;
      const HaarFrame& Fc = first ? F1 : F2;  // cancellative side
      const HaarFrame& Fa = first ? F2 : F1;  // averaged side
      auto tr = [first](const MatrixX<S>& m) -> MatrixX<S> { return first ? m : MatrixX<S>(m.transpose()); };
      const MatrixX<S> t1 = tr(haar_table(frames, paraproduct_a(1, b, f, Fc)));
      const MatrixX<S> t2 = tr(haar_table(frames, paraproduct_a(2, b, f, Fc)));
      const MatrixX<S> tbf_c = tr(tbf), tf_c = tr(tf);
      // rows: <b, h_e>_c and <f, h_e>_c as functions of the other variable
      const RealFunction bt = first ? b : transpose(b);
      const GridFunction<S> ft = first ? f : transpose(f);
      const Eigen::MatrixXd bpart = Fc.analysis() * bt.values();
      const MatrixX<S> fpart = Fc.analysis().template cast<S>() * ft.values();
      S terms[4];
      for (Index ec : Fc.cancellative_elements()) {
        const Index ac = avg_of(Fc, ec);
        const Eigen::RowVectorXd bslice = bpart.row(ac) / root_volume(Fc, ec);
        const Eigen::Matrix<S, 1, Eigen::Dynamic> prod =
            bslice.template cast<S>().cwiseProduct(fpart.row(ec));
        const Eigen::Matrix<S, 1, Eigen::Dynamic> y = prod * Fa.analysis().transpose().template cast<S>();
        for (int j = 0; j <= Fa.grid().levels(); ++j) {
          for (int lab = 0; lab < Fa.grid().count(j); ++lab) {
            const Index ea = Fa.average(j, lab);
            const double s = 1.0 / root_volume(Fa, ea);  // 1_J/|J| = |J|^{-1/2} h^0_J
            const double bR = first ? bmean(ec, ea) : bmean(ea, ec);
            terms[0] = t1(ec, ea) * s;
            terms[1] = t2(ec, ea) * s;
            terms[2] = (y(ea) - S(bR) * tf_c(ec, ea)) * s;
            terms[3] = S(bR) * tf_c(ec, ea) * s;
            detail::record_residual(worst, tbf_c(ec, ea) * s, terms, 4);
          }
        }
      }
      break;
    }
    case Expansion::none: {
      const MatrixX<S> bf = multiply(b, f).values();
      S terms[2];
      for (int i = 0; i <= F1.grid().levels(); ++i) {
        for (int li = 0; li < F1.grid().count(i); ++li) {
          const DyadicCube I = F1.grid().cube(i, li);
          const Eigen::VectorXd u = I.indicator();
          const Index e1 = F1.average(i, li);
          for (int j = 0; j <= F2.grid().levels(); ++j) {
            for (int lj = 0; lj < F2.grid().count(j); ++lj) {
              const DyadicCube J = F2.grid().cube(j, lj);
              const Eigen::VectorXd v = J.indicator();
              const Index e2 = F2.average(j, lj);
              const double w = f.cell_volume() / (I.volume() * J.volume());
              const double bR = bmean(e1, e2);
              const S fR = (u.transpose().template cast<S>() * f.values() * v.template cast<S>())(0, 0) * w;
              const S bfR = (u.transpose().template cast<S>() * bf * v.template cast<S>())(0, 0) * w;
              terms[0] = bfR - S(bR) * fR;
              terms[1] = S(bR) * fR;
              detail::record_residual(worst, tbf(e1, e2) / (root_volume(F1, e1) * root_volume(F2, e2)), terms, 2);
            }
          }
        }
      }
      break;
    }
  }
  return worst;
}

}  // namespace bilab
