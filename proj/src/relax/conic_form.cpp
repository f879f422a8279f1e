#include "momentctl/relax/conic_form.hpp"

#include <cmath>
#include <numbers>

namespace momentctl::relax {

namespace {

// Columns: free coefficients then svec of each block. `block_sign` is the
// sign of the <B_k, X_k> terms.
ConicForm build(int rows, const std::vector<LinearForm>& columns, const std::vector<LocalizingBlock>& blocks,
                double block_sign) {
  ConicForm out;
  auto& lay = out.layout;
  lay.num_rows = rows;
  lay.free_offset = 0;
  lay.num_free = static_cast<int>(columns.size());
  int offset = lay.num_free;
  std::vector<sdp::ConeSegment> cones;
  if (lay.num_free > 0) cones.push_back(sdp::ConeSegment::free(lay.num_free));
  for (const auto& blk : blocks) {
    lay.blocks.push_back({blk.constraint, offset, blk.side()});
    cones.push_back(sdp::ConeSegment::psd(blk.side()));
    offset += blk.side() * (blk.side() + 1) / 2;
  }

  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < lay.num_free; ++k) {
    for (const auto& [row, v] : columns[k]) trips.emplace_back(row, k, v);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const int s = blk.side();
    std::size_t p = 0;
    for (int j = 0; j < s; ++j) {
      for (int i = j; i < s; ++i, ++p) {
        const double scale = block_sign * (i == j ? 1.0 : std::numbers::sqrt2);
        for (const auto& [row, v] : blk.lower[p]) trips.emplace_back(row, lay.blocks[b].offset + static_cast<int>(p), scale * v);
      }
    }
  }
  out.problem.A.resize(rows, offset);
  out.problem.A.setFromTriplets(trips.begin(), trips.end());
  out.problem.A.prune(0.0);
  out.problem.c = Eigen::VectorXd::Zero(offset);
  out.problem.cones = std::move(cones);
  return out;
}

}  // namespace

ConicForm to_conic(const MomentSdp& sdp) {
  std::vector<LinearForm> columns;
  Eigen::VectorXd b(static_cast<Eigen::Index>(sdp.equalities.size()));
  for (std::size_t k = 0; k < sdp.equalities.size(); ++k) {
    columns.push_back(sdp.equalities[k].row);
    b(static_cast<Eigen::Index>(k)) = sdp.equalities[k].rhs;
  }
  ConicForm out = build(sdp.index.size(), columns, sdp.blocks, -1.0);
  out.problem.c.head(b.size()) = b;
  out.problem.b = -sdp.objective;
  return out;
}

ConicForm to_conic(const SosProgram& sos) {
  ConicForm out = build(sos.index.size(), sos.columns, sos.gram_blocks, 1.0);
  out.problem.c.head(sos.weights.size()) = -sos.weights;
  out.problem.b = sos.rhs;
  return out;
}

Eigen::VectorXd moments_from_solution(const ConicLayout& layout, const Eigen::VectorXd& y) {
  return y.head(layout.num_rows);
}

Eigen::VectorXd coefficients_from_solution(const ConicLayout& layout, const Eigen::VectorXd& x) {
  return x.segment(layout.free_offset, layout.num_free);
}

Eigen::MatrixXd gram_from_solution(const ConicLayout& layout, const Eigen::VectorXd& x, int k) {
  const auto& blk = layout.blocks.at(k);
  return sdp::smat(x.segment(blk.offset, blk.side * (blk.side + 1) / 2), blk.side);
}

}  // namespace momentctl::relax
