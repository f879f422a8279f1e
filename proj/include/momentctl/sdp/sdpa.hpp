#pragma once

#include <string>
#include <string_view>

#include "momentctl/sdp/solver.hpp"

namespace momentctl::sdp {

/// Sparse SDPA (.dat-s) text for `prob`.
///
/// The standard form maps onto the SDPA dual side: Y = x, F_i = row i of A,
/// F_0 = -C and the SDPA cost vector is b. Every cone segment becomes one
/// block in order: psd(s) a block of side s, nonneg(k) a diagonal block -k,
/// free(k) a diagonal block -2k holding x+ then x-. A header comment records
/// the original layout so that import_sdpa can undo the split.
///
/// Off-diagonal entries a/sqrt(2) are written with 21 significant digits
/// computed in extended precision, so that import_sdpa recovers every svec
/// coefficient a bit for bit.
std::string export_sdpa(const ConicProblem& prob);

/// Inverse of export_sdpa; also reads plain SDPA files (no free segments).
/// Throws ParseError with the offending line.
ConicProblem import_sdpa(std::string_view text);

/// Reads SDPA-style solver output (phase.value, xVec, xMat, yMat sections)
/// for a problem written by export_sdpa and maps it back onto `prob`.
/// Throws ParseError with a line number for malformed or truncated text.
ConicSolution import_solution(std::string_view text, const ConicProblem& prob);

/// Solves through an external SDPA-format solver. The command template is
/// run by the shell after substituting {in} (problem file), {out} (solution
/// file) and {tol}.
class SdpaFileBackend final : public ConicBackend {
 public:
  explicit SdpaFileBackend(std::string command_template) : command_(std::move(command_template)) {}
  std::string name() const override { return "sdpa-file"; }
  ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts) const override;

 private:
  std::string command_;
};

}  // namespace momentctl::sdp
