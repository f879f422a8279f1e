#include "momentctl/sdp/sdpa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <unistd.h>

#include "momentctl/errors.hpp"

namespace momentctl::sdp {

namespace {

constexpr char kLayoutTag[] = "momentctl cones:";

// Where a variable of the standard form lands in the SDPA block structure.
struct Placement {
  int block = 0;  // 0-based
  int i = 0, j = 0;  // 0-based, i <= j
  int mirror = -1;  // second diagonal position for split free variables
};

std::vector<int> block_sizes(const ConicProblem& prob) {
  std::vector<int> sizes;
  for (const auto& seg : prob.cones) {
    switch (seg.kind) {
      case ConeSegment::Kind::kFree: sizes.push_back(-2 * seg.size); break;
      case ConeSegment::Kind::kNonneg: sizes.push_back(-seg.size); break;
      case ConeSegment::Kind::kPsd: sizes.push_back(seg.size); break;
    }
  }
  return sizes;
}

std::vector<Placement> placements(const ConicProblem& prob) {
  std::vector<Placement> out;
  out.reserve(prob.num_vars());
  for (std::size_t b = 0; b < prob.cones.size(); ++b) {
    const auto& seg = prob.cones[b];
    const int blk = static_cast<int>(b);
    if (seg.kind == ConeSegment::Kind::kPsd) {
      for (int j = 0; j < seg.size; ++j) {
        for (int i = j; i < seg.size; ++i) out.push_back({blk, j, i, -1});
      }
    } else {
      for (int t = 0; t < seg.size; ++t) {
        out.push_back({blk, t, t, seg.kind == ConeSegment::Kind::kFree ? seg.size + t : -1});
      }
    }
  }
  return out;
}

// Off-diagonal svec coefficients a = sqrt(2) * X_ij are written as X_ij in
// extended precision. Reading back with the same precision and rounding
// v * sqrt(2) to double recovers a exactly: the extended-precision error is
// far below half an ulp of a, and a itself is a double.
constexpr long double kSqrt2L = 1.41421356237309504880168872420969808L;
static_assert(std::numeric_limits<long double>::digits >= 64, "exact SDPA round trip needs extended long double");

std::string off_diagonal_entry(double a) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.21Lg", static_cast<long double>(a) / kSqrt2L);
  return buf;
}

double off_diagonal_coefficient(const std::string& tok, int line) {
  char* end = nullptr;
  const long double v = std::strtold(tok.c_str(), &end);
  if (tok.empty() || *end != '\0' || !std::isfinite(static_cast<double>(v))) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  return static_cast<double>(v * kSqrt2L);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_entry(std::ostringstream& os, int matno, const Placement& pl, double coef) {
  if (coef == 0.0) return;
  if (pl.mirror >= 0) {
    os << matno << ' ' << pl.block + 1 << ' ' << pl.i + 1 << ' ' << pl.i + 1 << ' ' << fmt(coef) << '\n';
    os << matno << ' ' << pl.block + 1 << ' ' << pl.mirror + 1 << ' ' << pl.mirror + 1 << ' ' << fmt(-coef)
       << '\n';
    return;
  }
  os << matno << ' ' << pl.block + 1 << ' ' << pl.i + 1 << ' ' << pl.j + 1 << ' '
     << (pl.i == pl.j ? fmt(coef) : off_diagonal_entry(coef)) << '\n';
}

std::string cone_tag(const ConeSegment& seg) {
  const char kind = seg.kind == ConeSegment::Kind::kFree ? 'f' : seg.kind == ConeSegment::Kind::kNonneg ? 'l' : 's';
  return kind + std::to_string(seg.size);
}

struct Line {
  int number;
  std::string text;
};

std::vector<std::string> split_tokens(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
  }
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0' || !std::isfinite(v)) throw ParseError("expected a number, got '" + tok + "'", line);
  return v;
}

long to_int(const std::string& tok, int line) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0') throw ParseError("expected an integer, got '" + tok + "'", line);
  return v;
}

std::optional<std::vector<ConeSegment>> parse_layout_tag(const std::string& comment, int line) {
  const auto pos = comment.find(kLayoutTag);
  if (pos == std::string::npos) return std::nullopt;
  std::istringstream is(comment.substr(pos + sizeof(kLayoutTag) - 1));
  std::vector<ConeSegment> cones;
  for (std::string tok; is >> tok;) {
    if (tok.size() < 2) throw ParseError("bad cone tag '" + tok + "'", line);
    const long k = to_int(tok.substr(1), line);
    if (k < 0) throw ParseError("bad cone tag '" + tok + "'", line);
    switch (tok[0]) {
      case 'f': cones.push_back(ConeSegment::free(static_cast<int>(k))); break;
      case 'l': cones.push_back(ConeSegment::nonneg(static_cast<int>(k))); break;
      case 's': cones.push_back(ConeSegment::psd(static_cast<int>(k))); break;
      default: throw ParseError("bad cone tag '" + tok + "'", line);
    }
  }
  return cones;
}

// Nested brace lists of numbers, as in SDPA output files.
struct Node {
  bool is_list = false;
  double value = 0.0;
  std::vector<Node> items;
  int line = 0;
};

class BraceReader {
 public:
  BraceReader(std::string_view text, std::size_t pos, int line) : text_(text), pos_(pos), line_(line) {}

  Node read() {
    skip();
    Node node;
    node.line = line_;
    if (at_end()) throw ParseError("unexpected end of file", line_);
    if (text_[pos_] == '{') {
      ++pos_;
      node.is_list = true;
      while (true) {
        skip();
        if (at_end()) throw ParseError("unexpected end of file inside '{'", line_);
        if (text_[pos_] == '}') {
          ++pos_;
          return node;
        }
        node.items.push_back(read());
      }
    }
    const std::size_t start = pos_;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ',' &&
           text_[pos_] != '{' && text_[pos_] != '}') {
      ++pos_;
    }
    node.value = to_double(std::string(text_.substr(start, pos_ - start)), line_);
    return node;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  void skip() {
    while (!at_end() && (std::isspace(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == ',')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_;
  int line_;
};

// Finds "key" at the start of a line followed by '='; returns the position
// after '=' and its line number.
std::optional<std::pair<std::size_t, int>> find_section(std::string_view text, std::string_view key) {
  std::size_t pos = 0;
  int line = 1;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view l = text.substr(pos, eol - pos);
    const auto first = l.find_first_not_of(" \t");
    if (first != std::string_view::npos && l.substr(first, key.size()) == key) {
      const auto rest = l.substr(first + key.size());
      const auto eq = rest.find_first_not_of(" \t");
      if (eq != std::string_view::npos && rest[eq] == '=') {
        return std::make_pair(pos + first + key.size() + eq + 1, line);
      }
    }
    pos = eol + 1;
    ++line;
  }
  return std::nullopt;
}

int last_line(std::string_view text) {
  int n = 1;
  for (char ch : text) n += ch == '\n';
  return n;
}

SolveStatus status_from_phase(const std::string& phase, int line) {
  if (phase == "pdOPT") return SolveStatus::kOptimal;
  if (phase == "pdFEAS") return SolveStatus::kNearOptimal;
  // SDPA's primal is the dual of the standard form here.
  if (phase == "dINF" || phase == "pUNBD" || phase == "pFEAS_dINF" || phase == "pdINF") return SolveStatus::kInfeasible;
  if (phase == "pINF" || phase == "dUNBD" || phase == "pINF_dFEAS") return SolveStatus::kUnbounded;
  if (phase == "noINFO" || phase == "pFEAS" || phase == "dFEAS") return SolveStatus::kError;
  throw ParseError("unknown phase.value '" + phase + "'", line);
}

// Copies block `blk` of an xMat/yMat list into a standard-form vector.
void unpack_block(const Node& node, const ConeSegment& seg, int offset, Eigen::VectorXd& out, bool slack) {
  const auto want_list = [&](const Node& n, std::size_t len) {
    if (!n.is_list || n.items.size() != len) {
      throw ParseError("block has wrong shape (expected " + std::to_string(len) + " entries)", n.line);
    }
  };
  const auto number = [](const Node& n) {
    if (n.is_list) throw ParseError("expected a number", n.line);
    return n.value;
  };
  switch (seg.kind) {
    case ConeSegment::Kind::kPsd: {
      want_list(node, static_cast<std::size_t>(seg.size));
      Eigen::MatrixXd M(seg.size, seg.size);
      for (int i = 0; i < seg.size; ++i) {
        want_list(node.items[i], static_cast<std::size_t>(seg.size));
        for (int j = 0; j < seg.size; ++j) M(i, j) = number(node.items[i].items[j]);
      }
      out.segment(offset, seg.dim()) = svec(M);
      break;
    }
    case ConeSegment::Kind::kNonneg:
      want_list(node, static_cast<std::size_t>(seg.size));
      for (int t = 0; t < seg.size; ++t) out(offset + t) = number(node.items[t]);
      break;
    case ConeSegment::Kind::kFree:
      want_list(node, static_cast<std::size_t>(2 * seg.size));
      for (int t = 0; t < seg.size; ++t) {
        out(offset + t) = slack ? 0.0 : number(node.items[t]) - number(node.items[seg.size + t]);
      }
      break;
  }
}

}  // namespace

std::string export_sdpa(const ConicProblem& prob) {
  prob.check();
  std::ostringstream os;
  const bool has_free = std::any_of(prob.cones.begin(), prob.cones.end(),
                                    [](const auto& s) { return s.kind == ConeSegment::Kind::kFree; });
  os << "* momentctl: min c'x s.t. Ax = b, x in K; SDPA dual side Y = x, F0 = -C\n";
  if (has_free) os << "* free variables split as x = x+ - x- (diagonal blocks of size -2k)\n";
  os << "* " << kLayoutTag;
  for (const auto& seg : prob.cones) os << ' ' << cone_tag(seg);
  os << '\n';
  const auto sizes = block_sizes(prob);
  os << prob.num_rows() << " = mDIM\n" << sizes.size() << " = nBLOCK\n";
  for (std::size_t k = 0; k < sizes.size(); ++k) os << (k ? " " : "") << sizes[k];
  os << " = bLOCKsTRUCT\n";
  for (int i = 0; i < prob.num_rows(); ++i) os << (i ? " " : "") << fmt(prob.b(i));
  os << '\n';
  const auto place = placements(prob);
  for (int v = 0; v < prob.num_vars(); ++v) write_entry(os, 0, place[v], -prob.c(v));
  for (int i = 0; i < prob.A.outerSize(); ++i) {
    std::vector<std::pair<int, double>> row;
    for (SparseRowMatrix::InnerIterator it(prob.A, i); it; ++it) row.emplace_back(static_cast<int>(it.col()), it.value());
    std::sort(row.begin(), row.end());
    for (const auto& [v, a] : row) write_entry(os, i + 1, place[v], a);
  }
  return os.str();
}

ConicProblem import_sdpa(std::string_view text) {
  std::vector<Line> lines;
  std::optional<std::vector<ConeSegment>> layout;
  {
    std::istringstream is{std::string(text)};
    int number = 0;
    bool header = true;
    for (std::string l; std::getline(is, l);) {
      ++number;
      const auto first = l.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (header && (l[first] == '*' || l[first] == '"')) {
        if (auto cones = parse_layout_tag(l, number)) layout = std::move(cones);
        continue;
      }
      header = false;
      lines.push_back({number, l});
    }
  }
  std::size_t li = 0;
  const auto next_line = [&](const char* what) -> const Line& {
    if (li >= lines.size()) throw ParseError(std::string("unexpected end of file, expected ") + what, last_line(text));
    return lines[li++];
  };
  // Header values: leading tokens of a line, rest of the line ignored.
  const auto read_values = [&](std::size_t count, const char* what) {
    std::vector<std::pair<std::string, int>> vals;
    while (vals.size() < count) {
      const Line& l = next_line(what);
      for (const auto& tok : split_tokens(l.text)) {
        if (vals.size() == count) break;
        vals.emplace_back(tok, l.number);
      }
    }
    return vals;
  };

  const auto m_tok = read_values(1, "mDIM");
  const long m = to_int(m_tok[0].first, m_tok[0].second);
  if (m < 0) throw ParseError("mDIM must be nonnegative", m_tok[0].second);
  const auto nb_tok = read_values(1, "nBLOCK");
  const long nblocks = to_int(nb_tok[0].first, nb_tok[0].second);
  if (nblocks < 1) throw ParseError("nBLOCK must be positive", nb_tok[0].second);
  std::vector<int> sizes;
  for (const auto& [tok, ln] : read_values(static_cast<std::size_t>(nblocks), "bLOCKsTRUCT")) {
    const long s = to_int(tok, ln);
    if (s == 0) throw ParseError("block size 0", ln);
    sizes.push_back(static_cast<int>(s));
  }
  Eigen::VectorXd b(m);
  {
    const auto vals = read_values(static_cast<std::size_t>(m), "cost vector");
    for (long i = 0; i < m; ++i) b(i) = to_double(vals[i].first, vals[i].second);
  }

  ConicProblem prob;
  if (layout) {
    if (layout->size() != sizes.size()) throw ParseError("layout comment does not match nBLOCK", lines.front().number);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      const auto& seg = (*layout)[k];
      const int expect = seg.kind == ConeSegment::Kind::kPsd      ? seg.size
                         : seg.kind == ConeSegment::Kind::kNonneg ? -seg.size
                                                                  : -2 * seg.size;
      if (expect != sizes[k]) throw ParseError("layout comment does not match bLOCKsTRUCT", lines.front().number);
    }
    prob.cones = *layout;
  } else {
    for (int s : sizes) prob.cones.push_back(s > 0 ? ConeSegment::psd(s) : ConeSegment::nonneg(-s));
  }
  std::vector<int> offsets;
  int nvars = 0;
  for (const auto& seg : prob.cones) {
    offsets.push_back(nvars);
    nvars += seg.dim();
  }

  // (matno, variable) -> coefficient; split free halves checked for consistency.
  std::map<std::pair<long, int>, double> coef;
  std::map<std::pair<long, int>, double> minus_half;
  for (; li < lines.size(); ++li) {
    const Line& l = lines[li];
    const auto toks = split_tokens(l.text);
    if (toks.size() != 5) throw ParseError("expected '<matno> <blkno> <i> <j> <value>'", l.number);
    const long mat = to_int(toks[0], l.number), blk = to_int(toks[1], l.number);
    long i = to_int(toks[2], l.number), j = to_int(toks[3], l.number);
    const double value = to_double(toks[4], l.number);
    if (mat < 0 || mat > m) throw ParseError("matrix number out of range", l.number);
    if (blk < 1 || blk > nblocks) throw ParseError("block number out of range", l.number);
    const int size = std::abs(sizes[blk - 1]);
    if (i < 1 || j < 1 || i > size || j > size) throw ParseError("entry index out of range", l.number);
    if (i > j) std::swap(i, j);
    const auto& seg = prob.cones[blk - 1];
    int var = 0;
    double c = value;
    if (seg.kind == ConeSegment::Kind::kPsd) {
      var = offsets[blk - 1] + svec_index(seg.size, static_cast<int>(j - 1), static_cast<int>(i - 1));
      if (i != j) c = off_diagonal_coefficient(toks[4], l.number);
    } else {
      if (i != j) throw ParseError("off-diagonal entry in a diagonal block", l.number);
      if (seg.kind == ConeSegment::Kind::kFree && i > seg.size) {
        minus_half[{mat, offsets[blk - 1] + static_cast<int>(i) - 1 - seg.size}] += value;
        continue;
      }
      var = offsets[blk - 1] + static_cast<int>(i) - 1;
    }
    coef[{mat, var}] += c;
  }
  for (const auto& [key, v] : minus_half) {
    const auto it = coef.find(key);
    if (it == coef.end() || it->second != -v) {
      throw ParseError("split free variable halves disagree (matrix " + std::to_string(key.first) + ")",
                       lines.back().number);
    }
  }
  for (const auto& [key, v] : coef) {
    const int var = key.second;
    for (std::size_t k = 0; k < prob.cones.size(); ++k) {
      const bool in_free = prob.cones[k].kind == ConeSegment::Kind::kFree && var >= offsets[k] &&
                           var < offsets[k] + prob.cones[k].size;
      if (in_free && !minus_half.contains(key)) {
        throw ParseError("split free variable is missing its negative half", lines.back().number);
      }
    }
  }

  prob.c = Eigen::VectorXd::Zero(nvars);
  prob.b = b;
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& [key, v] : coef) {
    if (key.first == 0) {
      prob.c(key.second) = -v;
    } else {
      trips.emplace_back(static_cast<int>(key.first - 1), key.second, v);
    }
  }
  prob.A.resize(m, nvars);
  prob.A.setFromTriplets(trips.begin(), trips.end());
  prob.A.makeCompressed();
  prob.check();
  return prob;
}

ConicSolution import_solution(std::string_view text, const ConicProblem& prob) {
  const int end_line = last_line(text);
  const auto phase_at = find_section(text, "phase.value");
  if (!phase_at) throw ParseError("missing phase.value", end_line);
  std::string phase;
  {
    const std::size_t eol = std::min(text.find('\n', phase_at->first), text.size());
    const auto toks = split_tokens(std::string(text.substr(phase_at->first, eol - phase_at->first)));
    if (toks.empty()) throw ParseError("empty phase.value", phase_at->second);
    phase = toks[0];
  }
  ConicSolution sol;
  sol.status = status_from_phase(phase, phase_at->second);
  sol.message = "external solver phase " + phase;
  sol.x = Eigen::VectorXd::Zero(prob.num_vars());
  sol.s = Eigen::VectorXd::Zero(prob.num_vars());
  sol.y = Eigen::VectorXd::Zero(prob.num_rows());
  const bool need_vectors = is_solved(sol.status);

  const auto read_section = [&](std::string_view key) -> std::optional<Node> {
    const auto at = find_section(text, key);
    if (!at) {
      if (need_vectors) throw ParseError("missing " + std::string(key) + " section", end_line);
      return std::nullopt;
    }
    Node node = BraceReader(text, at->first, at->second).read();
    if (!node.is_list) throw ParseError(std::string(key) + " is not a brace list", node.line);
    return node;
  };

  if (const auto xvec = read_section("xVec")) {
    if (static_cast<int>(xvec->items.size()) != prob.num_rows()) {
      throw ParseError("xVec has " + std::to_string(xvec->items.size()) + " entries, expected " +
                           std::to_string(prob.num_rows()),
                       xvec->line);
    }
    for (int i = 0; i < prob.num_rows(); ++i) {
      if (xvec->items[i].is_list) throw ParseError("expected a number", xvec->items[i].line);
      sol.y(i) = -xvec->items[i].value;
    }
  }
  const auto unpack = [&](const Node& node, Eigen::VectorXd& out, bool slack) {
    if (node.items.size() != prob.cones.size()) {
      throw ParseError("expected " + std::to_string(prob.cones.size()) + " blocks", node.line);
    }
    int offset = 0;
    for (std::size_t k = 0; k < prob.cones.size(); ++k) {
      unpack_block(node.items[k], prob.cones[k], offset, out, slack);
      offset += prob.cones[k].dim();
    }
  };
  if (const auto xmat = read_section("xMat")) unpack(*xmat, sol.s, true);
  if (const auto ymat = read_section("yMat")) unpack(*ymat, sol.x, false);

  sol.primal_objective = prob.c.dot(sol.x);
  sol.dual_objective = prob.b.dot(sol.y);
  sol.residuals = compute_residuals(prob, sol.x, sol.y, sol.s);
  return sol;
}

ConicSolution SdpaFileBackend::solve(const ConicProblem& prob, const SolverOptions& opts) const {
  namespace fs = std::filesystem;
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("momentctl-sdpa-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  const fs::path in = dir / "problem.dat-s", out = dir / "solution.out";
  {
    std::ofstream f(in);
    f << export_sdpa(prob);
    if (!f) throw SolverError("cannot write " + in.string());
  }
  std::string cmd = command_;
  const auto substitute = [&](const std::string& key, const std::string& value) {
    for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  };
  substitute("{in}", in.string());
  substitute("{out}", out.string());
  substitute("{tol}", fmt(opts.tol));
  const int rc = std::system(cmd.c_str());
  ConicSolution sol;
  std::ifstream f(out);
  if (rc != 0 || !f) {
    sol.status = SolveStatus::kError;
    sol.message = "external solver command failed (exit status " + std::to_string(rc) + "): " + cmd;
  } else {
    std::stringstream ss;
    ss << f.rdbuf();
    sol = import_solution(ss.str(), prob);
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return sol;
}

}  // namespace momentctl::sdp
