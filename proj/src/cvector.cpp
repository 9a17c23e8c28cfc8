#include "orbitforge/cvector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "orbitforge/errors.hpp"

namespace orbitforge {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::resource: return "resource";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

std::int64_t window_budget() {
  if (const char* s = std::getenv("ORBITFORGE_WINDOW_BUDGET")) {
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end != s && v >= 1) return static_cast<std::int64_t>(v);
  }
  return kDefaultWindowBudget;
}

void check_budget(std::int64_t required, const char* what) {
  std::int64_t b = window_budget();
  if (required > b)
    throw ResourceError(std::string(what) + ": window budget " + std::to_string(b) + " exceeded",
                        required);
}

bool Space::contains(std::int64_t i) const {
  switch (kind) {
    case Indexing::finite: return i >= 0 && i < dim;
    case Indexing::naturals: return i >= 0;
    case Indexing::integers: return true;
  }
  return false;
}

CVector CVector::dense(const std::vector<cplx>& v) {
  CVector out(Space::finite(static_cast<std::int64_t>(v.size())));
  if (!v.empty()) out.append_run(0, v);
  return out;
}

CVector CVector::basis(Space s, std::int64_t i) {
  if (!s.contains(i)) throw DimensionError("basis index " + std::to_string(i) + " outside space");
  CVector out(s);
  cplx one(1.0, 0.0);
  out.append_run(i, &one, 1);
  return out;
}

CVector CVector::window(Space s, std::int64_t start, std::vector<cplx> values) {
  CVector out(s);
  out.append_run(start, values);
  return out;
}

cplx CVector::at(std::int64_t i) const {
  auto it = std::upper_bound(runs_.begin(), runs_.end(), i,
                             [](std::int64_t x, const Run& r) { return x < r.start; });
  if (it == runs_.begin()) return {};
  --it;
  if (i < it->start + it->len) return data_[it->offset + (i - it->start)];
  return {};
}

std::optional<Interval> CVector::support() const {
  if (runs_.empty()) return std::nullopt;
  return Interval{runs_.front().start, runs_.back().start + runs_.back().len};
}

double CVector::norm2() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return s;
}

double CVector::norm() const { return std::sqrt(norm2()); }

void CVector::append_run(std::int64_t start, const cplx* values, std::int64_t len) {
  if (len <= 0) return;
  if (!space_.contains(start) || !space_.contains(start + len - 1))
    throw DimensionError("run [" + std::to_string(start) + ", " + std::to_string(start + len) +
                         ") outside space");
  if (!runs_.empty() && start < runs_.back().start + runs_.back().len)
    throw DimensionError("runs must be appended in increasing index order");
  if (!runs_.empty() && start == runs_.back().start + runs_.back().len) {
    runs_.back().len += len;
  } else {
    runs_.push_back(Run{start, len, data_.size()});
  }
  data_.insert(data_.end(), values, values + len);
}

CVector CVector::scaled(cplx c) const {
  CVector out = *this;
  for (auto& z : out.data_) z *= c;
  return out;
}

CVector CVector::shifted(std::int64_t delta) const {
  CVector out(space_);
  for (const auto& r : runs_) {
    std::int64_t lo = r.start + delta, hi = r.start + r.len + delta;
    std::int64_t skip = 0;
    if (space_.kind != Indexing::integers && lo < 0) skip = -lo;
    if (space_.kind == Indexing::finite && hi > space_.dim) hi = space_.dim;
    if (lo + skip >= hi) continue;
    out.append_run(lo + skip, data_.data() + r.offset + skip, hi - lo - skip);
  }
  return out;
}

std::vector<cplx> CVector::to_dense() const {
  if (space_.kind != Indexing::finite) throw DimensionError("to_dense on a lazy vector");
  std::vector<cplx> out(static_cast<std::size_t>(space_.dim));
  for_each([&](std::int64_t i, cplx z) { out[static_cast<std::size_t>(i)] = z; });
  return out;
}

CVector CVector::dropped(double tol) const {
  CVector out(space_);
  for (const auto& r : runs_) {
    std::int64_t k = 0;
    while (k < r.len) {
      while (k < r.len && std::abs(data_[r.offset + k]) <= tol) ++k;
      std::int64_t b = k;
      while (k < r.len && std::abs(data_[r.offset + k]) > tol) ++k;
      if (k > b) out.append_run(r.start + b, data_.data() + r.offset + b, k - b);
    }
  }
  return out;
}

void require_same_space(const CVector& u, const CVector& v) {
  if (!(u.space() == v.space())) throw DimensionError("vectors live in different spaces");
}

namespace {

// Sum of a[i] * conj(b[i]) with four accumulators to shorten the dependency chain.
cplx dot_block(const cplx* a, const cplx* b, std::int64_t n) {
  const double* x = reinterpret_cast<const double*>(a);
  const double* y = reinterpret_cast<const double*>(b);
  double re[4] = {0, 0, 0, 0}, im[4] = {0, 0, 0, 0};
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      double ar = x[2 * (i + l)], ai = x[2 * (i + l) + 1];
      double br = y[2 * (i + l)], bi = y[2 * (i + l) + 1];
      re[l] += ar * br + ai * bi;
      im[l] += ai * br - ar * bi;
    }
  }
  for (; i < n; ++i) {
    double ar = x[2 * i], ai = x[2 * i + 1], br = y[2 * i], bi = y[2 * i + 1];
    re[0] += ar * br + ai * bi;
    im[0] += ai * br - ar * bi;
  }
  return {re[0] + re[1] + re[2] + re[3], im[0] + im[1] + im[2] + im[3]};
}

}  // namespace

cplx inner(const CVector& u, const CVector& v) {
  require_same_space(u, v);
  const auto& ru = u.runs();
  const auto& rv = v.runs();
  cplx s{};
  std::size_t i = 0, j = 0;
  while (i < ru.size() && j < rv.size()) {
    std::int64_t lo = std::max(ru[i].start, rv[j].start);
    std::int64_t hi = std::min(ru[i].start + ru[i].len, rv[j].start + rv[j].len);
    if (lo < hi) {
      s += dot_block(u.data().data() + ru[i].offset + (lo - ru[i].start),
                     v.data().data() + rv[j].offset + (lo - rv[j].start), hi - lo);
    }
    if (ru[i].start + ru[i].len < rv[j].start + rv[j].len)
      ++i;
    else
      ++j;
  }
  return s;
}

double distance(const CVector& u, const CVector& v) {
  require_same_space(u, v);
  // Sweep both run lists; no temporary vector.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  const auto& ru = u.runs();
  const auto& rv = v.runs();
  const cplx* du = u.data().data();
  const cplx* dv = v.data().data();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  std::int64_t pu = std::numeric_limits<std::int64_t>::min(), pv = pu;
  while (i < ru.size() || j < rv.size()) {
    const std::int64_t us = i < ru.size() ? std::max(ru[i].start, pu) : kInf;
    const std::int64_t vs = j < rv.size() ? std::max(rv[j].start, pv) : kInf;
    const std::int64_t ue = i < ru.size() ? ru[i].start + ru[i].len : kInf;
    const std::int64_t ve = j < rv.size() ? rv[j].start + rv[j].len : kInf;
    if (us < vs) {
      const std::int64_t end = std::min(ue, vs);
      for (std::int64_t p = us; p < end; ++p) s += std::norm(du[ru[i].offset + (p - ru[i].start)]);
      pu = end;
      if (end == ue) ++i;
    } else if (vs < us) {
      const std::int64_t end = std::min(ve, us);
      for (std::int64_t p = vs; p < end; ++p) s += std::norm(dv[rv[j].offset + (p - rv[j].start)]);
      pv = end;
      if (end == ve) ++j;
    } else {
      const std::int64_t end = std::min(ue, ve);
      const cplx* a = du + ru[i].offset + (us - ru[i].start);
      const cplx* b = dv + rv[j].offset + (vs - rv[j].start);
      for (std::int64_t p = 0; p < end - us; ++p) s += std::norm(a[p] - b[p]);
      pu = pv = end;
      if (end == ue) ++i;
      if (end == ve) ++j;
    }
  }
  return std::sqrt(s);
}

CVector linear_combination(const std::vector<std::pair<cplx, const CVector*>>& terms) {
  if (terms.empty()) throw DimensionError("empty linear combination");
  const Space sp = terms.front().second->space();
  struct Piece {
    std::int64_t start, len;
    std::size_t term;
    std::size_t offset;
  };
  std::vector<Piece> pieces;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (!(terms[t].second->space() == sp)) throw DimensionError("vectors live in different spaces");
    for (const auto& r : terms[t].second->runs()) pieces.push_back({r.start, r.len, t, r.offset});
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.start < b.start; });
  CVector out(sp);
  std::size_t p = 0;
  std::vector<cplx> buf;
  while (p < pieces.size()) {
    std::int64_t lo = pieces[p].start, hi = pieces[p].start + pieces[p].len;
    std::size_t q = p + 1;
    while (q < pieces.size() && pieces[q].start <= hi) {
      hi = std::max(hi, pieces[q].start + pieces[q].len);
      ++q;
    }
    buf.assign(static_cast<std::size_t>(hi - lo), cplx{});
    for (std::size_t k = p; k < q; ++k) {
      const auto& pc = pieces[k];
      const cplx c = terms[pc.term].first;
      const cplx* src = terms[pc.term].second->data().data() + pc.offset;
      cplx* dst = buf.data() + (pc.start - lo);
      for (std::int64_t e = 0; e < pc.len; ++e) dst[e] += c * src[e];
    }
    out.append_run(lo, buf);
    p = q;
  }
  return out;
}

CVector operator+(const CVector& a, const CVector& b) {
  return linear_combination({{cplx(1.0), &a}, {cplx(1.0), &b}});
}

CVector operator-(const CVector& a, const CVector& b) {
  return linear_combination({{cplx(1.0), &a}, {cplx(-1.0), &b}});
}

}  // namespace orbitforge
