#pragma once
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace orbitforge {

using cplx = std::complex<double>;

enum class Indexing { finite, integers, naturals };

struct Space {
  Indexing kind = Indexing::integers;
  std::int64_t dim = 0;  // only meaningful for finite

  static Space finite(std::int64_t n) { return {Indexing::finite, n}; }
  static Space integers() { return {Indexing::integers, 0}; }
  static Space naturals() { return {Indexing::naturals, 0}; }
  bool operator==(const Space&) const = default;
  bool contains(std::int64_t i) const;
};

struct Interval {
  std::int64_t lo = 0;  // inclusive
  std::int64_t hi = 0;  // exclusive
  std::int64_t length() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
};

// Windowed sparse vector: sorted disjoint runs of contiguous entries, all
// sharing one data buffer. Indices outside the runs are exactly zero. A dense
// finite vector is a single run starting at 0.
class CVector {
 public:
  struct Run {
    std::int64_t start;
    std::int64_t len;
    std::size_t offset;
  };

  CVector() = default;
  explicit CVector(Space s) : space_(s) {}

  static CVector zeros(Space s) { return CVector(s); }
  static CVector dense(const std::vector<cplx>& v);
  static CVector basis(Space s, std::int64_t i);
  static CVector window(Space s, std::int64_t start, std::vector<cplx> values);

  const Space& space() const { return space_; }
  const std::vector<Run>& runs() const { return runs_; }
  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& mutable_data() { return data_; }

  std::int64_t nnz() const { return static_cast<std::int64_t>(data_.size()); }
  bool is_zero() const { return data_.empty(); }
  cplx at(std::int64_t i) const;
  std::optional<Interval> support() const;
  double norm2() const;
  double norm() const;

  // Appends a run strictly to the right of the current support.
  void append_run(std::int64_t start, const cplx* values, std::int64_t len);
  void append_run(std::int64_t start, const std::vector<cplx>& values) {
    append_run(start, values.data(), static_cast<std::int64_t>(values.size()));
  }

  CVector scaled(cplx c) const;
  CVector shifted(std::int64_t delta) const;  // drops entries leaving the space
  std::vector<cplx> to_dense() const;           // finite spaces only

  // Removes entries with |v| <= tol (tol = 0 keeps everything, drops exact zeros only
  // when requested explicitly).
  CVector dropped(double tol) const;

  template <class F>
  void for_each(F&& f) const {
    for (const auto& r : runs_)
      for (std::int64_t k = 0; k < r.len; ++k) f(r.start + k, data_[r.offset + k]);
  }

 private:
  Space space_{};
  std::vector<Run> runs_;
  std::vector<cplx> data_;
};

// Linear in the first slot, conjugate linear in the second.
cplx inner(const CVector& u, const CVector& v);
double distance(const CVector& u, const CVector& v);

// sum_i coef_i * v_i; runs are merged over the union of supports.
CVector linear_combination(const std::vector<std::pair<cplx, const CVector*>>& terms);
CVector operator+(const CVector& a, const CVector& b);
CVector operator-(const CVector& a, const CVector& b);

void require_same_space(const CVector& u, const CVector& v);

}  // namespace orbitforge
