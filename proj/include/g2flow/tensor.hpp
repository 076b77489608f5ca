#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "g2flow/errors.hpp"
#include "g2flow/scalar.hpp"

namespace g2 {

inline constexpr int kDim = 7;
inline constexpr int kMaxRank = 8;

inline constexpr std::array<std::size_t, kMaxRank + 1> kPow7 = {
    1, 7, 49, 343, 2401, 16807, 117649, 823543, 5764801};

struct Symmetry {
  enum class Kind { None, Antisymmetric, Pairs };
  Kind kind = Kind::None;
  std::vector<std::pair<int, int>> pairs;  // slots that commute

  static Symmetry none() { return {}; }
  static Symmetry antisymmetric() { return {Kind::Antisymmetric, {}}; }
  static Symmetry symmetric_pairs(std::vector<std::pair<int, int>> p) {
    return {Kind::Pairs, std::move(p)};
  }
  bool operator==(const Symmetry&) const = default;
};

template <ScalarKind S>
class Tensor {
 public:
  using value_type = S;

  Tensor() : Tensor(0) {}
  explicit Tensor(int rank, Symmetry symmetry = Symmetry::none())
      : rank_(rank), symmetry_(std::move(symmetry)) {
    if (rank < 0 || rank > kMaxRank)
      throw RankError("tensor rank " + std::to_string(rank) + " out of range");
    data_.assign(kPow7[rank], S(0));
  }

  static Tensor scalar(S v) {
    Tensor t(0);
    t.data_[0] = std::move(v);
    return t;
  }
  static Tensor form(int k) { return Tensor(k, Symmetry::antisymmetric()); }
  static Tensor symmetric2() {
    return Tensor(2, Symmetry::symmetric_pairs({{0, 1}}));
  }

  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  const Symmetry& symmetry() const { return symmetry_; }
  void set_symmetry(Symmetry s) { symmetry_ = std::move(s); }
  bool is_form() const { return symmetry_.kind == Symmetry::Kind::Antisymmetric; }

  std::span<S> data() { return data_; }
  std::span<const S> data() const { return data_; }
  S& operator[](std::size_t flat) { return data_[flat]; }
  const S& operator[](std::size_t flat) const { return data_[flat]; }

  static std::size_t offset(std::span<const int> idx) {
    std::size_t off = 0;
    for (int i : idx) off = off * kDim + static_cast<std::size_t>(i);
    return off;
  }

  template <class... I>
  S& operator()(I... idx) {
    static_assert(sizeof...(I) <= kMaxRank);
    const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
    check_rank(sizeof...(I));
    return data_[offset(a)];
  }
  template <class... I>
  const S& operator()(I... idx) const {
    const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
    check_rank(sizeof...(I));
    return data_[offset(a)];
  }
  S& at(std::span<const int> idx) {
    check_rank(idx.size());
    return data_[offset(idx)];
  }
  const S& at(std::span<const int> idx) const {
    check_rank(idx.size());
    return data_[offset(idx)];
  }

  S value() const {
    if (rank_ != 0) throw RankError("value() on non-scalar tensor");
    return data_[0];
  }

  Tensor& operator+=(const Tensor& o) {
    same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    if (!(symmetry_ == o.symmetry_)) symmetry_ = Symmetry::none();
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    if (!(symmetry_ == o.symmetry_)) symmetry_ = Symmetry::none();
    return *this;
  }
  Tensor& operator*=(const S& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  // Accumulate s * o.
  Tensor& axpy(const S& s, const Tensor& o) {
    same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, const S& s) { return a *= s; }
  friend Tensor operator*(const S& s, Tensor a) { return a *= s; }
  friend Tensor operator-(Tensor a) { return a *= S(-1); }

  bool operator==(const Tensor& o) const {
    return rank_ == o.rank_ && data_ == o.data_;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& x : data_) m = std::max(m, std::abs(to_double(x)));
    return m;
  }
  bool is_zero_tensor() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const S& x) { return g2::is_zero(x); });
  }

  template <ScalarKind T>
  Tensor<T> cast() const {
    Tensor<T> out(rank_, symmetry_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if constexpr (std::is_same_v<T, double>)
        out[i] = to_double(data_[i]);
      else
        out[i] = T(data_[i]);
    }
    return out;
  }

  // out(i_0..i_{k-1}) = this(i_{perm[0]}, ..., i_{perm[k-1]})
  Tensor permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != rank_)
      throw RankError("permutation length does not match rank");
    Tensor out(rank_, Symmetry::none());
    std::array<int, kMaxRank> idx{}, src{};
    for (std::size_t flat = 0; flat < data_.size(); ++flat) {
      std::size_t r = flat;
      for (int s = rank_ - 1; s >= 0; --s) {
        idx[s] = static_cast<int>(r % kDim);
        r /= kDim;
      }
      for (int s = 0; s < rank_; ++s) src[s] = idx[perm[s]];
      out.data_[flat] = data_[offset(std::span<const int>(src.data(), rank_))];
    }
    return out;
  }

  // Largest violation of the declared symmetry over all index tuples.
  double symmetry_defect() const {
    double worst = 0;
    if (symmetry_.kind == Symmetry::Kind::None || rank_ < 2) return 0;
    std::vector<std::pair<int, int>> swaps;
    if (symmetry_.kind == Symmetry::Kind::Pairs) {
      swaps = symmetry_.pairs;
    } else {
      for (int s = 0; s + 1 < rank_; ++s) swaps.push_back({s, s + 1});
    }
    const bool anti = symmetry_.kind == Symmetry::Kind::Antisymmetric;
    std::array<int, kMaxRank> idx{};
    for (std::size_t flat = 0; flat < data_.size(); ++flat) {
      std::size_t r = flat;
      for (int s = rank_ - 1; s >= 0; --s) {
        idx[s] = static_cast<int>(r % kDim);
        r /= kDim;
      }
      for (auto [a, b] : swaps) {
        auto j = idx;
        std::swap(j[a], j[b]);
        const S& other = data_[offset(std::span<const int>(j.data(), rank_))];
        const double d = anti ? to_double(data_[flat] + other)
                              : to_double(data_[flat] - other);
        worst = std::max(worst, std::abs(d));
      }
    }
    return worst;
  }

 private:
  void check_rank(std::size_t n) const {
    if (static_cast<int>(n) != rank_)
      throw RankError("expected " + std::to_string(rank_) + " indices, got " +
                      std::to_string(n));
  }
  void same_shape(const Tensor& o) const {
    if (o.rank_ != rank_) throw RankError("rank mismatch in tensor arithmetic");
  }

  int rank_ = 0;
  Symmetry symmetry_;
  std::vector<S> data_;
};

// Decode a flat offset into a multi-index of the given rank.
inline void unflatten(std::size_t flat, int rank, int* idx) {
  for (int s = rank - 1; s >= 0; --s) {
    idx[s] = static_cast<int>(flat % kDim);
    flat /= kDim;
  }
}

template <ScalarKind S>
Tensor<S> kronecker() {
  Tensor<S> d = Tensor<S>::symmetric2();
  for (int i = 0; i < kDim; ++i) d(i, i) = S(1);
  return d;
}

template <ScalarKind S>
Tensor<S> basis_vector(int i) {
  Tensor<S> v(1);
  v(i) = S(1);
  return v;
}

template <ScalarKind S>
Tensor<S> tensor_product(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rank() + b.rank() > kMaxRank)
    throw RankError("tensor product rank exceeds " + std::to_string(kMaxRank));
  Tensor<S> out(a.rank() + b.rank());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (is_zero(a[i])) continue;
    for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = a[i] * b[j];
  }
  return out;
}

template <ScalarKind S>
S sum_of_squares(const Tensor<S>& t) {
  S acc(0);
  for (const auto& x : t.data()) acc += x * x;
  return acc;
}

}  // namespace g2
