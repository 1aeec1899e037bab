// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "schatten/error.hpp"
#include "schatten/rng/mix.hpp"

namespace schatten {

/// Weighted reservoir sampling without replacement (Efraimidis-Spirakis
/// A-Res). Item `index` with weight w gets key u^{1/w}, u uniform on (0, 1],
/// and the reservoir keeps the `capacity` largest keys. u is a pure function
/// of (seed, index), so the sample is reproducible.
///
/// Keys are stored as log u / w.
template <typename Item>
class WeightedReservoir {
 public:
  struct Entry {
    std::size_t index;
    double weight;
    double uniform;  // the u behind the key
    double log_key;  // log(u) / weight
    Item item;
  };

  WeightedReservoir(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), seed_(seed) {
    require(capacity >= 1, ErrorKind::InvalidParameter, "reservoir capacity must be >= 1");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return heap_.size(); }
  std::size_t offered() const noexcept { return offered_; }

  double uniform_for(std::size_t index) const noexcept {
    return rng::to_unit_open_closed(rng::mix64(rng::child_seed(seed_, index)));
  }

  /// Items with weight <= 0 are never sampled.
  void offer(std::size_t index, double weight, Item item) {
    ++offered_;
    if (!(weight > 0.0)) return;
    const double u = uniform_for(index);
    const double log_key = std::log(u) / weight;
    if (heap_.size() < capacity_) {
      heap_.push_back(Entry{index, weight, u, log_key, std::move(item)});
      std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
      return;
    }
    if (!better(log_key, index, heap_.front())) return;
    std::pop_heap(heap_.begin(), heap_.end(), worse_on_top);
    heap_.back() = Entry{index, weight, u, log_key, std::move(item)};
    std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
  }

  /// Current sample, best key first.
  std::vector<Entry> entries() const {
    std::vector<Entry> out = heap_;
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      return better(a.log_key, a.index, b);
    });
    return out;
  }

 private:
  static bool better(double log_key, std::size_t index, const Entry& other) {
    if (log_key != other.log_key) return log_key > other.log_key;
    return index < other.index;
  }
  static bool worse_on_top(const Entry& a, const Entry& b) {
    return better(a.log_key, a.index, b);
  }

  std::size_t capacity_;
  std::uint64_t seed_;
  std::size_t offered_ = 0;
  std::vector<Entry> heap_;
};

/// Keeps the `capacity` items of largest weight; ties go to the lower index.
template <typename Item>
class TopWeighted {
 public:
  struct Entry {
    std::size_t index;
    double weight;
    Item item;
  };

  explicit TopWeighted(std::size_t capacity) : capacity_(capacity) {}

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return heap_.size(); }

  void offer(std::size_t index, double weight, Item item) {
    if (capacity_ == 0) return;
    if (heap_.size() < capacity_) {
      heap_.push_back(Entry{index, weight, std::move(item)});
      std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
      return;
    }
    const Entry& worst = heap_.front();
    if (!(weight > worst.weight || (weight == worst.weight && index < worst.index))) return;
    std::pop_heap(heap_.begin(), heap_.end(), worse_on_top);
    heap_.back() = Entry{index, weight, std::move(item)};
    std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
  }

  /// Heaviest first.
  std::vector<Entry> entries() const {
    std::vector<Entry> out = heap_;
    std::sort(out.begin(), out.end(), worse_on_top);
    return out;
  }

 private:
  static bool worse_on_top(const Entry& a, const Entry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.index < b.index;
  }

  std::size_t capacity_;
  std::vector<Entry> heap_;
};

}  // namespace schatten
