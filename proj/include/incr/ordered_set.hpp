#pragma once

#include <algorithm>
#include <set>
#include <vector>

namespace incr {

/// Set that remembers insertion order. Iteration follows the order of first
/// insertion; removal is linear.
template <class T>
class OrderedSet {
 public:
  using const_iterator = typename std::vector<T>::const_iterator;

  bool insert(const T& v) {
    if (!index_.insert(v).second) return false;
    order_.push_back(v);
    return true;
  }
  bool erase(const T& v) {
    if (!index_.erase(v)) return false;
    order_.erase(std::find(order_.begin(), order_.end(), v));
    return true;
  }
  bool contains(const T& v) const { return index_.count(v) != 0; }
  bool empty() const { return order_.empty(); }
  std::size_t size() const { return order_.size(); }
  void clear() {
    order_.clear();
    index_.clear();
  }
  const_iterator begin() const { return order_.begin(); }
  const_iterator end() const { return order_.end(); }
  const std::vector<T>& items() const { return order_; }
  std::set<T> as_set() const { return index_; }

  friend bool operator==(const OrderedSet& a, const OrderedSet& b) { return a.order_ == b.order_; }

 private:
  std::vector<T> order_;
  std::set<T> index_;
};

}  // namespace incr
