#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace affmap {

enum class errc {
  behind_camera,
  non_positive_depth,
  empty_sparse_set,
  zero_median,
  no_intersection,
  missing_object,
  missing_hand,
  invalid_depth,
  invalid_k,
  mode_mismatch,
  shape_mismatch,
  domain_error,
  all_zero_map,
  empty_cloud,
  affordance_not_found,
  no_path,
  blocked_endpoint,
  invalid_spec,
  vocab_mismatch,
  io_error,
  usage_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::behind_camera: return "BehindCamera";
    case errc::non_positive_depth: return "NonPositiveDepth";
    case errc::empty_sparse_set: return "EmptySparseSet";
    case errc::zero_median: return "ZeroMedian";
    case errc::no_intersection: return "NoIntersection";
    case errc::missing_object: return "MissingObject";
    case errc::missing_hand: return "MissingHand";
    case errc::invalid_depth: return "InvalidDepth";
    case errc::invalid_k: return "InvalidK";
    case errc::mode_mismatch: return "ModeMismatch";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::domain_error: return "DomainError";
    case errc::all_zero_map: return "AllZeroMap";
    case errc::empty_cloud: return "EmptyCloud";
    case errc::affordance_not_found: return "AffordanceNotFound";
    case errc::no_path: return "NoPath";
    case errc::blocked_endpoint: return "BlockedEndpoint";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::vocab_mismatch: return "VocabMismatch";
    case errc::io_error: return "IoError";
    case errc::usage_error: return "UsageError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

// Affordance class vocabulary. Class order is significant: it fixes plane
// order in all tensors and the bit order of class masks.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> classes) : classes_(std::move(classes)) {
    if (classes_.empty()) fail(errc::invalid_spec, "vocabulary must be nonempty");
    for (int i = 0; i < static_cast<int>(classes_.size()); ++i) {
      if (!index_.emplace(classes_[i], i).second)
        fail(errc::invalid_spec, "duplicate vocabulary class '" + classes_[i] + "'");
    }
  }

  // 20-class preset.
  static Vocabulary easy() {
    return Vocabulary({"take", "put", "open", "close", "wash", "cut", "mix", "pour", "throw",
                       "move", "remove", "dry", "turn-on", "turn", "shake", "turn-off", "peel",
                       "adjust", "empty", "scoop"});
  }

  // 43-class preset: the easy set plus less frequent actions.
  static Vocabulary complex() {
    std::vector<std::string> classes = easy().classes();
    for (const char* extra :
         {"insert", "press", "fill", "flip", "squeeze", "scrub", "pat", "drain", "fold", "unroll",
          "sprinkle", "crush", "grate", "break", "flatten", "wrap", "spray", "hold", "knead",
          "season", "serve", "slide", "sharpen"})
      classes.emplace_back(extra);
    return Vocabulary(std::move(classes));
  }

  int size() const { return static_cast<int>(classes_.size()); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::string& name(int k) const { return classes_.at(static_cast<size_t>(k)); }
  bool contains(const std::string& cls) const { return index_.count(cls) > 0; }
  // -1 when absent.
  int index_of(const std::string& cls) const {
    auto it = index_.find(cls);
    return it == index_.end() ? -1 : it->second;
  }

  bool operator==(const Vocabulary& o) const { return classes_ == o.classes_; }

 private:
  std::vector<std::string> classes_;
  std::unordered_map<std::string, int> index_;
};

// Dense H x W grid, row-major.
template <typename T>
struct Image {
  int height = 0;
  int width = 0;
  std::vector<T> values;

  static Image zeros(int height, int width) {
    Image img;
    img.height = height;
    img.width = width;
    img.values.assign(static_cast<size_t>(height) * width, T{});
    return img;
  }

  T& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  const T& at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }
  bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }
};

// K x H x W stack of per-class planes, row-major, with the owning vocabulary
// carried alongside so files and in-memory values stay self-describing.
template <typename T>
struct ClassPlanes {
  std::vector<std::string> classes;
  int height = 0;
  int width = 0;
  std::vector<T> values;

  static ClassPlanes zeros(std::vector<std::string> classes, int height, int width) {
    ClassPlanes p;
    p.classes = std::move(classes);
    p.height = height;
    p.width = width;
    p.values.assign(p.classes.size() * static_cast<size_t>(height) * width, T{});
    return p;
  }

  int num_classes() const { return static_cast<int>(classes.size()); }
  size_t plane_size() const { return static_cast<size_t>(height) * width; }
  size_t index(int k, int y, int x) const {
    return (static_cast<size_t>(k) * height + y) * width + x;
  }
  T& at(int k, int y, int x) { return values[index(k, y, x)]; }
  const T& at(int k, int y, int x) const { return values[index(k, y, x)]; }
  std::span<T> plane(int k) { return {values.data() + k * plane_size(), plane_size()}; }
  std::span<const T> plane(int k) const { return {values.data() + k * plane_size(), plane_size()}; }

  template <typename U>
  bool same_shape(const ClassPlanes<U>& o) const {
    return classes == o.classes && height == o.height && width == o.width;
  }
};

using MultiLabelMask = ClassPlanes<std::uint8_t>;
using LabelField = ClassPlanes<std::uint8_t>;
using Heatmap = ClassPlanes<float>;

// Effective worker count: AFFMAP_THREADS wins over the configured value;
// 0 means hardware concurrency.
inline int worker_count(int configured) {
  if (const char* env = std::getenv("AFFMAP_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (configured > 0) return configured;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) across up to `workers` threads. Work is split by
// index so results keyed by i merge in a fixed order regardless of scheduling.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  size_t threads = std::min<size_t>(std::max(workers, 1), n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace affmap
