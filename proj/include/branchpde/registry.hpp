#pragma once

// Named function factories so that problems can be described in config files.
// A reference is "name", "name:param" or a bare number (a constant).

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "branchpde/problem.hpp"

namespace branchpde {

struct FieldContext {
  const Rectangle& rect;
  double beta;
};

using FieldFactory = std::function<ScalarField(std::string_view param, const FieldContext& ctx)>;

struct UnknownFunction : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class Registry {
 public:
  /// Registry preloaded with the built-in fields.
  static Registry& global();

  void add(std::string name, std::string description, FieldFactory factory);
  [[nodiscard]] ScalarField make(std::string_view reference, const FieldContext& ctx) const;
  [[nodiscard]] bool contains(std::string_view reference) const;
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> list() const;

 private:
  struct Entry {
    std::string description;
    FieldFactory factory;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Entry, std::less<>> entries_;
};

void register_builtin_fields(Registry& registry);

/// Sup of |f| over the closed rectangle: analytic when the field provides it,
/// otherwise a grid search refined around the maximiser.
double sup_abs(const ScalarField& f, const Rectangle& rect);

}  // namespace branchpde
