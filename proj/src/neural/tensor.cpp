#include "clir/neural/tensor.hpp"

#include "clir/error.hpp"

namespace clir::nn {

Tensor& ParamSet::add(std::string name, std::vector<std::size_t> shape) {
  if (contains(name)) throw Error("duplicate parameter " + name);
  entries_.emplace_back(std::move(name), Tensor(std::move(shape)));
  return entries_.back().second;
}

Tensor& ParamSet::get(std::string_view name) {
  for (auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw Error("no parameter named " + std::string(name));
}

const Tensor& ParamSet::get(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw Error("no parameter named " + std::string(name));
}

bool ParamSet::contains(std::string_view name) const {
  for (const auto& [n, _] : entries_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

}  // namespace clir::nn
