// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dacsfl {

Neighborhood::Neighborhood(Point center, std::vector<std::string> free, const Settings& settings, std::uint64_t salt,
                           std::map<std::string, Expr> eliminated)
    : center_(std::move(center)), free_(std::move(free)), eliminated_(std::move(eliminated)), settings_(settings) {
  for (const auto& [name, v] : center_.values()) slots_.push_back(name);
  for (const auto& [name, e] : eliminated_) {
    if (!center_.has(name)) slots_.push_back(name);
  }
  std::mt19937_64 rng(settings_.seed * 0x9E3779B97F4A7C15ULL + salt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int count = std::max({settings_.zero_samples, settings_.verify_samples, settings_.rank_samples});
  std::vector<std::pair<std::string, Compiled>> recompute;
  for (const auto& [name, e] : eliminated_) recompute.emplace_back(name, Compiled(e, slots_));
  std::size_t d = free_.size();
  for (int s = 0; s < count; ++s) {
    Point p = center_;
    if (d > 0) {
      std::vector<double> dir(d);
      double norm = 0.0;
      for (auto& x : dir) {
        x = gauss(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      double r = settings_.radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
      for (std::size_t i = 0; i < d; ++i) p.set(free_[i], center_.at(free_[i]) + (norm > 0 ? r * dir[i] / norm : 0.0));
    }
    if (!recompute.empty()) {
      std::vector<double> vals = slot_values(p);
      for (const auto& [name, c] : recompute) p.set(name, c(vals.data()));
    }
    samples_.push_back(std::move(p));
  }
}

std::vector<double> Neighborhood::slot_values(const Point& p) const {
  std::vector<double> v(slots_.size(), 0.0);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (p.has(slots_[i])) v[i] = p.at(slots_[i]);
  }
  return v;
}

ZeroTest is_zero(const Expr& e, const Neighborhood& nb) {
  ZeroTest out;
  Expr s = simplify(e);
  if (s.is_zero()) {
    out.state = ZeroTest::State::Zero;
    return out;
  }
  const Settings& st = nb.settings();
  Compiled c(s, nb.slots());
  double worst = 0.0;
  int finite = 0;
  auto check = [&](const Point& p) {
    std::vector<double> v = nb.slot_values(p);
    double x = c(v.data());
    if (!std::isfinite(x)) return false;
    ++finite;
    worst = std::max(worst, std::fabs(x));
    if (std::fabs(x) > st.tol_nonzero) {
      out.state = ZeroTest::State::NonzeroAt;
      out.witness = p;
      out.value = x;
      return true;
    }
    return false;
  };
  if (check(nb.center())) return out;
  int n = std::min<int>(st.zero_samples, static_cast<int>(nb.samples().size()));
  for (int i = 0; i < n; ++i) {
    if (check(nb.samples()[i])) return out;
  }
  if (finite > 0 && worst <= st.tol_zero) {
    out.state = ZeroTest::State::Zero;
    out.numeric = true;
    out.value = worst;
    return out;
  }
  out.state = ZeroTest::State::Unknown;
  out.value = worst;
  return out;
}

}  // namespace dacsfl
