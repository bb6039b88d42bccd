#pragma once

#include <cstdint>

namespace evospec {

/// 365-day model calendar, no leap years. Time indices t are 1-based days
/// counted from the start of a run; day-of-year d is in {1,...,365}.
struct Calendar365 {
  static constexpr int days_per_year = 365;

  static int day_of_year(std::int64_t t_1based) {
    return static_cast<int>((t_1based - 1) % days_per_year) + 1;
  }

  /// 0-based convenience: index into a 365-long array for day t (1-based).
  static int day_index(std::int64_t t_1based) { return day_of_year(t_1based) - 1; }

  static std::int64_t year_of(std::int64_t t_1based, std::int64_t start_year) {
    return start_year + (t_1based - 1) / days_per_year;
  }
};

}  // namespace evospec
