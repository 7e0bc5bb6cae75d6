#pragma once

namespace llmlimit {

// Memory sizes and bandwidths are binary (GiB, TiB/s); compute rates are
// decimal (PFLOPS = 1e15 FLOP/s).
inline constexpr double kKiB = 1024.0;
inline constexpr double kMiB = kKiB * 1024.0;
inline constexpr double kGiB = kMiB * 1024.0;
inline constexpr double kTiB = kGiB * 1024.0;

inline constexpr double kGB = 1e9;
inline constexpr double kTB = 1e12;
inline constexpr double kPeta = 1e15;

inline constexpr double kNanosecond = 1e-9;
inline constexpr double kMicrosecond = 1e-6;

enum class UnitBase { binary, decimal };

inline constexpr double giga(UnitBase base) { return base == UnitBase::binary ? kGiB : kGB; }
inline constexpr double tera(UnitBase base) { return base == UnitBase::binary ? kTiB : kTB; }

}  // namespace llmlimit
