#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhdeep/errors.hpp"

namespace mhdeep {

// Canonical category order. Flattening, bitmasks and file layouts all use it.
enum class SensorId : int { GSR = 0, ST, IBI, AccW, Temp, Grav, AccP, Vel };

enum class Source { Watch, Phone };

inline constexpr int kNumSensors = 8;
inline constexpr double kWindowSeconds = 15.0;

struct SensorInfo {
    SensorId id;
    std::string_view name;       // token used in stream headers and subset strings
    std::string_view file_stem;  // per-sensor CSV inside a participant directory
    Source source;
    int rate_hz;
    int channels;
};

// Fixed sensor inventory; rates and channel counts are part of the data contract.
inline constexpr std::array<SensorInfo, kNumSensors> kSensors{{
    {SensorId::GSR, "GSR", "gsr", Source::Watch, 4, 1},
    {SensorId::ST, "ST", "st", Source::Watch, 4, 1},
    {SensorId::IBI, "IBI", "ibi", Source::Watch, 1, 1},
    {SensorId::AccW, "AccW", "acc_w", Source::Watch, 32, 3},
    {SensorId::Temp, "Temp", "temp", Source::Phone, 5, 1},
    {SensorId::Grav, "Grav", "grav", Source::Phone, 5, 3},
    {SensorId::AccP, "AccP", "acc_p", Source::Phone, 5, 3},
    {SensorId::Vel, "Vel", "vel", Source::Phone, 5, 3},
}};

inline constexpr int kTotalChannels = 16;  // sum of per-sensor channel counts

const SensorInfo& sensor_info(SensorId id);
std::optional<SensorId> sensor_from_name(std::string_view name);

// Samples per channel within one window; integral because the window length
// is a whole multiple of every sensor period.
int sensor_window_samples(SensorId id, double window_s = kWindowSeconds);

// Flattened feature count one sensor contributes to a window.
int sensor_window_dims(SensorId id, double window_s = kWindowSeconds);

// Offset of a sensor's first channel in the canonical 16-channel layout.
int channel_offset(SensorId id);

// Subset of the eight data categories, stored as a bitmask in canonical order.
class CategorySet {
  public:
    CategorySet() = default;

    static CategorySet all() { return from_bits(0xFF); }
    static CategorySet from_bits(unsigned bits);
    static CategorySet of(std::initializer_list<SensorId> ids);

    // Accepts a decimal bitmask ("37") or comma-separated names ("GSR,AccW").
    static CategorySet parse(std::string_view text);

    void insert(SensorId id) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(id)); }
    bool contains(SensorId id) const { return (bits_ >> static_cast<int>(id)) & 1u; }
    int count() const;
    bool empty() const { return bits_ == 0; }
    unsigned bits() const { return bits_; }

    std::vector<SensorId> to_vector() const;  // canonical order
    std::string to_string() const;            // "GSR,AccW,Temp"

    bool operator==(const CategorySet&) const = default;

  private:
    std::uint8_t bits_ = 0;
};

// Total flattened feature dimension of a window over the given categories.
// Throws ConfigError on an empty set.
int category_dims(const CategorySet& categories, double window_s = kWindowSeconds);

CategorySet watch_categories();
CategorySet phone_categories();

}  // namespace mhdeep
