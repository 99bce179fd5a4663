#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rstc/trainer.hpp"

namespace rstc {

/// Flat key=value text, one pair per line; '#' starts a comment and blank
/// lines are ignored. Keys are TrainConfig field names (lambda_i, batch_size,
/// delta, max_steps, ...), SaotConfig field names, bare or prefixed with
/// "saot." (epsilon1, saot.outer_iters, ...), and AugmentConfig field names
/// prefixed with "augment." (augment.strategy, augment.seed, ...). Enum
/// values are spelled in lower snake case: ot_mode = saot|fixed|ma|kl,
/// epsilon2_preset = balanced|light_imbalanced|heavy_imbalanced,
/// saot.penalty = log_barrier|kl_to_previous, saot.update = joint|alternating,
/// augment.strategy = precomputed|gaussian_noise|feature_dropout.
/// Unset keys keep their defaults. Throws std::invalid_argument naming the
/// line for unknown keys, duplicate keys and unparsable values.
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Every field in the parse_train_config syntax; parsing it back gives a
/// configuration that trains identically.
std::string format_train_config(const TrainConfig& cfg);

OtMode parse_ot_mode(std::string_view text);
std::string_view ot_mode_name(OtMode mode) noexcept;

}  // namespace rstc
