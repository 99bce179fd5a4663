#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rstc/trainer.hpp"

namespace rstc {

/// One row per record: step,clusters,change_rate,loss_c,loss_i,acc,nmi,b_0..b_{C-1}.
/// Missing values (losses before training, metrics without labels) are "nan".
std::string format_report_csv(const TrainReport& report);
void write_report_csv(const TrainReport& report, const std::filesystem::path& path);
/// Parses the CSV written above (records and class count only).
TrainReport parse_report_csv(std::string_view text);
TrainReport read_report_csv(const std::filesystem::path& path);

/// One integer label per line.
void write_assignments(std::span<const std::size_t> labels, const std::filesystem::path& path);
std::vector<std::size_t> read_assignments(const std::filesystem::path& path);

/// Writes text via a temporary sibling file and a rename, so readers never
/// see a partial file. Throws FormatError(kIo) on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rstc
