#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fallcascade/data/skeleton.hpp"

namespace fallcascade::data {

// camera_id,subject_id,trial_id,frame_id,activity_code,x1,y1,c1,...,x17,y17,c17
std::vector<std::string> keypoint_csv_header();
// keypoint header followed by binary_label,multi_label
std::vector<std::string> dataset_csv_header();

// One SkeletonFrame per data row; a header row is required. Errors carry the
// 1-based line number.
std::vector<SkeletonFrame> parse_keypoint_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<SkeletonFrame> parse_keypoint_csv(const std::filesystem::path& path);

void write_keypoint_csv(std::ostream& out, const std::vector<SkeletonFrame>& frames);

// Processed dataset: normalized features plus labels. multi_label is -1 for
// no-fall rows.
Dataset read_dataset_csv(std::istream& in, const ActivityCatalog& catalog, const std::string& source = "<stream>");
Dataset read_dataset_csv(const std::filesystem::path& path, const ActivityCatalog& catalog);
void write_dataset_csv(std::ostream& out, const Dataset& samples);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& samples);

// True when the file's header carries the label columns of a processed dataset.
bool is_dataset_csv(const std::filesystem::path& path);

}  // namespace fallcascade::data
