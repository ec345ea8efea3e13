/* Copyright 2026 The Blinkscope Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BLINKSCOPE_JSON_IO_H_
#define BLINKSCOPE_JSON_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "blinkscope/annotation.h"
#include "blinkscope/config.h"
#include "blinkscope/metrics.h"
#include "json.hpp"

namespace blinkscope {

// JSON file formats. Parsing is strict: unknown keys, missing keys and type
// mismatches raise DataError with a JSON path such as
// "$.videos[0].instances[1].blinks[2].end". Boxes are absolute pixels on
// disk and normalized by the video's width/height in memory.
//
// Annotation file:
//   {"videos": [{"video_id", "num_frames", "fps", "width", "height",
//                "instances": [{"presence": [0|1, ...],
//                               "boxes": [[x1,y1,x2,y2] | null, ...],
//                               "blinks": [{"start", "end"}, ...]}]}]}
// Prediction file:
//   {"videos": [{"video_id", "num_frames", "width", "height",
//                "hypotheses": [{"confidence", "face_scores": [...],
//                                "boxes": [[x1,y1,x2,y2] | null, ...],
//                                "blink_scores": [...],
//                                "blinks": [{"start", "end", "confidence"}]}]}]}
//   A box is written as null wherever the face score is below 0.5.

using Json = nlohmann::json;

inline constexpr double kPresenceScore = 0.5;

Json ReadJsonFile(const std::filesystem::path& path);
// Writes `j` pretty-printed with a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& j);

// With validate = false only the structure is checked; data invariants are
// left to ValidateAnnotation.
std::vector<VideoAnnotation> ParseAnnotations(const Json& j, bool validate = true);
// JSON path of the element a violation of video `video` points at.
std::string AnnotationViolationPath(std::size_t video, const Violation& v);
Json AnnotationsToJson(std::span<const VideoAnnotation> videos);

std::vector<VideoPrediction> ParsePredictions(const Json& j);
Json PredictionsToJson(std::span<const VideoPrediction> videos);

std::vector<VideoAnnotation> ReadAnnotations(const std::filesystem::path& path);
std::vector<VideoPrediction> ReadPredictions(const std::filesystem::path& path);
// The write functions re-parse their own output and throw InvariantError if
// it does not satisfy the schema.
void WriteAnnotations(const std::filesystem::path& path,
                      std::span<const VideoAnnotation> videos);
void WritePredictions(const std::filesystem::path& path,
                      std::span<const VideoPrediction> videos);

Json ReportToJson(const EvalReport& report);
// Throws DataError if `j` is not a well-formed report.
void CheckReportJson(const Json& j);

Json ConfigToJson(const Config& config);
// Every key is optional and defaults to Config{}; the result is validated.
Config ConfigFromJson(const Json& j);
Config ReadConfig(const std::filesystem::path& path);

}  // namespace blinkscope

#endif  // BLINKSCOPE_JSON_IO_H_
