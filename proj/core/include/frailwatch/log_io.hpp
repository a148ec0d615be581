#pragma once

#include <iosfwd>
#include <string>

#include "frailwatch/types.hpp"

namespace frailwatch {

// Motion log wire format: JSONL. One record header line
//   {"type":"record","record_id":...,...}
// followed by its frame lines
//   {"type":"frame","t":...,...}
// A file may contain several record blocks back to back. Floats are written
// with shortest round-trip precision, so parse(serialize(D)) == D bit-exactly.

std::string record_header_json(const MonitoringRecord& r);
std::string frame_json(const FrameMotionSummary& f);

void serialize_log(const LabeledDataset& d, std::ostream& out);
void serialize_log_file(const LabeledDataset& d, const std::string& path);
void serialize_record(const MonitoringRecord& r, std::ostream& out);

// Parses one JSONL log stream. Participants are synthesized with default
// metadata; load_manifest attaches the real metadata. Empty input yields an
// empty dataset. Errors: ParseError with the 1-based line number for
// malformed lines, ValidationError for invariant violations.
LabeledDataset parse_log(std::istream& in);
LabeledDataset parse_log_file(const std::string& path);

// Dataset manifest: JSON listing record files (relative to the manifest's
// directory) plus participant metadata.
void write_manifest(const LabeledDataset& d,
                    const std::vector<std::string>& record_files,
                    const std::string& manifest_path);
LabeledDataset load_manifest(const std::string& manifest_path);

// Writes content to a temp file in the target directory, then renames it into
// place so readers never observe a truncated artifact.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace frailwatch
