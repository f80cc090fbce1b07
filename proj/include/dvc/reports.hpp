#pragma once

#include <filesystem>
#include <ostream>
#include <span>

#include "dvc/caption_metrics.hpp"
#include "dvc/context_extract.hpp"
#include "dvc/interval_ops.hpp"
#include "dvc/io.hpp"
#include "dvc/rerank_augment.hpp"

namespace dvc {

// Structured-text forms of the evaluation reports. The field names are the
// stable schema consumed by downstream tooling.
Json to_json(const PRTable& table);
PRTable pr_table_from_json(const Json& doc);

Json to_json(const DenseEvalReport& report);
DenseEvalReport dense_eval_from_json(const Json& doc);

Json to_json(const DiversityReport& report);
DiversityReport diversity_from_json(const Json& doc);

Json to_json(const EventContextBundle& bundle);
Json to_json(std::span<const AugmentedPair> pairs);

template <typename Report>
void save_report(const Report& report, const std::filesystem::path& path) {
  write_json(path, to_json(report));
}

// Aligned human-readable tables.
void print_table(std::ostream& os, const PRTable& table);
void print_table(std::ostream& os, const DenseEvalReport& report);
void print_table(std::ostream& os, const DiversityReport& report);

}  // namespace dvc
