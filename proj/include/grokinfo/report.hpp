// Figure-data bundles for the plotting component. Each input directory is
// a run, a sweep (sweep.json) or an ablation (ablation.json).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace grokinfo {

struct FigureData {
    std::string kind;  // accuracy, progress, pareto, sweep_synergy, ablation
    std::filesystem::path file;
    std::vector<std::string> log_scale;  // columns meant for log axes
    std::string source;
};

struct ReportBundle {
    std::filesystem::path dir;
    std::vector<FigureData> figures;
};

/// Writes the figure-data files plus manifest.json into out_dir.
/// A run yields accuracy, progress and pareto files; a sweep yields one
/// synergy overlay per axis value; an ablation yields one base/syn/inverse
/// overlay. Refuses inputs whose artifacts disagree on the config hash
/// unless `force` is set.
ReportBundle build_report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                          bool force = false);

}  // namespace grokinfo
