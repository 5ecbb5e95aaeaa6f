#include "rsf/csv.hpp"

#include <fstream>
#include <system_error>

#include "rsf/config.hpp"
#include "rsf/error.hpp"

namespace rsf {

namespace {

class Table {
 public:
  explicit Table(std::string_view header) : out_(header) { out_.push_back('\n'); }

  Table& cell(std::string_view s) {
    sep();
    out_ += s;
    return *this;
  }
  Table& num(double v) { return cell(format_double(v)); }
  Table& count(std::size_t v) { return cell(std::to_string(v)); }
  Table& flag(bool v) { return cell(v ? "1" : "0"); }
  Table& blank() { return cell(""); }

  void end_row() {
    out_.push_back('\n');
    fresh_ = true;
  }

  std::string str() && { return std::move(out_); }

 private:
  void sep() {
    if (!fresh_) out_.push_back(',');
    fresh_ = false;
  }

  std::string out_;
  bool fresh_ = true;
};

}  // namespace

std::string trajectories_csv(std::span<const RolloutRecord> records) {
  Table t(kTrajectoryHeader);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const RolloutRecord& rec = records[r];
    const std::size_t steps = rec.steps();
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
      const JointState& x = rec.states[k];
      for (std::size_t i = 0; i < x.agents(); ++i) {
        t.count(r).count(k).count(i + 1);
        t.num(x(i, 0));
        if (x.dim() > 1) t.num(x(i, 1));
        else t.blank();

        const bool acted = k < steps;
        if (acted && !rec.actions[k].agents[i].empty()) t.num(rec.actions[k].agents[i][0]);
        else t.blank();

        const bool flagged = acted && rec.filtered && i < rec.branches[k].size() && rec.branches[k][i];
        if (flagged) t.cell(branch_name(*rec.branches[k][i]));
        else t.blank();
        if (flagged && rec.feasible[k][i]) t.flag(*rec.feasible[k][i]);
        else t.blank();

        t.flag(rec.agent_safe[k][i]);
        if (acted) t.num(rec.rewards[k]);
        else t.blank();
        t.end_row();
      }
    }
  }
  return std::move(t).str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  Table t(kSweepHeader);
  for (const SweepRow& row : rows) {
    t.cell(sweep_axis_name(row.axis)).num(row.value);
    t.num(row.violations_mean).num(row.violations_std);
    t.num(row.mse_mean).num(row.mse_std);
    t.num(row.reward_mean).num(row.reward_std);
    t.num(row.feas_rate_mean);
    t.end_row();
  }
  return std::move(t).str();
}

std::string metrics_csv(std::span<const LabeledMetrics> rows) {
  Table t(kMetricsHeader);
  for (const auto& [label, m] : rows) {
    t.cell(label).count(m.rollouts).count(m.steps).count(m.violations).num(m.violation_rate);
    t.num(m.mse).num(m.cumulative_reward).count(m.filtered_decisions).num(m.feasibility_rate);
    for (std::size_t b : m.branch_counts) t.count(b);
    t.end_row();
  }
  return std::move(t).str();
}

std::string certify_csv(const GuaranteeReport& report) {
  Table t(kCertifyHeader);
  for (const StateCertificate& s : report.states) {
    t.count(s.index).num(s.h).num(s.margin).flag(s.passed);
    t.end_row();
  }
  return std::move(t).str();
}

std::string guarantee_csv(const GuaranteeReport& report) {
  Table t(kGuaranteeHeader);
  t.num(report.beta).num(report.alpha).num(report.epsilon).num(report.h0).count(report.k);
  t.num(report.delta).flag(delta_is_vacuous(report.epsilon, report.k));
  t.count(report.states.size()).count(report.skipped).count(report.passed).num(report.pass_fraction);
  if (report.states.empty()) t.blank();
  else t.num(report.min_margin());
  t.end_row();
  return std::move(t).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace rsf
