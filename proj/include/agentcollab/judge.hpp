#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agentcollab/harness.hpp"
#include "agentcollab/provider.hpp"
#include "agentcollab/scenario.hpp"

namespace agentcollab {

struct AssertionVerdict {
  std::string assertion_id;
  AssertionSide side = AssertionSide::user;
  bool verdict = false;
  std::string reason;

  bool operator==(const AssertionVerdict&) const = default;
};

/// Judge answer contract, one line per assertion:
///
///   <id>: TRUE|FALSE — <reason>
///
/// "-", "--", "–" or ":" also separate the reason. Other lines are ignored.
/// JudgeParseFailure on duplicate, missing or unexpected ids. Sides are
/// left at their default; callers fill them in.
std::vector<AssertionVerdict> parse_verdicts(std::string_view raw,
                                             const std::vector<std::string>& expected_ids);

std::string format_verdict_line(const AssertionVerdict& v);

struct JudgeResult {
  std::vector<AssertionVerdict> verdicts;  // scenario assertion order
  bool supervisor_reliable = false;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgeResult judge(const Trajectory& trajectory, const Scenario& scenario) = 0;
};

/// One line per event, for judge prompts.
std::string render_transcript(const std::vector<TrajectoryEvent>& events, bool user_visible_only);

/// LLM judge (caller "judge"). User-side assertions see only user-visible
/// events; system-side ones see the full log. An unparseable answer is
/// retried once, then every assertion in it is false with reason
/// "unparseable". A final call asks whether the supervisor did its best.
class ModelJudge final : public Judge {
 public:
  explicit ModelJudge(ModelBackend& backend, std::uint64_t seed = 0)
      : backend_(backend), seed_(seed) {}
  JudgeResult judge(const Trajectory& trajectory, const Scenario& scenario) override;

 private:
  std::vector<AssertionVerdict> judge_side(const Trajectory& trajectory, const Scenario& scenario,
                                           AssertionSide side);
  bool ask_reliability(const Trajectory& trajectory, const Scenario& scenario);

  ModelBackend& backend_;
  std::uint64_t seed_;
};

/// Deterministic judge over the event log, driven by an assertion's
/// "check" object:
///
///   {"tool_called": "book_flight", "args": {...}, "min_count": 1}
///   {"not_called": "cancel_booking"}
///   {"called_before": ["search_flight", "book_flight"]}
///   {"user_sees": ["booked", "June 23"]}
///   {"message_sent": {"to": "flight_agent", "contains": "DEN"}}
///   {"all": [<check>, ...]}
///
/// Without a check it recognises "X is executed before Y" and "X is
/// executed"; anything else is judged false. A tool counts as executed
/// when its result is not an error. The supervisor counts as reliable when
/// the session did not end in error and every user message got a reply.
class OracleJudge final : public Judge {
 public:
  JudgeResult judge(const Trajectory& trajectory, const Scenario& scenario) override;

  static AssertionVerdict evaluate(const Assertion& assertion,
                                   const std::vector<TrajectoryEvent>& events);
  static bool supervisor_reliable(const Trajectory& trajectory);
};

Json verdict_to_json(const AssertionVerdict& v);
AssertionVerdict verdict_from_json(const Json& j);
/// One verdict per line. The reliability flag lives in session.json.
void write_verdicts(const std::filesystem::path& path, const std::vector<AssertionVerdict>& verdicts);
std::vector<AssertionVerdict> read_verdicts(const std::filesystem::path& path);

}  // namespace agentcollab
