#include "llm/zeroshot.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "llm/prompts.h"

namespace midistring {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Lowercases and maps label separators (_ -) to spaces so "Pop_Latin",
// "pop-latin", and "Pop Latin" all compare equal.
std::string match_key(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// Final classification segment: after the last "classification" marker when
// present, otherwise the last non-empty line.
std::string final_segment(const std::string& reply) {
  std::string lowered = reply;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto marker = lowered.rfind("classification");
  if (marker != std::string::npos) {
    return reply.substr(marker + std::string_view("classification").size());
  }
  auto end = reply.find_last_not_of(" \t\r\n");
  if (end == std::string::npos) return "";
  auto begin = reply.find_last_of('\n', end);
  begin = begin == std::string::npos ? 0 : begin + 1;
  return reply.substr(begin, end - begin + 1);
}

struct Occurrence {
  size_t begin;
  size_t end;  // one past
  int label_index;
};

}  // namespace

ZeroShotResult match_reply_strict(const std::string& reply,
                                  const Taxonomy& taxonomy, LabelTask task) {
  ZeroShotResult result;
  result.raw_reply = reply;

  const auto& labels =
      task == LabelTask::Genre ? taxonomy.genres : taxonomy.styles;
  const std::string segment = match_key(final_segment(reply));

  std::vector<Occurrence> occurrences;
  for (int li = 0; li < static_cast<int>(labels.size()); ++li) {
    const std::string key = match_key(labels[li]);
    if (key.empty()) continue;
    for (size_t at = segment.find(key); at != std::string::npos;
         at = segment.find(key, at + 1)) {
      const bool left_ok = at == 0 || !word_char(segment[at - 1]);
      const size_t end = at + key.size();
      const bool right_ok = end == segment.size() || !word_char(segment[end]);
      if (left_ok && right_ok) occurrences.push_back({at, end, li});
    }
  }

  // An occurrence nested inside a longer label's occurrence is subsumed.
  std::set<int> matched;
  for (const auto& occ : occurrences) {
    bool subsumed = false;
    for (const auto& other : occurrences) {
      if (other.label_index == occ.label_index) continue;
      if (other.begin <= occ.begin && occ.end <= other.end &&
          (other.end - other.begin) > (occ.end - occ.begin)) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) matched.insert(occ.label_index);
  }

  if (matched.size() == 1) {
    result.label = labels[*matched.begin()];
  }
  return result;
}

Result<ZeroShotResult, BackendError> zero_shot_classify(
    const LlmBackend& backend, const Song& song, LabelTask task,
    const Taxonomy& taxonomy) {
  CompletionRequest request{build_recognition_prompt(song, task), 0.1, 512};
  auto completion = backend.complete(request);
  if (!completion) return completion.error();
  return match_reply_strict(completion.value().text, taxonomy, task);
}

}  // namespace midistring
