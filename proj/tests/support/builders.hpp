#ifndef PREFFORGE_TESTS_BUILDERS_HPP_
#define PREFFORGE_TESTS_BUILDERS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "prefforge/datasets.hpp"

namespace prefforge::testing {

// Fluent ResponseRecord builder so fixtures stay one-liners.
class Resp {
 public:
  Resp(std::string rid, std::string qid) {
    r_.rid = std::move(rid);
    r_.qid = std::move(qid);
    r_.text = "";
    r_.temperature = 1.0;
    r_.epoch = 0;
  }
  Resp& text(std::string t) { r_.text = std::move(t); return *this; }
  Resp& answer(std::string a) { r_.answer = std::move(a); return *this; }
  Resp& correct(bool c) { r_.correct = c; return *this; }
  Resp& orm(double s) { r_.orm_score = s; return *this; }
  Resp& scores(std::vector<double> s) {
    if (r_.steps.size() != s.size())
      r_.steps.assign(s.size(), "step");
    r_.step_scores = std::move(s);
    return *this;
  }
  Resp& steps(std::vector<std::string> s) { r_.steps = std::move(s); return *this; }
  Resp& temperature(double t) { r_.temperature = t; return *this; }
  Resp& epoch(int e) { r_.epoch = e; return *this; }
  operator datasets::ResponseRecord() const { return r_; }
  datasets::ResponseRecord build() const { return r_; }

 private:
  datasets::ResponseRecord r_;
};

inline datasets::ResponseGroup group_of(std::string qid,
                                        std::vector<datasets::ResponseRecord> rs) {
  return datasets::ResponseGroup{std::move(qid), std::move(rs)};
}

}  // namespace prefforge::testing

#endif  // PREFFORGE_TESTS_BUILDERS_HPP_
