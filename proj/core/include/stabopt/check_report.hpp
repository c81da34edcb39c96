#ifndef STABOPT_CHECK_REPORT_HPP
#define STABOPT_CHECK_REPORT_HPP

#include <map>
#include <string>

namespace stabopt {

// One quantitative check: a measured number against a bound with slack.
// Upper checks pass when measured <= bound + slack, lower checks when
// measured >= bound - slack.
struct CheckReport {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool lower_check = false;
  bool pass = false;
  std::map<std::string, double> context;
  std::string location;  // worst offender, empty when not applicable

  static CheckReport upper(std::string name, double measured, double bound, double slack) {
    CheckReport r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.slack = slack;
    r.pass = measured <= bound + slack;
    return r;
  }

  static CheckReport lower(std::string name, double measured, double bound, double slack) {
    CheckReport r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.slack = slack;
    r.lower_check = true;
    r.pass = measured >= bound - slack;
    return r;
  }
};

}  // namespace stabopt

#endif
