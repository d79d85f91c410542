#pragma once

#include "settings.hpp"

namespace expgnn::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kDivergence = 4,
  kCheckFailed = 5,
};

int cmd_gen(const Settings& s);
int cmd_train(const Settings& s);
int cmd_eval(const Settings& s);
int cmd_gradcheck(const Settings& s);
int cmd_wlcheck(const Settings& s);
int cmd_calibrate(const Settings& s);

}  // namespace expgnn::cli
