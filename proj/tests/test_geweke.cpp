#include "doctest.h"

#include "joint_geweke.hpp"

TEST_CASE("getting it right: full sampler, every prior family") {
  for (const auto& c : testutil::geweke_cases()) {
    const auto rep = testutil::run_joint_geweke(c.cfg, {});
    std::string worst;
    for (const auto& s : rep.stats)
      if (std::abs(s.z) == rep.max_abs_z()) worst = s.name;
    INFO(c.label << ": max |z| " << rep.max_abs_z() << " at " << worst);
    CHECK(rep.count() >= 20);
    CHECK(rep.max_abs_z() < 4.0);
  }
}
