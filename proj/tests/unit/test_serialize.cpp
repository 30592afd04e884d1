#include <doctest.h>

#include "../support.hpp"
#include "bdlab/serialize.hpp"

using namespace bdlab;
using namespace bdlab::testing;

TEST_CASE("task round-trip is byte-identical") {
  auto task = t4_task();
  auto text = task_to_json(task);
  auto back = task_from_json(text);
  CHECK(task_to_json(back) == text);
  CHECK(back.prior == task.prior);
  CHECK(back.conditional == task.conditional);
}

TEST_CASE("combined task+spec document round-trips") {
  auto task = t4_task();
  auto spec = t4_mixed_spec();
  auto text = task_spec_to_json(task, spec);
  auto [task2, spec2] = task_spec_from_json(text);
  CHECK(task_spec_to_json(task2, spec2) == text);
  CHECK(spec2.beta == spec.beta);
  CHECK(spec2.trigger.region == spec.trigger.region);
  CHECK(spec2.target_conditional.at(3) == spec.target_conditional.at(3));
}

TEST_CASE("awkward doubles survive the decimal-string round trip") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    double v = rng.uniform() * std::pow(10.0, -static_cast<double>(rng.index(12)));
    auto s = format_probability(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("random tasks round-trip byte-exactly") {
  Rng rng(23);
  for (int i = 0; i < 20; ++i) {
    auto inst = random_instance(rng);
    auto text = task_spec_to_json(inst.task, inst.spec);
    auto [t2, s2] = task_spec_from_json(text);
    CHECK(task_spec_to_json(t2, s2) == text);
  }
}
