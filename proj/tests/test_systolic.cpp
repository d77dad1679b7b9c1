#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gsq/behavioral_queue.hpp"
#include "gsq/systolic.hpp"
#include "gsq/timer.hpp"

using namespace gsq;
using namespace gsq::systolic;

namespace {

QueueConfig cfg(unsigned wr, unsigned wo = 0, unsigned wid = 8) {
  QueueConfig c;
  c.data_width = wr;
  c.timeout_width = wo == 0 ? wr - 2 : wo;
  c.id_width = wid;
  return c;
}

void wait_ready(SystolicState& s) {
  while (!s.ready()) s.step();
}

// Issue and let it finish completely.
void apply(SystolicState& s, const ExternalOp& op) {
  wait_ready(s);
  REQUIRE(s.issue(op).accepted);
  s.drain();
}

constexpr OpSet kER{OpKind::Enqueue, OpKind::Remove};
constexpr OpSet kED{OpKind::Enqueue, OpKind::Dequeue};
constexpr OpSet kRP{OpKind::Remove, OpKind::PushFirst};

}  // namespace

TEST_SUITE("issue and timing") {
  TEST_CASE("one operation every three cycles") {
    SystolicState s(cfg(9), {4, 2});
    CHECK(s.issue(ExternalOp::push(1, 10)).accepted);
    s.step();
    CHECK_FALSE(s.issue(ExternalOp::push(2, 20)).accepted);
    s.step();
    CHECK_FALSE(s.issue(ExternalOp::push(2, 20)).accepted);
    s.step();
    CHECK(s.issue(ExternalOp::push(2, 20)).accepted);

    SystolicState t(cfg(9), {4, 2});
    std::mt19937_64 rng(3);
    std::uint64_t accepted = 0;
    for (std::uint64_t c = 0; c < 3000; ++c) {
      if (c % 3 == 0) {
        const bool pop = t.peek() && rng() % 2 == 0;
        const auto r = pop ? t.issue(ExternalOp::pop())
                           : t.issue(ExternalOp::push(1 + static_cast<Id>(rng() % 8), static_cast<Data>(rng() % 512)));
        REQUIRE(r.accepted);
        ++accepted;
      }
      t.step();
    }
    CHECK(accepted == 1000);
    CHECK(t.counters().rejected == 0);
  }

  TEST_CASE("every accepted operation frees unit 0 after exactly three cycles") {
    SystolicState s(cfg(9), {8, 2});
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
      const auto before = s.cycle();
      ExternalOp op = ExternalOp::push(1 + static_cast<Id>(rng() % 12), static_cast<Data>(rng() % 512));
      if (rng() % 3 == 0 && s.peek()) op = ExternalOp::pop();
      if (rng() % 7 == 0) op = ExternalOp::remove(1 + static_cast<Id>(rng() % 12));
      REQUIRE(s.issue(op).accepted);
      for (unsigned k = 1; k < kOpCycles; ++k) {
        s.step();
        REQUIRE_FALSE(s.ready());
        REQUIRE(s.unit(0).phase != Phase::Idle);
      }
      s.step();
      REQUIRE(s.ready());
      REQUIRE(s.unit(0).phase == Phase::Finish);
      REQUIRE(s.cycle() - before == kOpCycles);
    }
  }

  TEST_CASE("stepping an idle array only advances the clock") {
    SystolicState s(cfg(9), {4, 2});
    apply(s, ExternalOp::push(1, 30));
    const auto snap = s.snapshot();
    const auto c = s.cycle();
    s.step();
    CHECK(s.cycle() == c + 1);
    CHECK(s.snapshot() == snap);
    s.skip_idle(10);
    CHECK(s.cycle() == c + 11);
  }

  TEST_CASE("pop on an empty array is rejected") {
    SystolicState s(cfg(9), {2, 2});
    const auto r = s.issue(ExternalOp::pop());
    CHECK_FALSE(r.accepted);
    CHECK_FALSE(r.popped);
    CHECK(s.ready());
  }
}

TEST_SUITE("datapath") {
  TEST_CASE("a push into an empty array settles in unit 0 after three steps") {
    SystolicState s(cfg(9), {4, 2});
    CHECK(s.snapshot().empty());
    CHECK(s.occupancy() == 0);
    REQUIRE(s.issue(ExternalOp::push(7, 50)).accepted);
    s.step();
    s.step();
    CHECK(s.blocks(0)[0] == Element{7, 50});
    s.step();
    CHECK(s.blocks(0)[0] == Element{7, 50});
    CHECK_FALSE(s.unit(1).inbox);
    s.step();
    CHECK(s.quiescent());
    CHECK(s.snapshot() == std::vector<Element>{{7, 50}});
    CHECK(s.occupancy() == 1);
  }

  TEST_CASE("an update found locally but ranked downstream emits enqueue and dequeue") {
    SystolicState s(cfg(9), {3, 2});
    apply(s, ExternalOp::push(1, 10));
    apply(s, ExternalOp::push(2, 20));
    apply(s, ExternalOp::push(3, 30));
    REQUIRE(s.blocks(1)[0] == Element{3, 30});
    const auto rows = s.counters().rows;
    REQUIRE(s.issue(ExternalOp::push(1, 40)).accepted);
    for (int i = 0; i < 3; ++i) s.step();
    REQUIRE(s.unit(1).inbox);
    CHECK(s.unit(1).inbox->kinds() == kED);
    CHECK(s.unit(1).inbox->enqueue == Element{1, 40});
    CHECK(s.counters().rows[static_cast<std::size_t>(PropagationRow::IdOnly)] ==
          rows[static_cast<std::size_t>(PropagationRow::IdOnly)] + 1);
    s.drain();
    CHECK(s.snapshot() == std::vector<Element>{{2, 20}, {3, 30}, {1, 40}});
  }

  TEST_CASE("unit comparator") {
    const std::vector<Element> slots{{1, 100}, {2, 120}, empty_slot(8)};
    CHECK(unit_compare(slots, 110, false, 8) == 0b110);
    CHECK_FALSE(compare_slot({1, 200}, 10, true, 8));
    CHECK(sort_key(200, true, 8) == 72);
    CHECK(sort_key(10, true, 8) == 138);
    CHECK(compare_slot({1, 10}, 200, true, 8));
    CHECK(compare_slot(empty_slot(8), 0, true, 8));
    CHECK(compare_slot(empty_slot(8), 255, false, 8));
    // Ties keep FIFO: an equal slot is not displaced.
    CHECK_FALSE(compare_slot({1, 77}, 77, false, 8));
  }

  TEST_CASE("comparator agrees with the sort key everywhere") {
    for (unsigned w : {4U, 6U}) {
      const Data range = Data{1} << w;
      for (int highest = 0; highest < 2; ++highest) {
        for (Data a = 0; a < range; ++a) {
          for (Data b = 0; b < range; ++b) {
            const bool want = sort_key(a, highest == 1, w) > sort_key(b, highest == 1, w);
            REQUIRE(compare_slot({1, a}, b, highest == 1, w) == want);
          }
        }
      }
    }
  }

  TEST_CASE("propagation table") {
    CHECK(propagate(true, true, kER, false, true).empty());
    CHECK(propagate(true, false, kER, false, true) == kED);
    CHECK(propagate(false, true, kER, true, true) == kRP);
    CHECK(propagate(false, false, kER, false, true) == kER);
    CHECK(propagate(true, false, OpSet{OpKind::Remove}, false, true) == OpSet{OpKind::Dequeue});
    CHECK(propagate(false, false, OpSet{OpKind::Remove}, false, true) == OpSet{OpKind::Remove});
    CHECK(propagate(false, true, OpSet{OpKind::Enqueue}, true, true) == OpSet{OpKind::PushFirst});
    CHECK(propagate(false, false, OpSet{OpKind::Enqueue}, false, true) == OpSet{OpKind::Enqueue});
    CHECK(propagate(false, false, OpSet{OpKind::Dequeue}, false, true) == OpSet{OpKind::Dequeue});
    CHECK(propagate(false, false, OpSet{OpKind::Dequeue}, false, false).empty());
    CHECK(propagate(false, false, OpSet{OpKind::PushFirst}, true, true) == OpSet{OpKind::PushFirst});
    CHECK(propagate(false, false, OpSet{OpKind::PushFirst}, false, true).empty());
    CHECK_THROWS_AS((void)propagate(false, false, OpSet{OpKind::Enqueue, OpKind::PushFirst}, false, true),
                    HazardError);
    CHECK_THROWS_AS((void)propagate(false, false, OpSet{}, false, true), HazardError);
  }

  TEST_CASE("snapshot needs a quiescent array") {
    SystolicState s(cfg(9), {2, 2});
    s.issue(ExternalOp::push(1, 5));
    CHECK_THROWS_AS((void)s.snapshot(), std::logic_error);
    CHECK_THROWS_AS(s.skip_idle(1), std::logic_error);
    s.drain();
    CHECK(s.snapshot().size() == 1);
  }

  TEST_CASE("capacity overflow is reported") {
    SystolicState s(cfg(9), {2, 2});
    for (Id id = 1; id <= 4; ++id) apply(s, ExternalOp::push(id, 10 * id));
    CHECK(s.occupancy() == 4);
    apply(s, ExternalOp::push(2, 3));  // update still fits
    CHECK(s.occupancy() == 4);
    wait_ready(s);
    s.issue(ExternalOp::push(9, 1));
    CHECK_THROWS_AS(s.drain(), CapacityError);
  }

  TEST_CASE("event log lines") {
    SystolicState s(cfg(9), {2, 2});
    std::ostringstream log;
    s.set_event_log(&log);
    s.issue(ExternalOp::push(1, 5));
    s.drain();
    const auto text = log.str();
    CHECK(text.rfind("cycle=0,unit=0,phase=search,ops=E(1:5)+R(1)\n", 0) == 0);
    CHECK(text.find("cycle=1,unit=0,phase=shift_set") != std::string::npos);
    CHECK(text.find("cycle=2,unit=0,phase=finish") != std::string::npos);
    CHECK(text.find("unit=1") == std::string::npos);
  }
}

TEST_SUITE("equivalence with the behavioral queue") {
  TEST_CASE("random operation streams across geometries and widths") {
    std::array<std::uint64_t, 4> rows{};
    std::mt19937_64 rng(2024);
    for (std::size_t n : {2U, 4U, 8U}) {
      for (std::size_t m : {2U, 3U, 4U}) {
        for (unsigned w : {6U, 9U}) {
          for (int trial = 0; trial < 12; ++trial) {
            const auto c = cfg(w);
            SystolicState s(c, {n, m});
            QueueConfig bc = c;
            bc.capacity = n * m;
            BehavioralQueue q(bc);
            const Id id_span = static_cast<Id>(n * m + 2);
            for (int op = 0; op < 300; ++op) {
              wait_ready(s);
              const auto r = rng() % 10;
              const Id id = 1 + static_cast<Id>(rng() % id_span);
              if (r < 5) {
                if (!q.contains(id) && q.full()) continue;
                const Data d = static_cast<Data>(rng() % 5 == 0 ? rng() % 4 : rng()) & c.data_mask();
                REQUIRE(s.issue(ExternalOp::push(id, d)).accepted);
                q.push(id, d);
              } else if (r < 8) {
                const auto got = s.issue(ExternalOp::pop());
                if (q.empty()) {
                  REQUIRE_FALSE(got.accepted);
                } else {
                  REQUIRE(got.popped == q.pop());
                }
              } else {
                REQUIRE(s.issue(ExternalOp::remove(id)).accepted);
                q.remove(id);
              }
              wait_ready(s);
              REQUIRE(s.peek() == q.peek());
              if (op % 25 == 0) {
                s.drain();
                REQUIRE(s.snapshot() == std::vector<Element>(q.items().begin(), q.items().end()));
                REQUIRE(s.count_live_slots() == q.size());
                // In flight an update's old copy still counts; once settled the bound is exact.
                REQUIRE(s.occupancy() == q.size());
                REQUIRE(s.occupancy() <= n * m);
              }
            }
            s.drain();
            REQUIRE(s.snapshot() == std::vector<Element>(q.items().begin(), q.items().end()));
            REQUIRE(s.occupancy() == q.size());
            for (std::size_t i = 0; i < 4; ++i) rows[i] += s.counters().rows[i];
          }
        }
      }
    }
    for (auto r : rows) CHECK(r > 0);
  }

  TEST_CASE("serial and parallel kernels produce identical states") {
    std::mt19937_64 rng(99);
    SystolicState a(cfg(12, 8, 12), {64, 3});
    SystolicState b(cfg(12, 8, 12), {64, 3});
    b.set_parallel_threshold(1);
    for (int c = 0; c < 20000; ++c) {
      if (a.ready()) {
        ExternalOp op = ExternalOp::push(1 + static_cast<Id>(rng() % 150), static_cast<Data>(rng() % 4096));
        if (rng() % 3 == 0 && a.peek()) op = ExternalOp::pop();
        if (rng() % 11 == 0) op = ExternalOp::remove(1 + static_cast<Id>(rng() % 150));
        const auto ra = a.issue(op);
        const auto rb = b.issue(op);
        REQUIRE(ra.accepted == rb.accepted);
        REQUIRE(ra.popped == rb.popped);
      }
      a.step_serial();
      b.step_parallel();
      REQUIRE(a == b);
    }
  }
}
