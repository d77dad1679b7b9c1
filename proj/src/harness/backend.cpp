#include "gsq/behavioral_queue.hpp"
#include "gsq/harness.hpp"

namespace gsq {

namespace {

// The behavioral queue behind the same issue cadence as the hardware, so
// both backends see identical arbitration decisions.
class BehavioralBackend final : public Backend {
 public:
  explicit BehavioralBackend(const QueueConfig& config) : queue_(config) {}

  bool ready() const override { return gate_ == 0; }
  bool quiescent() const override { return gate_ == 0; }
  std::optional<Element> peek() const override { return queue_.peek(); }
  void push(Id id, Data data) override {
    accept();
    queue_.push(id, data);
  }
  Element pop() override {
    accept();
    return queue_.pop();
  }
  void remove(Id id) override {
    accept();
    queue_.remove(id);
  }
  void step() override {
    if (gate_ > 0) --gate_;
  }
  void skip(std::uint64_t cycles) override { gate_ = cycles >= gate_ ? 0 : gate_ - static_cast<unsigned>(cycles); }
  std::vector<Element> settle_contents() override {
    gate_ = 0;
    return {queue_.items().begin(), queue_.items().end()};
  }

 private:
  void accept() {
    if (gate_ != 0) throw std::logic_error("operation issued before the queue was ready");
    gate_ = systolic::kOpCycles;
  }

  BehavioralQueue queue_;
  unsigned gate_ = 0;
};

class SystolicBackend final : public Backend {
 public:
  SystolicBackend(const QueueConfig& config, const systolic::Geometry& geometry) : state_(config, geometry) {}

  bool ready() const override { return state_.ready(); }
  bool quiescent() const override { return state_.quiescent(); }
  std::optional<Element> peek() const override { return state_.peek(); }
  void push(Id id, Data data) override { expect(state_.issue(systolic::ExternalOp::push(id, data)).accepted); }
  Element pop() override {
    const auto r = state_.issue(systolic::ExternalOp::pop());
    if (!r.popped) {
      if (!state_.peek()) throw EmptyQueueError();
      expect(false);
    }
    return *r.popped;
  }
  void remove(Id id) override { expect(state_.issue(systolic::ExternalOp::remove(id)).accepted); }
  void step() override { state_.step(); }
  void skip(std::uint64_t cycles) override { state_.skip_idle(cycles); }
  std::vector<Element> settle_contents() override {
    state_.drain();
    return state_.snapshot();
  }

 private:
  static void expect(bool accepted) {
    if (!accepted) throw std::logic_error("operation issued before the queue was ready");
  }

  systolic::SystolicState state_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(BackendKind kind, const QueueConfig& config,
                                      const systolic::Geometry& geometry) {
  if (kind == BackendKind::Systolic) return std::make_unique<SystolicBackend>(config, geometry);
  return std::make_unique<BehavioralBackend>(config);
}

}  // namespace gsq
