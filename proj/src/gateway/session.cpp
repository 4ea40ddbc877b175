#include "gateway/session.hpp"

#include <chrono>
#include <cmath>

#include "harness/harness.hpp"
#include "kernel/errors.hpp"

namespace hare::gateway {

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Training: return "training";
        case Phase::Live: return "live";
        case Phase::Finished: return "finished";
    }
    return "unknown";
}

json envelope(const std::string& type, const std::string& session, json payload, std::uint64_t seq) {
    return {{"type", type}, {"session", session}, {"payload", std::move(payload)}, {"seq", seq}};
}

Intervention parse_command(const json& payload, const Simulation& sim) {
    if (!payload.is_object()) throw ProtocolError("command payload must be an object");
    const bool traffic = sim.config().scenario == Scenario::Traffic;
    Intervention iv;
    iv.kind = traffic ? InterventionKind::TollChange : InterventionKind::PriceChange;
    if (payload.contains("kind")) {
        if (!payload.at("kind").is_string()) throw ProtocolError("kind must be a string");
        try {
            iv.kind = parse_intervention_kind(payload.at("kind").get<std::string>());
        } catch (const std::exception&) {
            throw ProtocolError("unknown command kind");
        }
    }
    if (!payload.contains("target")) throw ProtocolError("command needs a target");
    const auto& target = payload.at("target");
    if (target.is_string()) iv.target = sim.resolve_target(target.get<std::string>());
    else if (target.is_number_integer()) iv.target = sim.resolve_target(std::to_string(target.get<int>()));
    else throw ProtocolError("target must be a string or integer");
    if (!payload.contains("delta") || !payload.at("delta").is_number()) throw ProtocolError("command needs a numeric delta");
    const double delta = payload.at("delta").get<double>();
    const double scale = traffic ? 100.0 : 10.0;
    const double units = delta * scale;
    iv.delta = std::fabs(units - std::round(units)) < 1e-6 ? static_cast<std::int64_t>(std::llround(units)) : 0;
    iv.source = InterventionSource::Human;
    if (payload.contains("client_tag")) {
        const auto& tag = payload.at("client_tag");
        iv.client_tag = tag.is_string() ? tag.get<std::string>() : tag.dump();
    }
    return iv;
}

Session::Session(std::string id, SimConfig config, Pacing pacing)
    : id_(std::move(id)), config_(std::move(config)), pacing_(pacing) {
    if (config_.scenario == Scenario::Traffic)
        frame_every_ = std::max<std::int64_t>(1, std::llround(1.0 / (config_.frame_rate * config_.dt)));
    sim_ = std::make_unique<Simulation>(config_, config_.seed, Adaptivity::Random, false);
}

Session::~Session() { stop(); }

Phase Session::phase() const {
    std::lock_guard lock(mutex_);
    return phase_;
}

json Session::frame_locked(bool full) const {
    json f = sim_->frame(true);
    f["phase"] = to_string(phase_);
    f["full"] = full;
    return f;
}

json Session::snapshot_frame() const {
    std::lock_guard lock(mutex_);
    return frame_locked(true);
}

void Session::broadcast_locked(const std::string& type, const json& payload) {
    std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers_)
        if (auto s = w.lock()) s->deliver(type, id_, payload);
}

void Session::attach(const std::shared_ptr<Subscriber>& subscriber) {
    std::lock_guard lock(mutex_);
    subscribers_.push_back(subscriber);
    subscriber->deliver("frame", id_, frame_locked(true));
}

void Session::detach(const Subscriber* subscriber) {
    std::lock_guard lock(mutex_);
    std::erase_if(subscribers_, [&](const auto& w) {
        auto s = w.lock();
        return !s || s.get() == subscriber;
    });
}

void Session::start_live() {
    {
        std::lock_guard lock(mutex_);
        if (phase_ != Phase::Training) throw ProtocolError("session is not in training");
        sim_ = std::make_unique<Simulation>(config_, config_.seed, std::nullopt, !script_);
        script_next_ = 0;
        phase_ = Phase::Live;
        queue_.clear();
        broadcast_locked("start_live", {{"phase", "live"}});
        broadcast_locked("frame", frame_locked(true));
    }
    wake_.notify_all();
}

void Session::enqueue(const json& payload, const std::shared_ptr<Subscriber>& reply_to) {
    std::lock_guard lock(mutex_);
    if (phase_ == Phase::Finished) {
        json result{{"accepted", false}, {"reason", "phase"}};
        if (payload.is_object() && payload.contains("client_tag")) result["client_tag"] = payload.at("client_tag");
        reply_to->deliver("command_result", id_, result);
        return;
    }
    queue_.push_back({payload, reply_to});
}

void Session::set_script(std::vector<Intervention> script) {
    std::lock_guard lock(mutex_);
    script_ = std::move(script);
}

void Session::tick_locked() {
    if (script_ && phase_ == Phase::Live) {
        while (script_next_ < script_->size() && (*script_)[script_next_].issued_tick <= sim_->clock().tick_index)
            sim_->submit((*script_)[script_next_++]);
    }
    while (!queue_.empty()) {
        auto pending = std::move(queue_.front());
        queue_.pop_front();
        json result;
        if (pending.payload.is_object() && pending.payload.contains("client_tag"))
            result["client_tag"] = pending.payload.at("client_tag");
        try {
            const auto r = sim_->submit(parse_command(pending.payload, *sim_));
            result["accepted"] = r.accepted;
            result["reason"] = r.accepted ? "" : std::string(to_string(r.reason));
            result.update(r.account);
        } catch (const ProtocolError& e) {
            result["accepted"] = false;
            result["reason"] = to_string(RejectReason::UnknownTarget);
            result["error"] = e.what();
        }
        result["tick"] = sim_->clock().tick_index;
        if (auto s = pending.reply_to.lock()) s->deliver("command_result", id_, result);
    }

    if (phase_ == Phase::Training && sim_->done())
        sim_ = std::make_unique<Simulation>(config_, config_.seed, Adaptivity::Random, false);
    sim_->step();
    if (sim_->clock().tick_index % frame_every_ == 0) broadcast_locked("frame", frame_locked(false));
    if (phase_ == Phase::Live && sim_->done()) finish_locked();
}

void Session::finish_locked() {
    sim_->finish();
    phase_ = Phase::Finished;
    const auto metrics = sim_->metrics();
    const auto key = primary_metric(config_.scenario);
    json payload{{"metrics", metrics}, {"score", metrics.value(key, 0.0)}, {"score_metric", key}};
    broadcast_locked("frame", frame_locked(true));
    broadcast_locked("game_over", payload);
}

void Session::advance(std::int64_t ticks) {
    std::lock_guard lock(mutex_);
    for (std::int64_t i = 0; i < ticks && phase_ != Phase::Finished; ++i) tick_locked();
}

RunRecord Session::live_record() const {
    std::lock_guard lock(mutex_);
    if (phase_ == Phase::Training) return {};
    return sim_->record();
}

void Session::run() {
    if (pacing_ == Pacing::Manual || thread_.joinable()) return;
    thread_ = std::thread([this] { pace(); });
}

void Session::stop() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

void Session::pace() {
    using clock = std::chrono::steady_clock;
    const double seconds_per_tick =
        (config_.scenario == Scenario::Traffic ? config_.dt : config_.water.seconds_per_period) / config_.pacing_speed;
    const auto interval = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(seconds_per_tick));
    auto next = clock::now();
    std::unique_lock lock(mutex_);
    while (!stopping_ && phase_ != Phase::Finished) {
        if (pacing_ == Pacing::Realtime) {
            next += interval;
            wake_.wait_until(lock, next, [this] { return stopping_; });
            if (stopping_) break;
        }
        tick_locked();
        if (pacing_ == Pacing::FreeRun) {
            lock.unlock();
            std::this_thread::yield();
            lock.lock();
        }
    }
}

}  // namespace hare::gateway
