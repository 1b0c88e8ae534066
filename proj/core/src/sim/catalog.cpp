#include "rca/sim/catalog.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace rca::sim {
namespace {

constexpr double kInf = 1e300;

constexpr std::array<MetricProfile, 6> kHostMetrics{{
    {"cpu_usage", 30.0, 2.5, 0.0, 100.0},
    {"mem_usage", 45.0, 0.1, 0.0, 100.0},
    {"disk_util", 25.0, 2.0, 0.0, 100.0},
    {"net_loss", 0.2, 0.03, 0.0, 100.0},
    {"io_wait", 4.0, 0.4, 0.0, kInf},
    {"fd_count", 1200.0, 15.0, 0.0, kInf},
}};

constexpr std::array<MetricProfile, 4> kPodMetrics{{
    {"pod_cpu", 20.0, 2.0, 0.0, 100.0},
    {"pod_mem", 35.0, 0.3, 0.0, 100.0},
    {"restart_rate", 0.05, 0.01, 0.0, kInf},
    {"throttle_ratio", 0.02, 0.005, 0.0, 1.0},
}};

constexpr std::array<MetricProfile, 4> kServiceMetrics{{
    {"latency_ms", 40.0, 2.0, 0.0, kInf},
    {"error_rate", 0.005, 0.001, 0.0, 1.0},
    {"throughput", 100.0, 3.0, 0.0, kInf},
    {"timeout_ratio", 0.002, 0.0005, 0.0, 1.0},
}};

constexpr std::array<MetricEffect, 1> kCpuSpike{{{"cpu_usage", 45.0}}};
constexpr std::array<MetricEffect, 1> kMemLeak{{{"io_wait", 6.0}}};
constexpr std::array<MetricEffect, 1> kDiskSat{{{"disk_util", 55.0}}};
constexpr std::array<MetricEffect, 1> kPacketLoss{{{"net_loss", 6.0}}};
constexpr std::array<MetricEffect, 1> kIoLatency{{{"io_wait", 35.0}}};
constexpr std::array<MetricEffect, 1> kFdExhaustion{{{"fd_count", 4000.0}}};

constexpr std::array<MetricEffect, 1> kRestartLoop{{{"restart_rate", 2.0}}};
constexpr std::array<MetricEffect, 1> kMemorySurge{{{"pod_mem", 40.0}}};
constexpr std::array<MetricEffect, 2> kThrottling{{{"throttle_ratio", 0.5}, {"pod_cpu", -6.0}}};

constexpr std::array<MetricEffect, 2> kInterfaceTimeout{{{"latency_ms", 300.0}, {"timeout_ratio", 0.4}}};
constexpr std::array<MetricEffect, 1> kCallFailure{{{"error_rate", 0.25}}};
constexpr std::array<MetricEffect, 2> kErrorSurge{{{"error_rate", 0.2}, {"latency_ms", 25.0}}};
constexpr std::array<MetricEffect, 2> kThroughputCollapse{{{"throughput", -60.0}, {"latency_ms", 50.0}}};

const std::array<FaultProfile, 6> kHostFaults{{
    {EntityKind::host, "cpu-spike", kCpuSpike, "",
     "cpu usage critical at {n} percent on core {k}",
     "Identify the runaway process on the host and throttle or reschedule it; review CPU limits of co-located pods."},
    {EntityKind::host, "memory-leak", kMemLeak, "mem_usage",
     "memory usage above threshold {n} percent",
     "Restart or patch the leaking host daemon; enable memory limits and track RSS growth."},
    {EntityKind::host, "disk-saturation", kDiskSat, "",
     "disk {dev} utilization saturated {n} percent",
     "Free or expand disk capacity; move log/spool directories off the saturated device."},
    {EntityKind::host, "network-packet-loss", kPacketLoss, "",
     "packet loss detected on eth0 rate {n}",
     "Check NIC and switch port health; fail traffic over to a healthy path."},
    {EntityKind::host, "io-latency", kIoLatency, "",
     "io wait exceeded {n} ms on {dev}",
     "Inspect storage backend latency; reduce synchronous IO or migrate hot volumes."},
    {EntityKind::host, "fd-exhaustion", kFdExhaustion, "",
     "too many open files count={n}",
     "Raise the file-descriptor limit and fix descriptor leaks in long-lived processes."},
}};

const std::array<FaultProfile, 3> kPodFaults{{
    {EntityKind::pod, "restart-loop", kRestartLoop, "",
     "container restarted exit code {k} back-off {n}s",
     "Inspect container exit reason and liveness probes; roll back the last deployment if needed."},
    {EntityKind::pod, "memory-surge", kMemorySurge, "",
     "container memory near limit {n} MiB",
     "Raise the pod memory limit or reduce working-set size; check for unbounded caches."},
    {EntityKind::pod, "throttling", kThrottling, "",
     "cpu throttled for {n} periods",
     "Increase the pod CPU quota or scale out replicas."},
}};

const std::array<FaultProfile, 4> kServiceFaults{{
    {EntityKind::service, "interface-timeout", kInterfaceTimeout, "",
     "upstream request timeout after {n} ms",
     "Tune client timeouts and add circuit breaking; find the slow dependency on the call path."},
    {EntityKind::service, "call-failure", kCallFailure, "",
     "call to {svc} failed with status 500",
     "Check the failing downstream dependency and enable retries with backoff."},
    {EntityKind::service, "error-rate-surge", kErrorSurge, "",
     "internal error while handling request id={hex}",
     "Roll back recent releases and inspect handler exceptions."},
    {EntityKind::service, "throughput-collapse", kThroughputCollapse, "",
     "request queue stalled depth={n}",
     "Drain the stalled queue, scale workers, and check for lock contention."},
}};

} // namespace

std::string_view to_string(EntityKind kind) {
    switch (kind) {
    case EntityKind::host: return "host";
    case EntityKind::pod: return "pod";
    case EntityKind::service: return "service";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::deploy: return "deploy";
    case EdgeKind::member: return "member";
    case EdgeKind::call: return "call";
    case EdgeKind::causal: return "causal";
    }
    return "?";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
    if (text == "host") return EntityKind::host;
    if (text == "pod") return EntityKind::pod;
    if (text == "service") return EntityKind::service;
    return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view text) {
    if (text == "deploy") return EdgeKind::deploy;
    if (text == "member") return EdgeKind::member;
    if (text == "call") return EdgeKind::call;
    if (text == "causal") return EdgeKind::causal;
    return std::nullopt;
}

std::span<const MetricProfile> metric_profiles(EntityKind kind) {
    switch (kind) {
    case EntityKind::host: return kHostMetrics;
    case EntityKind::pod: return kPodMetrics;
    case EntityKind::service: return kServiceMetrics;
    }
    return {};
}

std::span<const FaultProfile> fault_catalog(EntityKind kind) {
    switch (kind) {
    case EntityKind::host: return kHostFaults;
    case EntityKind::pod: return kPodFaults;
    case EntityKind::service: return kServiceFaults;
    }
    return {};
}

std::optional<std::size_t> fault_index(EntityKind kind, std::string_view fault) {
    const auto catalog = fault_catalog(kind);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].name == fault) {
            return i;
        }
    }
    return std::nullopt;
}

const FaultProfile& fault_profile(EntityKind kind, std::string_view fault) {
    const auto idx = fault_index(kind, fault);
    if (!idx) {
        throw std::invalid_argument("unknown " + std::string(to_string(kind)) + " fault '" +
                                    std::string(fault) + "'");
    }
    return fault_catalog(kind)[*idx];
}

const FaultProfile* find_fault(std::string_view fault) {
    for (const auto kind : {EntityKind::host, EntityKind::pod, EntityKind::service}) {
        for (const auto& profile : fault_catalog(kind)) {
            if (profile.name == fault) {
                return &profile;
            }
        }
    }
    return nullptr;
}

std::string_view downstream_fault(const FaultProfile& source, EntityKind target) {
    const std::string_view name = source.name;
    if (target == EntityKind::pod) {
        if (name == "cpu-spike" || name == "io-latency") return "throttling";
        if (name == "disk-saturation") return "memory-surge";
        return "restart-loop";
    }
    if (target == EntityKind::service) {
        if (source.kind == EntityKind::pod) {
            if (name == "memory-surge") return "error-rate-surge";
            if (name == "throttling") return "throughput-collapse";
            return "interface-timeout";
        }
        if (name == "error-rate-surge" || name == "call-failure") return "call-failure";
        return "interface-timeout";
    }
    // Faults do not propagate down into hosts.
    return fault_catalog(EntityKind::host).front().name;
}

std::string_view key_metric(const FaultProfile& fault) {
    if (!fault.cumulative_metric.empty()) {
        return fault.cumulative_metric;
    }
    return fault.effects.front().metric;
}

} // namespace rca::sim
